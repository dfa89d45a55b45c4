#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshconv/network.hpp"

namespace meshconv {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

/// Layout is documented in docs/checkpoint_format.md.
std::vector<std::uint8_t> serialize_checkpoint(const ModelParams& params, const ModelConfig& config);

/// Throws CheckpointError on bad magic, version mismatch, truncation, or
/// arrays that do not match the stored config.
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const ModelConfig& config);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// As load_checkpoint, but throws CheckpointError naming the first field
/// where the stored config differs from `expected`.
Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace meshconv
