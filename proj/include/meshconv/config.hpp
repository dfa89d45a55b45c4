#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshconv/data.hpp"
#include "meshconv/network.hpp"
#include "meshconv/optimizer.hpp"

namespace meshconv {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered key=value pairs.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// One "key = value" per line; '#' starts a comment; blank lines ignored.
/// Throws ConfigError (with the line number) on a malformed or repeated key.
KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values_file(const std::filesystem::path& path);
std::string format_key_values(const KeyValues& kv);

/// Everything a train/eval run needs besides paths.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SyntheticSpec synthetic;
  /// When > 0, all loaded samples are re-split with this many per class.
  int per_class_train = 0;
  std::uint64_t split_seed = 0;
};

/// Applies overrides in order. Throws ConfigError on an unknown key or a
/// malformed value.
void apply_key_values(RunConfig& config, const KeyValues& kv);

/// Model keys only, in a canonical order; round-trips through
/// model_config_from_key_values.
KeyValues model_config_key_values(const ModelConfig& config);
ModelConfig model_config_from_key_values(const KeyValues& kv);

KeyValues train_config_key_values(const TrainConfig& config);

}  // namespace meshconv
