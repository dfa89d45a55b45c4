#pragma once

// Seeded mesh generators shared by the unit, property and acceptance tests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "meshconv/features.hpp"
#include "meshconv/mesh.hpp"
#include "meshconv/rng.hpp"
#include "meshconv/shapes.hpp"

namespace fixtures {

/// Rotated, translated, lightly jittered copy. Jitter breaks the exact edge
/// length ties of the parametric shapes.
inline meshconv::Mesh perturbed(const meshconv::Mesh& m, std::uint64_t seed, double jitter = 0.01) {
  meshconv::Rng rng(seed);
  const auto rot = meshconv::shapes::random_rotation(rng);
  const meshconv::Vec3 shift{meshconv::uniform(rng, -1, 1), meshconv::uniform(rng, -1, 1),
                             meshconv::uniform(rng, -1, 1)};
  return meshconv::shapes::jittered(meshconv::shapes::transformed(m, rot, 1.0, shift), jitter, rng);
}

/// Closed meshes with at most 100 faces, covering genus 0 and 1.
inline std::vector<meshconv::Mesh> small_closed_shapes() {
  using namespace meshconv::shapes;
  return {tetrahedron(), icosahedron(), box(1), box(2), icosphere(2), torus(3, 3), torus(4, 3),
          torus(5, 4),   torus(6, 4),   torus(8, 5), torus(10, 5), torus(7, 7)};
}

/// The i-th seeded small closed mesh (cycles through the shapes).
inline meshconv::Mesh small_closed_mesh(std::uint64_t seed) {
  const auto shapes = small_closed_shapes();
  return perturbed(shapes[seed % shapes.size()], meshconv::derive_seed(0x5eed, seed));
}

/// Random features, uniform in [-1, 1].
inline meshconv::FeatureMatrix random_features(std::size_t faces, Eigen::Index channels, std::uint64_t seed) {
  meshconv::Rng rng(seed);
  meshconv::FeatureMatrix x(static_cast<Eigen::Index>(faces), channels);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < channels; ++c) x(i, c) = meshconv::uniform(rng, -1.0, 1.0);
  }
  return x;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    std::uint64_t k = meshconv::derive_seed(reinterpret_cast<std::uintptr_t>(this), counter++);
    do {
      path_ = base / ("meshconv-" + tag + "-" + std::to_string(k++ % 1000000007));
    } while (std::filesystem::exists(path_));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
