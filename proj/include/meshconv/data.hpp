#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "meshconv/mesh.hpp"

namespace meshconv {

struct Sample {
  Mesh mesh;
  int label = 0;
  std::string path;  ///< source file, empty for generated meshes
  std::string split;
  std::uint64_t seed = 0;  ///< generator seed, 0 for loaded meshes
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;

  std::size_t num_classes() const { return class_names.size(); }
  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// Samples whose split tag equals `split`, in order.
  Dataset subset(const std::string& split) const;
  std::vector<std::size_t> class_counts() const;
};

struct LoadReport {
  std::size_t loaded = 0;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Reads root/<class>/<split>/<file>.{off,obj} in lexicographic path order.
/// Class ids follow sorted class-directory names. Unreadable or invalid
/// meshes are skipped and reported. Throws std::runtime_error when the root
/// is missing or holds no loadable mesh.
Dataset load_dataset(const std::filesystem::path& root, LoadReport* report = nullptr);

/// Per class, a seeded shuffle puts exactly per_class_train samples in train
/// and the rest in test. Throws std::invalid_argument when a class has fewer
/// than per_class_train + 1 samples.
std::pair<Dataset, Dataset> make_splits(const Dataset& dataset, int per_class_train, std::uint64_t seed);

/// Center on the vertex centroid and scale into the unit sphere.
Mesh preprocess(const Mesh& m);

enum class ShapeClass { kIcosphere, kBox, kTorus };

std::string shape_class_name(ShapeClass c);
/// Throws std::invalid_argument for an unknown name.
ShapeClass parse_shape_class(const std::string& name);

struct SyntheticSpec {
  std::vector<ShapeClass> classes{ShapeClass::kIcosphere, ShapeClass::kBox, ShapeClass::kTorus};
  int samples_per_class = 45;
  std::size_t face_lo = 420;
  std::size_t face_hi = 560;
  double jitter = 0.01;  ///< fraction of the bounding radius
  bool rigid = true;     ///< random rotation and translation per sample
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument.
  void validate() const;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

/// One preprocessed mesh for `index`-th sample of a class. Every sample is
/// drawn from its own generator seeded by (spec.seed, class, index).
Sample synthesize_sample(const SyntheticSpec& spec, std::size_t class_index, int index);

/// samples_per_class meshes per class, class-major. Throws
/// std::invalid_argument naming the class when no generator resolution lands
/// in [face_lo, face_hi].
Dataset generate_synthetic(const SyntheticSpec& spec, int threads = 1);

/// Closed mesh with a face count as close as possible to `faces`, drawn from
/// the icosphere/box/torus generators (ties picked by the seed), randomly
/// rotated, jittered by 2% and normalized.
Mesh mesh_near_face_count(std::size_t faces, std::uint64_t seed);

/// Writes root/<class>/<split>/<name>.off for every sample plus
/// root/manifest.txt with "path class_id faces seed" per line.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace meshconv
