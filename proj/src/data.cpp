#include "meshconv/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "meshconv/mesh_io.hpp"
#include "meshconv/parallel.hpp"
#include "meshconv/rng.hpp"
#include "meshconv/shapes.hpp"

namespace fs = std::filesystem;

namespace meshconv {

Dataset Dataset::subset(const std::string& split) const {
  Dataset out;
  out.class_names = class_names;
  for (const Sample& s : samples) {
    if (s.split == split) out.samples.push_back(s);
  }
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (const Sample& s : samples) ++counts.at(static_cast<std::size_t>(s.label));
  return counts;
}

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_mesh_file(const fs::path& p) {
  try {
    format_from_extension(p);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

Dataset load_dataset(const fs::path& root, LoadReport* report) {
  if (!fs::is_directory(root)) throw std::runtime_error("dataset root '" + root.string() + "' is not a directory");
  LoadReport local;
  LoadReport& rep = report != nullptr ? *report : local;
  rep = {};
  Dataset ds;
  for (const fs::path& class_dir : sorted_entries(root, true)) {
    const int label = static_cast<int>(ds.class_names.size());
    bool any = false;
    for (const fs::path& split_dir : sorted_entries(class_dir, true)) {
      for (const fs::path& file : sorted_entries(split_dir, false)) {
        if (!is_mesh_file(file)) continue;
        any = true;
        try {
          Mesh m = load_mesh_file(file);
          if (!validate_mesh(m).ok()) throw MeshError("not a valid oriented manifold");
          m.label = label;
          ds.samples.push_back({std::move(m), label, fs::relative(file, root).generic_string(),
                                split_dir.filename().string(), 0});
          ++rep.loaded;
        } catch (const std::exception& e) {
          ++rep.skipped;
          rep.warnings.push_back(fs::relative(file, root).generic_string() + ": " + e.what());
        }
      }
    }
    if (any) ds.class_names.push_back(class_dir.filename().string());
  }
  if (ds.samples.empty()) throw std::runtime_error("dataset root '" + root.string() + "' holds no loadable mesh");
  // Class ids must stay dense when a class directory held only corrupt files.
  std::map<std::string, int> dense;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) dense[ds.class_names[i]] = static_cast<int>(i);
  for (Sample& s : ds.samples) {
    s.label = dense.at(fs::path(s.path).begin()->string());
    s.mesh.label = s.label;
  }
  return ds;
}

std::pair<Dataset, Dataset> make_splits(const Dataset& dataset, int per_class_train, std::uint64_t seed) {
  if (per_class_train < 1) throw std::invalid_argument("make_splits: per_class_train must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    by_class.at(static_cast<std::size_t>(dataset.samples[i].label)).push_back(i);
  }
  Dataset train;
  Dataset test;
  train.class_names = test.class_names = dataset.class_names;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    if (idx.size() < static_cast<std::size_t>(per_class_train) + 1) {
      throw std::invalid_argument("make_splits: class '" + dataset.class_names[c] + "' has " +
                                  std::to_string(idx.size()) + " samples, needs at least " +
                                  std::to_string(per_class_train + 1));
    }
    Rng rng(derive_seed(seed, c));
    shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      Sample s = dataset.samples[idx[k]];
      const bool is_train = k < static_cast<std::size_t>(per_class_train);
      s.split = is_train ? "train" : "test";
      (is_train ? train : test).samples.push_back(std::move(s));
    }
  }
  return {std::move(train), std::move(test)};
}

Mesh preprocess(const Mesh& m) { return normalize_mesh(m); }

std::string shape_class_name(ShapeClass c) {
  switch (c) {
    case ShapeClass::kIcosphere:
      return "icosphere";
    case ShapeClass::kBox:
      return "box";
    case ShapeClass::kTorus:
      return "torus";
  }
  throw std::invalid_argument("unknown shape class");
}

ShapeClass parse_shape_class(const std::string& name) {
  if (name == "icosphere") return ShapeClass::kIcosphere;
  if (name == "box") return ShapeClass::kBox;
  if (name == "torus") return ShapeClass::kTorus;
  throw std::invalid_argument("unknown shape class '" + name + "'");
}

void SyntheticSpec::validate() const {
  if (classes.empty()) throw std::invalid_argument("synthetic: at least one class is required");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      if (classes[i] == classes[j]) throw std::invalid_argument("synthetic: duplicate class");
    }
  }
  if (samples_per_class < 1) throw std::invalid_argument("synthetic: samples_per_class must be >= 1");
  if (face_lo > face_hi) throw std::invalid_argument("synthetic: face band lo > hi");
  if (!(jitter >= 0.0)) throw std::invalid_argument("synthetic: jitter must be >= 0");
}

namespace {

struct TorusResolution {
  int major = 0;
  int minor = 0;
};

// Generator resolutions whose face count falls in the band.
std::vector<int> icosphere_options(std::size_t lo, std::size_t hi) {
  std::vector<int> out;
  for (int n = 1; 20u * n * n <= hi; ++n) {
    if (20u * n * n >= lo) out.push_back(n);
  }
  return out;
}

std::vector<int> box_options(std::size_t lo, std::size_t hi) {
  std::vector<int> out;
  for (int n = 1; 12u * n * n <= hi; ++n) {
    if (12u * n * n >= lo) out.push_back(n);
  }
  return out;
}

// Major segments between 1x and 3x the minor ones keep triangles well shaped.
std::vector<TorusResolution> torus_options(std::size_t lo, std::size_t hi) {
  std::vector<TorusResolution> out;
  for (int v = 3; 2u * v * v <= hi; ++v) {
    for (int u = v; u <= 3 * v; ++u) {
      const std::size_t f = 2u * u * v;
      if (f >= lo && f <= hi) out.push_back({u, v});
    }
  }
  return out;
}

[[noreturn]] void unreachable_band(ShapeClass c, const SyntheticSpec& spec) {
  throw std::invalid_argument("synthetic: no " + shape_class_name(c) + " resolution has a face count in [" +
                              std::to_string(spec.face_lo) + ", " + std::to_string(spec.face_hi) + "]");
}

void check_band(ShapeClass c, const SyntheticSpec& spec) {
  const bool empty = c == ShapeClass::kIcosphere ? icosphere_options(spec.face_lo, spec.face_hi).empty()
                     : c == ShapeClass::kBox     ? box_options(spec.face_lo, spec.face_hi).empty()
                                                 : torus_options(spec.face_lo, spec.face_hi).empty();
  if (empty) unreachable_band(c, spec);
}

Mesh scaled_axes(Mesh m, Vec3 s) {
  for (Vec3& v : m.vertices) v = {v[0] * s[0], v[1] * s[1], v[2] * s[2]};
  return m;
}

double bounding_radius(const Mesh& m) {
  Vec3 c{};
  for (const Vec3& v : m.vertices) c += v;
  c = c / static_cast<double>(m.vertices.size());
  double r = 0.0;
  for (const Vec3& v : m.vertices) r = std::max(r, norm(v - c));
  return r;
}

}  // namespace

Sample synthesize_sample(const SyntheticSpec& spec, std::size_t class_index, int index) {
  const ShapeClass cls = spec.classes.at(class_index);
  const std::uint64_t seed = derive_seed(derive_seed(spec.seed, class_index), static_cast<std::uint64_t>(index));
  Rng rng(seed);

  Mesh m;
  switch (cls) {
    case ShapeClass::kIcosphere: {
      const auto opts = icosphere_options(spec.face_lo, spec.face_hi);
      if (opts.empty()) unreachable_band(cls, spec);
      const int n = opts[uniform_index(rng, opts.size())];
      const Vec3 s{uniform(rng, 0.85, 1.15), uniform(rng, 0.85, 1.15), uniform(rng, 0.85, 1.15)};
      m = scaled_axes(shapes::icosphere(n), s);
      break;
    }
    case ShapeClass::kBox: {
      const auto opts = box_options(spec.face_lo, spec.face_hi);
      if (opts.empty()) unreachable_band(cls, spec);
      const int n = opts[uniform_index(rng, opts.size())];
      m = shapes::box(n, {uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0)});
      break;
    }
    case ShapeClass::kTorus: {
      const auto opts = torus_options(spec.face_lo, spec.face_hi);
      if (opts.empty()) unreachable_band(cls, spec);
      const TorusResolution r = opts[uniform_index(rng, opts.size())];
      m = shapes::torus(r.major, r.minor, 1.0, uniform(rng, 0.3, 0.45));
      break;
    }
  }

  const double amplitude = spec.jitter * bounding_radius(m);
  if (spec.rigid) {
    const shapes::Rotation rot = shapes::random_rotation(rng);
    const Vec3 t{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    m = shapes::transformed(m, rot, 1.0, t);
  }
  if (amplitude > 0.0) m = shapes::jittered(m, amplitude, rng);
  m = preprocess(m);

  const int label = static_cast<int>(class_index);
  std::ostringstream name;
  name << shape_class_name(cls) << '_' << std::setw(4) << std::setfill('0') << index;
  m.name = name.str();
  m.label = label;
  if (!validate_mesh(m).ok() || !validate_mesh(m).closed()) {
    throw std::logic_error("synthetic: generated " + m.name + " is not a closed oriented manifold");
  }
  return {std::move(m), label, "", "", seed};
}

Dataset generate_synthetic(const SyntheticSpec& spec, int threads) {
  spec.validate();
  for (ShapeClass c : spec.classes) check_band(c, spec);
  Dataset ds;
  for (ShapeClass c : spec.classes) ds.class_names.push_back(shape_class_name(c));
  const std::size_t per = static_cast<std::size_t>(spec.samples_per_class);
  ds.samples.resize(spec.classes.size() * per);
  parallel_for(ds.samples.size(), threads, [&](std::size_t i) {
    ds.samples[i] = synthesize_sample(spec, i / per, static_cast<int>(i % per));
  });
  return ds;
}

Mesh mesh_near_face_count(std::size_t faces, std::uint64_t seed) {
  Rng rng(seed);
  struct Option {
    int kind;  // 0 icosphere, 1 box, 2 torus
    int a;
    int b;
    std::size_t faces;
  };
  std::vector<Option> options;
  for (int n = 1; n <= 12; ++n) options.push_back({0, n, 0, 20u * n * n});
  for (int n = 1; n <= 12; ++n) options.push_back({1, n, 0, 12u * n * n});
  for (int v = 3; v <= 30; ++v) {
    for (int u = v; u <= 3 * v; ++u) options.push_back({2, u, v, 2u * u * v});
  }
  auto dist = [&](const Option& o) { return o.faces > faces ? o.faces - faces : faces - o.faces; };
  std::size_t best = dist(options.front());
  for (const Option& o : options) best = std::min(best, dist(o));
  std::vector<Option> nearest;
  for (const Option& o : options) {
    if (dist(o) == best) nearest.push_back(o);
  }
  const Option pick = nearest[uniform_index(rng, nearest.size())];

  Mesh m = pick.kind == 0   ? shapes::icosphere(pick.a)
           : pick.kind == 1 ? shapes::box(pick.a, {uniform(rng, 0.6, 1.0), uniform(rng, 0.6, 1.0), 1.0})
                            : shapes::torus(pick.a, pick.b, 1.0, uniform(rng, 0.3, 0.45));
  m = shapes::transformed(m, shapes::random_rotation(rng), 1.0, {});
  m = shapes::jittered(m, 0.02, rng);
  m = normalize_mesh(m);
  m.name = "mesh_" + std::to_string(m.faces.size()) + "_" + std::to_string(seed);
  return m;
}

void write_dataset(const Dataset& dataset, const fs::path& root) {
  fs::create_directories(root);
  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw std::runtime_error("cannot write " + (root / "manifest.txt").string());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    const std::string split = s.split.empty() ? "all" : s.split;
    std::string stem = s.mesh.name.empty() ? "mesh_" + std::to_string(i) : s.mesh.name;
    const fs::path rel = fs::path(dataset.class_names.at(static_cast<std::size_t>(s.label))) / split / (stem + ".off");
    fs::create_directories(root / rel.parent_path());
    write_off_file(root / rel, s.mesh);
    manifest << rel.generic_string() << ' ' << s.label << ' ' << s.mesh.faces.size() << ' ' << s.seed << '\n';
  }
  if (!manifest) throw std::runtime_error("failed writing " + (root / "manifest.txt").string());
}

}  // namespace meshconv
