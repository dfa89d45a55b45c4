#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meshconv/network.hpp"

namespace meshconv {

/// Relative error with an absolute floor on the denominator:
/// |a - n| / max(|a|, |n|, floor). The floor keeps round-off in tiny
/// gradient entries from dominating.
double relative_error(double analytic, double numeric, double floor);

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-3;
  double floor = 1e-4;
  /// Skip entries whose +/- step evaluations change the ReLU or |.| regime.
  bool skip_kinks = true;
  /// When nonzero, check at most this many evenly spaced entries per tensor.
  std::size_t max_entries_per_tensor = 0;
  ConvBackwardFn conv_backward_override;
};

struct GroupReport {
  std::string name;  ///< "descriptor", "conv<i>", or "classifier"
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupReport> groups;
  bool stalled = false;

  bool passed() const;
  std::size_t checked() const;
  std::size_t skipped() const;
  double max_rel_error() const;
};

/// End-to-end check of model_backward against central differences of the
/// cross-entropy loss, with the pooling selections frozen at the base point.
GradCheckReport grad_check(const MeshInput& input, int label, const ModelParams& params, const ModelConfig& config,
                           const GradCheckOptions& options = {});

/// mesh_near_face_count, named after the seed.
Mesh gradcheck_mesh(std::size_t faces, std::uint64_t seed);

/// Small three-block model whose pool targets scale with the face count.
/// With linear_only, activations are off and every conv |.| weight is zero.
ModelConfig gradcheck_model_config(std::size_t faces, int num_classes, bool linear_only, std::uint64_t seed);

/// ModelParams::init, with every w_absdiff zeroed when linear_only.
ModelParams gradcheck_params(const ModelConfig& config, bool linear_only);

}  // namespace meshconv
