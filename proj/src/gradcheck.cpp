#include "meshconv/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "meshconv/data.hpp"

namespace meshconv {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

bool GradCheckReport::passed() const {
  return std::all_of(groups.begin(), groups.end(), [](const GroupReport& g) { return g.passed; });
}

std::size_t GradCheckReport::checked() const {
  std::size_t n = 0;
  for (const GroupReport& g : groups) n += g.checked;
  return n;
}

std::size_t GradCheckReport::skipped() const {
  std::size_t n = 0;
  for (const GroupReport& g : groups) n += g.skipped;
  return n;
}

double GradCheckReport::max_rel_error() const {
  double e = 0.0;
  for (const GroupReport& g : groups) e = std::max(e, g.max_rel_error);
  return e;
}

GradCheckReport grad_check(const MeshInput& input, int label, const ModelParams& params, const ModelConfig& config,
                           const GradCheckOptions& options) {
  const ForwardResult base = model_forward(input, params, config);
  const FrozenPlans plans = frozen_plans(base.tape);
  const std::uint64_t base_pattern = activation_pattern(base.tape);
  const LossResult loss = cross_entropy_loss(base.logits, label);
  ModelParams grads = model_backward(input, base.tape, params, config, loss.grad, options.conv_backward_override);

  GradCheckReport report;
  report.stalled = base.any_stall();
  ModelParams probe = params;
  const auto p = tensors(probe);
  const auto g = tensors(grads);
  const double h = options.step;

  for (std::size_t t = 0; t < p.size(); ++t) {
    const std::string group = p[t].name.substr(0, p[t].name.find('.'));
    if (report.groups.empty() || report.groups.back().name != group) report.groups.push_back({group});
    GroupReport& gr = report.groups.back();

    const std::size_t n = p[t].size;
    const std::size_t count = options.max_entries_per_tensor == 0 ? n : std::min(n, options.max_entries_per_tensor);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = count == n ? k : k * n / count;
      double& w = p[t].data[i];
      const double orig = w;
      w = orig + h;
      const ForwardResult plus = model_forward(input, probe, config, &plans);
      w = orig - h;
      const ForwardResult minus = model_forward(input, probe, config, &plans);
      w = orig;
      if (options.skip_kinks &&
          (activation_pattern(plus.tape) != base_pattern || activation_pattern(minus.tape) != base_pattern)) {
        ++gr.skipped;
        continue;
      }
      const double numeric =
          (cross_entropy_loss(plus.logits, label).loss - cross_entropy_loss(minus.logits, label).loss) / (2.0 * h);
      gr.max_rel_error = std::max(gr.max_rel_error, relative_error(g[t].data[i], numeric, options.floor));
      ++gr.checked;
    }
  }
  for (GroupReport& gr : report.groups) gr.passed = gr.checked > 0 && gr.max_rel_error <= options.tolerance;
  return report;
}

Mesh gradcheck_mesh(std::size_t faces, std::uint64_t seed) {
  Mesh m = mesh_near_face_count(faces, seed);
  m.name = "gradcheck_" + std::to_string(seed);
  return m;
}

ModelConfig gradcheck_model_config(std::size_t faces, int num_classes, bool linear_only, std::uint64_t seed) {
  const auto target = [&](double frac) {
    return std::max<std::size_t>(4, static_cast<std::size_t>(std::floor(frac * static_cast<double>(faces))));
  };
  ModelConfig c;
  c.num_classes = num_classes;
  c.k_geo = 2;
  c.k_geom = 2;
  c.blocks = {{2, 6, 3, target(0.8)}, {1, 6, 4, target(0.6)}, {1, 6, 5, target(0.45)}};
  c.activation = !linear_only;
  c.seed = seed;
  if (!(c.blocks[0].pool_target > c.blocks[1].pool_target && c.blocks[1].pool_target > c.blocks[2].pool_target)) {
    throw std::invalid_argument("gradcheck: mesh with " + std::to_string(faces) + " faces is too small");
  }
  c.validate();
  return c;
}

ModelParams gradcheck_params(const ModelConfig& config, bool linear_only) {
  ModelParams p = ModelParams::init(config);
  if (linear_only) {
    for (ConvParams& c : p.conv) c.w_absdiff.setZero();
  }
  return p;
}

}  // namespace meshconv
