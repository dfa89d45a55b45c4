#include "meshconv/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace meshconv {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning rate must be finite and >= 0");
  }
  if (batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
  if (epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("train: momentum must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train: Adam betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("train: epsilon must be > 0");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight decay must be >= 0");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
}

namespace {

void check_pair(const std::vector<TensorRef>& p, const std::vector<TensorRef>& g) {
  if (p.size() != g.size()) throw std::invalid_argument("optimizer: parameter/gradient tensor count mismatch");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].size != g[i].size) throw std::invalid_argument("optimizer: shape mismatch for " + p[i].name);
  }
}

}  // namespace

void accumulate(ModelParams& grads, const ModelParams& other, double scale) {
  auto dst = tensors(grads);
  auto src = tensors(const_cast<ModelParams&>(other));
  check_pair(dst, src);
  for (std::size_t t = 0; t < dst.size(); ++t) {
    for (std::size_t i = 0; i < dst[t].size; ++i) dst[t].data[i] += scale * src[t].data[i];
  }
}

void optimizer_step(ModelParams& params, const ModelParams& grads, const TrainConfig& config, OptimizerState& state) {
  auto p = tensors(params);
  auto g = tensors(const_cast<ModelParams&>(grads));
  check_pair(p, g);
  std::size_t total = 0;
  for (const TensorRef& t : p) total += t.size;
  if (state.first.empty()) state.first.assign(total, 0.0);
  if (config.optimizer == OptimizerKind::kAdam && state.second.empty()) state.second.assign(total, 0.0);
  if (state.first.size() != total) throw std::invalid_argument("optimizer: state does not match parameters");
  ++state.step;

  const double lr = config.learning_rate;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  std::size_t k = 0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size; ++i, ++k) {
      double& w = p[t].data[i];
      const double gi = g[t].data[i] + config.weight_decay * w;
      if (config.optimizer == OptimizerKind::kSgd) {
        state.first[k] = config.momentum * state.first[k] - lr * gi;
        w += state.first[k];
      } else {
        state.first[k] = config.beta1 * state.first[k] + (1.0 - config.beta1) * gi;
        state.second[k] = config.beta2 * state.second[k] + (1.0 - config.beta2) * gi * gi;
        const double m_hat = state.first[k] / bc1;
        const double v_hat = state.second[k] / bc2;
        w -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
      }
    }
  }
}

}  // namespace meshconv
