#pragma once

#include <cstdint>
#include <vector>

#include "meshconv/network.hpp"

namespace meshconv {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double momentum = 0.9;  ///< SGD only
  double beta1 = 0.9;     ///< Adam only
  double beta2 = 0.999;   ///< Adam only
  double epsilon = 1e-8;  ///< Adam only
  double weight_decay = 0.0;
  int epochs = 30;
  int batch_size = 16;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Throws std::invalid_argument. A zero learning rate is allowed.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Moment buffers, flattened in tensors() order.
struct OptimizerState {
  std::vector<double> first;
  std::vector<double> second;
  std::uint64_t step = 0;
};

/// SGD: v <- mu v - lr g; p <- p + v.
/// Adam: bias-corrected first/second moments, p <- p - lr m_hat / (sqrt(v_hat) + eps).
/// Weight decay adds wd * p to g. Throws std::invalid_argument on a shape mismatch.
void optimizer_step(ModelParams& params, const ModelParams& grads, const TrainConfig& config, OptimizerState& state);

/// grads += scale * other, tensor by tensor.
void accumulate(ModelParams& grads, const ModelParams& other, double scale = 1.0);

}  // namespace meshconv
