#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "meshconv/conv.hpp"
#include "meshconv/descriptors.hpp"
#include "meshconv/pooling.hpp"

namespace meshconv {

struct BlockConfig {
  int conv_layers = 2;
  int channels = 32;
  int kernel_size = 3;
  std::size_t pool_target = 400;

  friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

enum class HeadKind {
  kLinear,        ///< global average pooling, then an affine classifier
  kClassChannels  ///< last conv has num_classes channels; its average is the logits
};

struct ModelConfig {
  int num_classes = 3;
  int k_geo = 8;
  int k_geom = 8;
  std::vector<BlockConfig> blocks{{2, 32, 3, 400}, {2, 64, 6, 300}, {2, 128, 9, 200}};
  bool activation = true;        ///< ReLU after conv layers
  bool final_activation = false;  ///< ReLU on the very last conv layer too
  HeadKind head = HeadKind::kLinear;
  AbsMode abs_mode = AbsMode::kComponentwise;
  bool mean_aggregate = false;
  ConflictRule conflict = ConflictRule::kCenterDisjoint;
  AveragingMode averaging = AveragingMode::kSharedVertex;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  int last_channels() const { return blocks.empty() ? 3 * (k_geo + k_geom) : blocks.back().channels; }
  bool layer_activation(std::size_t block, int layer) const;
  ConvOptions conv_options(std::size_t block, int layer) const;
  PoolOptions pool_options() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  DescriptorParams descriptor;
  std::vector<ConvParams> conv;  ///< all conv layers, block by block
  Eigen::MatrixXd classifier;    ///< num_classes x C_last (empty for kClassChannels)
  Eigen::VectorXd classifier_bias;

  static ModelParams zeros(const ModelConfig& config);
  /// Seeded from config.seed.
  static ModelParams init(const ModelConfig& config);
};

/// Mutable view of one parameter array. Matrices are exposed in Eigen's
/// column-major storage order.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

std::vector<TensorRef> tensors(ModelParams& params);
std::size_t parameter_count(const ModelParams& params);

/// Geometry-derived inputs of one mesh, computed once and reused.
struct MeshInput {
  Mesh mesh;
  AdjacencyMatrix adjacency;
  DescriptorInputs descriptor;
};

/// Requires a valid mesh; throws MeshError otherwise.
MeshInput prepare_input(const Mesh& mesh, const ModelConfig& config);

struct BlockTape {
  RegionTable regions;
  std::vector<FeatureMatrix> layer_inputs;
  std::vector<ConvCache> caches;
  std::vector<ConvOptions> options;
  PooledMesh pooled;
};

struct Tape {
  std::vector<BlockTape> blocks;
  FeatureMatrix final_features;
  Eigen::VectorXd pooled;  ///< global average of final_features
};

struct ForwardResult {
  Eigen::VectorXd logits;
  Tape tape;

  /// Face counts after each block's pooling.
  std::vector<std::size_t> block_face_counts() const;
  bool any_stall() const;
};

/// Seconds spent per pipeline phase, accumulated across calls.
struct PhaseTimes {
  double descriptor = 0.0;
  double regions = 0.0;
  double conv = 0.0;
  double pool = 0.0;
  double head = 0.0;  ///< global average pooling, classifier, loss

  double total() const { return descriptor + regions + conv + pool + head; }
};

/// Pooling selections of a forward pass, one list of passes per block.
using FrozenPlans = std::vector<std::vector<PoolPlan>>;

FrozenPlans frozen_plans(const Tape& tape);

/// descriptor -> blocks of (conv x n, pool to target) -> global average ->
/// classifier. With `frozen`, pooling replays the given selections instead
/// of planning new ones.
ForwardResult model_forward(const MeshInput& input, const ModelParams& params, const ModelConfig& config,
                            const FrozenPlans* frozen = nullptr, PhaseTimes* times = nullptr);

/// Throws std::invalid_argument when F == 0.
Eigen::VectorXd global_average_pool(const FeatureMatrix& features);

struct LossResult {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Softmax cross-entropy with log-sum-exp stabilization.
/// Throws std::out_of_range for an invalid label.
LossResult cross_entropy_loss(const Eigen::VectorXd& logits, int label);

/// Signature of conv_backward, replaceable in model_backward for testing.
using ConvBackwardFn =
    std::function<ConvGradients(const FeatureMatrix&, const RegionTable&, const ConvParams&, const ConvCache&,
                                const FeatureMatrix&, const ConvOptions&)>;

/// Throws std::invalid_argument when the tape does not match the config.
ModelParams model_backward(const MeshInput& input, const Tape& tape, const ModelParams& params,
                           const ModelConfig& config, const Eigen::VectorXd& grad_logits,
                           const ConvBackwardFn& conv_backward_override = {}, PhaseTimes* times = nullptr);

/// Stable fingerprint of the piecewise-linear regime of a forward pass: ReLU
/// on/off per conv output and the sign of every |d_f - d_n| argument.
std::uint64_t activation_pattern(const Tape& tape);

}  // namespace meshconv
