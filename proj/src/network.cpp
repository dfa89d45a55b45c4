#include "meshconv/network.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "meshconv/geometry.hpp"

namespace meshconv {
namespace {

// Adds the time until `stop` (or destruction) to *slot; no-op without a slot.
class PhaseClock {
 public:
  explicit PhaseClock(double* slot) : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~PhaseClock() { stop(); }
  PhaseClock(const PhaseClock&) = delete;
  PhaseClock& operator=(const PhaseClock&) = delete;
  void stop() {
    if (slot_ == nullptr) return;
    *slot_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    slot_ = nullptr;
  }

 private:
  double* slot_;
  std::chrono::steady_clock::time_point start_;
};

double* slot(PhaseTimes* t, double PhaseTimes::*member) { return t == nullptr ? nullptr : &(t->*member); }

}  // namespace

void ModelConfig::validate() const {
  if (num_classes < 2) throw std::invalid_argument("model: num_classes must be >= 2");
  if (k_geo < 0 || k_geom < 0 || k_geo + k_geom == 0) {
    throw std::invalid_argument("model: descriptor needs at least one kernel");
  }
  if (blocks.empty()) throw std::invalid_argument("model: at least one block is required");
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const BlockConfig& bc = blocks[b];
    const std::string where = "model: block " + std::to_string(b + 1);
    if (bc.conv_layers < 1) throw std::invalid_argument(where + " needs at least one conv layer");
    if (bc.channels < 1) throw std::invalid_argument(where + " needs at least one channel");
    if (bc.kernel_size < 3) throw std::invalid_argument(where + " kernel size must be >= 3");
    if (bc.pool_target < 4) throw std::invalid_argument(where + " pool target must be >= 4");
    if (b > 0 && bc.pool_target >= blocks[b - 1].pool_target) {
      throw std::invalid_argument("model: pool targets must be strictly decreasing");
    }
  }
  if (head == HeadKind::kClassChannels && blocks.back().channels != num_classes) {
    throw std::invalid_argument("model: class-channel head needs last block channels == num_classes");
  }
}

bool ModelConfig::layer_activation(std::size_t block, int layer) const {
  if (!activation) return false;
  const bool last = block + 1 == blocks.size() && layer + 1 == blocks[block].conv_layers;
  return !last || final_activation;
}

ConvOptions ModelConfig::conv_options(std::size_t block, int layer) const {
  return ConvOptions{layer_activation(block, layer), mean_aggregate};
}

PoolOptions ModelConfig::pool_options() const {
  PoolOptions o;
  o.conflict = conflict;
  o.averaging = averaging;
  return o;
}

ModelParams ModelParams::zeros(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  p.descriptor = DescriptorParams::zeros(config.k_geo, config.k_geom);
  Eigen::Index c_in = static_cast<Eigen::Index>(p.descriptor.channels());
  for (const BlockConfig& bc : config.blocks) {
    for (int l = 0; l < bc.conv_layers; ++l) {
      p.conv.push_back(ConvParams::zeros(c_in, bc.channels));
      c_in = bc.channels;
    }
  }
  if (config.head == HeadKind::kLinear) {
    p.classifier = Eigen::MatrixXd::Zero(config.num_classes, c_in);
    p.classifier_bias = Eigen::VectorXd::Zero(config.num_classes);
  }
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ModelParams p;
  p.descriptor = DescriptorParams::random(config.k_geo, config.k_geom, rng);
  Eigen::Index c_in = static_cast<Eigen::Index>(p.descriptor.channels());
  for (const BlockConfig& bc : config.blocks) {
    for (int l = 0; l < bc.conv_layers; ++l) {
      p.conv.push_back(ConvParams::random(c_in, bc.channels, bc.kernel_size, rng));
      c_in = bc.channels;
    }
  }
  if (config.head == HeadKind::kLinear) {
    const double s = 1.0 / std::sqrt(static_cast<double>(c_in));
    p.classifier = Eigen::MatrixXd::Zero(config.num_classes, c_in);
    for (Eigen::Index i = 0; i < p.classifier.size(); ++i) p.classifier.data()[i] = uniform(rng, -s, s);
    p.classifier_bias = Eigen::VectorXd::Zero(config.num_classes);
  }
  return p;
}

namespace {

TensorRef matrix_ref(std::string name, Eigen::MatrixXd& m) {
  return {std::move(name), m.data(), static_cast<std::size_t>(m.size()), static_cast<std::size_t>(m.rows()),
          static_cast<std::size_t>(m.cols())};
}

TensorRef vector_ref(std::string name, Eigen::VectorXd& v) {
  return {std::move(name), v.data(), static_cast<std::size_t>(v.size()), static_cast<std::size_t>(v.size()), 1};
}

}  // namespace

std::vector<TensorRef> tensors(ModelParams& params) {
  std::vector<TensorRef> out;
  auto& geo = params.descriptor.geodesic;
  auto& geom = params.descriptor.geometric;
  // std::array rows are contiguous, so each descriptor table is one block.
  static_assert(sizeof(std::array<double, 3>) == 3 * sizeof(double));
  static_assert(sizeof(std::array<double, 4>) == 4 * sizeof(double));
  out.push_back({"descriptor.geodesic", geo.empty() ? nullptr : geo.front().data(), 3 * geo.size(), geo.size(), 3});
  out.push_back(
      {"descriptor.geometric", geom.empty() ? nullptr : geom.front().data(), 4 * geom.size(), geom.size(), 4});
  for (std::size_t i = 0; i < params.conv.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i) + ".";
    ConvParams& c = params.conv[i];
    out.push_back(matrix_ref(prefix + "w_center", c.w_center));
    out.push_back(matrix_ref(prefix + "w_neighbors", c.w_neighbors));
    out.push_back(matrix_ref(prefix + "w_absdiff", c.w_absdiff));
    out.push_back(vector_ref(prefix + "bias", c.bias));
  }
  if (params.classifier.size() > 0) {
    out.push_back(matrix_ref("classifier.weight", params.classifier));
    out.push_back(vector_ref("classifier.bias", params.classifier_bias));
  }
  return out;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for (const TensorRef& t : tensors(const_cast<ModelParams&>(params))) n += t.size;
  return n;
}

MeshInput prepare_input(const Mesh& mesh, const ModelConfig& config) {
  const ValidationReport report = validate_mesh(mesh);
  if (!report.ok()) throw MeshError("mesh '" + mesh.name + "' is not a valid oriented manifold");
  MeshInput in;
  in.mesh = mesh;
  in.adjacency = build_adjacency(mesh);
  const GeometryCache geo = compute_geometry(mesh);
  in.descriptor = compute_descriptor_inputs(mesh, in.adjacency, geo, config.abs_mode);
  return in;
}

std::vector<std::size_t> ForwardResult::block_face_counts() const {
  std::vector<std::size_t> counts;
  for (const BlockTape& b : tape.blocks) counts.push_back(b.pooled.mesh.faces.size());
  return counts;
}

bool ForwardResult::any_stall() const {
  for (const BlockTape& b : tape.blocks) {
    if (b.pooled.stalled) return true;
  }
  return false;
}

FrozenPlans frozen_plans(const Tape& tape) {
  FrozenPlans plans;
  for (const BlockTape& b : tape.blocks) plans.push_back(b.pooled.passes);
  return plans;
}

Eigen::VectorXd global_average_pool(const FeatureMatrix& features) {
  if (features.rows() == 0) throw std::invalid_argument("global_average_pool: no faces");
  return features.colwise().sum().transpose() / static_cast<double>(features.rows());
}

ForwardResult model_forward(const MeshInput& input, const ModelParams& params, const ModelConfig& config,
                            const FrozenPlans* frozen, PhaseTimes* times) {
  if (frozen != nullptr && frozen->size() != config.blocks.size()) {
    throw std::invalid_argument("model_forward: frozen plans do not match the block count");
  }
  ForwardResult result;
  Tape& tape = result.tape;
  const PoolOptions pool_opts = config.pool_options();
  // mesh and adj below point into tape.blocks, which must not reallocate.
  tape.blocks.reserve(config.blocks.size());

  PhaseClock descriptor_clock(slot(times, &PhaseTimes::descriptor));
  FeatureMatrix x = descriptor_forward(input.descriptor, params.descriptor);
  descriptor_clock.stop();
  const Mesh* mesh = &input.mesh;
  const AdjacencyMatrix* adj = &input.adjacency;
  std::size_t layer_index = 0;
  for (std::size_t b = 0; b < config.blocks.size(); ++b) {
    const BlockConfig& bc = config.blocks[b];
    BlockTape& bt = tape.blocks.emplace_back();
    PhaseClock region_clock(slot(times, &PhaseTimes::regions));
    bt.regions = build_regions(*adj, bc.kernel_size);
    region_clock.stop();
    PhaseClock conv_clock(slot(times, &PhaseTimes::conv));
    for (int l = 0; l < bc.conv_layers; ++l, ++layer_index) {
      bt.layer_inputs.push_back(std::move(x));
      ConvCache& cache = bt.caches.emplace_back();
      bt.options.push_back(config.conv_options(b, l));
      x = conv_forward(bt.layer_inputs.back(), bt.regions, params.conv.at(layer_index), bt.options.back(), &cache);
    }
    conv_clock.stop();
    PhaseClock pool_clock(slot(times, &PhaseTimes::pool));
    bt.pooled = frozen != nullptr ? replay_passes(*mesh, *adj, x, (*frozen)[b], pool_opts)
                                  : pool_to_target(*mesh, *adj, x, bc.pool_target, pool_opts);
    x = bt.pooled.features;
    mesh = &bt.pooled.mesh;
    adj = &bt.pooled.adjacency;
  }
  PhaseClock head_clock(slot(times, &PhaseTimes::head));
  tape.final_features = std::move(x);
  tape.pooled = global_average_pool(tape.final_features);
  if (config.head == HeadKind::kLinear) {
    result.logits = params.classifier * tape.pooled + params.classifier_bias;
  } else {
    result.logits = tape.pooled;
  }
  return result;
}

LossResult cross_entropy_loss(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size()) throw std::out_of_range("cross_entropy_loss: label out of range");
  const double mx = logits.maxCoeff();
  const Eigen::VectorXd e = (logits.array() - mx).exp().matrix();
  const double z = e.sum();
  LossResult r;
  r.loss = std::log(z) + mx - logits[label];
  r.grad = e / z;
  r.grad[label] -= 1.0;
  return r;
}

ModelParams model_backward(const MeshInput& input, const Tape& tape, const ModelParams& params,
                           const ModelConfig& config, const Eigen::VectorXd& grad_logits,
                           const ConvBackwardFn& conv_backward_override, PhaseTimes* times) {
  if (tape.blocks.size() != config.blocks.size() || grad_logits.size() != config.num_classes) {
    throw std::invalid_argument("model_backward: tape does not match the config");
  }
  ModelParams grads = ModelParams::zeros(config);
  PhaseClock head_clock(slot(times, &PhaseTimes::head));
  Eigen::VectorXd grad_pooled;
  if (config.head == HeadKind::kLinear) {
    grads.classifier = grad_logits * tape.pooled.transpose();
    grads.classifier_bias = grad_logits;
    grad_pooled = params.classifier.transpose() * grad_logits;
  } else {
    grad_pooled = grad_logits;
  }

  const Eigen::Index rows = tape.final_features.rows();
  FeatureMatrix g = (grad_pooled / static_cast<double>(rows)).transpose().replicate(rows, 1);
  head_clock.stop();

  std::size_t layer_index = params.conv.size();
  for (std::size_t b = config.blocks.size(); b-- > 0;) {
    const BlockTape& bt = tape.blocks[b];
    PhaseClock pool_clock(slot(times, &PhaseTimes::pool));
    g = pooling_backward(bt.pooled.passes, g);
    pool_clock.stop();
    PhaseClock conv_clock(slot(times, &PhaseTimes::conv));
    for (int l = config.blocks[b].conv_layers; l-- > 0;) {
      --layer_index;
      ConvGradients cg =
          conv_backward_override
              ? conv_backward_override(bt.layer_inputs[l], bt.regions, params.conv[layer_index], bt.caches[l], g,
                                       bt.options[l])
              : conv_backward(bt.layer_inputs[l], bt.regions, params.conv[layer_index], bt.caches[l], g,
                              bt.options[l]);
      grads.conv[layer_index] = std::move(cg.params);
      g = std::move(cg.features);
    }
  }
  PhaseClock descriptor_clock(slot(times, &PhaseTimes::descriptor));
  grads.descriptor = descriptor_backward(input.descriptor, params.descriptor, g);
  return grads;
}

namespace {

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void add(std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  }
};

}  // namespace

std::uint64_t activation_pattern(const Tape& tape) {
  Fnv1a hash;
  for (const BlockTape& bt : tape.blocks) {
    for (std::size_t l = 0; l < bt.layer_inputs.size(); ++l) {
      const FeatureMatrix& x = bt.layer_inputs[l];
      for (Eigen::Index f = 0; f < x.rows(); ++f) {
        for (FaceId n : bt.regions.surrounding[f]) {
          for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double d = x(f, c) - x(n, c);
            hash.add(d > 0.0 ? 2 : (d < 0.0 ? 1 : 0));
          }
        }
      }
      if (!bt.options[l].relu) continue;
      const FeatureMatrix& out = bt.caches[l].output;
      for (Eigen::Index i = 0; i < out.size(); ++i) hash.add(out.data()[i] > 0.0 ? 1 : 0);
    }
  }
  return hash.h;
}

}  // namespace meshconv
