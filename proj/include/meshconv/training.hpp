#pragma once

#include <functional>
#include <string>
#include <vector>

#include "meshconv/data.hpp"
#include "meshconv/network.hpp"
#include "meshconv/optimizer.hpp"

namespace meshconv {

/// Preprocessed model inputs of a dataset, computed once per run.
struct PreparedSet {
  std::vector<MeshInput> inputs;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return inputs.size(); }
};

/// preprocess + prepare_input per sample. Throws std::invalid_argument when a
/// label is outside [0, num_classes).
PreparedSet prepare_dataset(const Dataset& dataset, const ModelConfig& config, int threads = 1);

struct EvalReport {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::vector<double> class_accuracy;
  std::vector<std::size_t> class_count;
  std::vector<int> predictions;
  std::size_t stalls = 0;  ///< samples where some pooling block stalled
};

/// argmax with ties to the lowest class.
int predicted_class(const Eigen::VectorXd& logits);

/// Throws std::invalid_argument on an empty set.
EvalReport evaluate(const PreparedSet& set, const ModelParams& params, const ModelConfig& config, int threads = 1);

struct EpochMetrics {
  int epoch = 0;
  double loss = 0.0;       ///< mean training loss over the epoch
  double train_acc = 0.0;  ///< accuracy of the epoch's forward passes
  double test_acc = 0.0;
  std::size_t stalls = 0;
};

/// "epoch=i loss=... train_acc=... test_acc=..." with fixed precision.
std::string format_metrics(const EpochMetrics& m);

struct TrainResult {
  ModelParams params;       ///< after the last epoch
  ModelParams best_params;  ///< highest test accuracy (train accuracy without a test set), earliest on ties
  int best_epoch = 0;
  double best_test_acc = 0.0;
  std::vector<EpochMetrics> metrics;
};

using EpochCallback = std::function<void(const EpochMetrics&, const ModelParams&)>;

/// Mini-batch training from ModelParams::init(model). Per-sample gradients
/// are computed concurrently and summed in sample order, so results do not
/// depend on the thread count. Throws std::invalid_argument on an empty
/// training set.
TrainResult train(const PreparedSet& train_set, const PreparedSet& test_set, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

/// As above, starting from the given parameters.
TrainResult train_from(ModelParams params, const PreparedSet& train_set, const PreparedSet& test_set,
                       const ModelConfig& model, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace meshconv
