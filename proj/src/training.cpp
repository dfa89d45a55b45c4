#include "meshconv/training.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "meshconv/parallel.hpp"
#include "meshconv/rng.hpp"

namespace meshconv {

PreparedSet prepare_dataset(const Dataset& dataset, const ModelConfig& config, int threads) {
  PreparedSet set;
  set.class_names = dataset.class_names;
  set.inputs.resize(dataset.size());
  set.labels.resize(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int label = dataset.samples[i].label;
    if (label < 0 || label >= config.num_classes) {
      throw std::invalid_argument("sample '" + dataset.samples[i].mesh.name + "' has label " + std::to_string(label) +
                                  " outside [0, " + std::to_string(config.num_classes) + ")");
    }
    set.labels[i] = label;
  }
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    set.inputs[i] = prepare_input(preprocess(dataset.samples[i].mesh), config);
  });
  return set;
}

int predicted_class(const Eigen::VectorXd& logits) {
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return static_cast<int>(best);
}

EvalReport evaluate(const PreparedSet& set, const ModelParams& params, const ModelConfig& config, int threads) {
  if (set.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  const std::size_t nc = static_cast<std::size_t>(config.num_classes);
  std::vector<double> losses(set.size());
  std::vector<char> stalled(set.size(), 0);
  EvalReport rep;
  rep.predictions.resize(set.size());
  parallel_for(set.size(), threads, [&](std::size_t i) {
    const ForwardResult fr = model_forward(set.inputs[i], params, config);
    rep.predictions[i] = predicted_class(fr.logits);
    losses[i] = cross_entropy_loss(fr.logits, set.labels[i]).loss;
    stalled[i] = fr.any_stall() ? 1 : 0;
  });
  std::vector<std::size_t> correct(nc, 0);
  rep.class_count.assign(nc, 0);
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto label = static_cast<std::size_t>(set.labels[i]);
    ++rep.class_count[label];
    if (rep.predictions[i] == set.labels[i]) {
      ++correct[label];
      ++total_correct;
    }
    rep.mean_loss += losses[i];
    rep.stalls += static_cast<std::size_t>(stalled[i]);
  }
  rep.mean_loss /= static_cast<double>(set.size());
  rep.accuracy = static_cast<double>(total_correct) / static_cast<double>(set.size());
  rep.class_accuracy.assign(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    if (rep.class_count[c] > 0) {
      rep.class_accuracy[c] = static_cast<double>(correct[c]) / static_cast<double>(rep.class_count[c]);
    }
  }
  return rep;
}

std::string format_metrics(const EpochMetrics& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "epoch=%d loss=%.6f train_acc=%.4f test_acc=%.4f stalls=%zu", m.epoch, m.loss,
                m.train_acc, m.test_acc, m.stalls);
  return buf;
}

TrainResult train(const PreparedSet& train_set, const PreparedSet& test_set, const ModelConfig& model,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  return train_from(ModelParams::init(model), train_set, test_set, model, config, on_epoch);
}

TrainResult train_from(ModelParams params, const PreparedSet& train_set, const PreparedSet& test_set,
                       const ModelConfig& model, const TrainConfig& config, const EpochCallback& on_epoch) {
  model.validate();
  config.validate();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training split");

  struct SampleResult {
    ModelParams grads;
    double loss = 0.0;
    bool correct = false;
    bool stalled = false;
  };

  TrainResult result;
  result.best_params = params;
  result.best_test_acc = -1.0;
  OptimizerState state;
  std::vector<std::size_t> order(train_set.size());
  std::vector<SampleResult> batch_results;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    shuffle(order.begin(), order.end(), rng);

    EpochMetrics m;
    m.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t n = std::min(batch, order.size() - start);
      batch_results.assign(n, SampleResult{});
      parallel_for(n, config.threads, [&](std::size_t k) {
        const std::size_t i = order[start + k];
        const ForwardResult fr = model_forward(train_set.inputs[i], params, model);
        const LossResult lr = cross_entropy_loss(fr.logits, train_set.labels[i]);
        SampleResult& r = batch_results[k];
        r.grads = model_backward(train_set.inputs[i], fr.tape, params, model, lr.grad);
        r.loss = lr.loss;
        r.correct = predicted_class(fr.logits) == train_set.labels[i];
        r.stalled = fr.any_stall();
      });
      // Fixed summation order keeps the update independent of scheduling.
      ModelParams grads = ModelParams::zeros(model);
      for (const SampleResult& r : batch_results) {
        accumulate(grads, r.grads, 1.0 / static_cast<double>(n));
        m.loss += r.loss;
        correct += r.correct ? 1 : 0;
        m.stalls += r.stalled ? 1 : 0;
      }
      optimizer_step(params, grads, config, state);
    }
    m.loss /= static_cast<double>(train_set.size());
    m.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
    const bool has_test = test_set.size() > 0;
    if (has_test) m.test_acc = evaluate(test_set, params, model, config.threads).accuracy;
    const double score = has_test ? m.test_acc : m.train_acc;
    if (score > result.best_test_acc) {
      result.best_test_acc = score;
      result.best_epoch = epoch;
      result.best_params = params;
    }
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m, params);
  }
  if (result.best_test_acc < 0.0) result.best_test_acc = 0.0;
  result.params = std::move(params);
  return result;
}

}  // namespace meshconv
