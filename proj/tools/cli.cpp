#include "cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "meshconv/checkpoint.hpp"
#include "meshconv/config.hpp"
#include "meshconv/data.hpp"
#include "meshconv/gradcheck.hpp"
#include "meshconv/mesh_io.hpp"
#include "meshconv/parallel.hpp"
#include "meshconv/training.hpp"

namespace fs = std::filesystem;

namespace meshconv::cli {
namespace {

// Thrown for conditions that map to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App& cmd, ConfigArgs& args) {
  cmd.add_option("--config", args.config_path, "key=value config file");
  cmd.add_option("--set", args.overrides, "override one config key (key=value), repeatable");
}

struct LoadedConfig {
  RunConfig run;
  bool num_classes_set = false;
};

/// Config file entries followed by --set overrides, in application order.
KeyValues gather_key_values(const ConfigArgs& args) {
  KeyValues kv;
  if (!args.config_path.empty()) kv = parse_key_values_file(args.config_path);
  for (const std::string& o : args.overrides) {
    std::istringstream line(o);
    const KeyValues one = parse_key_values(line);
    if (one.size() != 1) throw ConfigError("config: --set expects key=value, got '" + o + "'");
    kv.push_back(one.front());
  }
  return kv;
}

LoadedConfig load_config(const ConfigArgs& args) {
  const KeyValues kv = gather_key_values(args);
  LoadedConfig out;
  apply_key_values(out.run, kv);
  for (const auto& [k, v] : kv) out.num_classes_set = out.num_classes_set || k == "num_classes";
  return out;
}

struct Splits {
  Dataset train;
  Dataset test;
};

Splits acquire_data(const RunConfig& run, const std::string& data_root, bool synthetic, int threads,
                    std::ostream& err) {
  if (synthetic == !data_root.empty()) throw UsageError("exactly one of --data or --synthetic is required");
  if (synthetic) {
    const Dataset all = generate_synthetic(run.synthetic, threads);
    auto [train, test] = make_splits(all, run.per_class_train > 0 ? run.per_class_train : 30, run.split_seed);
    return {std::move(train), std::move(test)};
  }
  if (!fs::is_directory(data_root)) throw UsageError("data root '" + data_root + "' does not exist");
  LoadReport report;
  const Dataset all = load_dataset(data_root, &report);
  for (const std::string& w : report.warnings) err << "warning: skipped " << w << '\n';
  if (run.per_class_train > 0) {
    auto [train, test] = make_splits(all, run.per_class_train, run.split_seed);
    return {std::move(train), std::move(test)};
  }
  return {all.subset("train"), all.subset("test")};
}

// --- info -------------------------------------------------------------------

int cmd_info(const std::string& path, std::ostream& out) {
  const Mesh m = load_mesh_file(path);
  const ValidationReport r = validate_mesh(m);
  out << "V=" << m.vertices.size() << " E=" << count_edges(m) << " F=" << m.faces.size()
      << " chi=" << euler_characteristic(m) << " manifold=" << yes_no(r.manifold) << " oriented=" << yes_no(r.oriented)
      << " borders=" << r.border_edges << " degenerate=" << r.degenerate_faces.size()
      << " invalid=" << r.invalid_faces.size() << '\n';
  return kExitOk;
}

// --- pool -------------------------------------------------------------------

struct PoolArgs {
  std::string input;
  std::string output;
  std::size_t target = 0;
  std::string weights = "descriptor";
  std::string conflict = "center_disjoint";
  std::uint64_t seed = 0;
  bool strict = false;
};

int cmd_pool(const PoolArgs& a, std::ostream& out, std::ostream& err) {
  Mesh m = load_mesh_file(a.input);
  if (!validate_mesh(m).ok()) throw UsageError("'" + a.input + "' is not a valid oriented manifold");
  if (a.target < 4) throw UsageError("--target must be >= 4");
  RunConfig rc;
  apply_key_values(rc, {{"conflict", a.conflict}});
  PoolOptions opts;
  opts.conflict = rc.model.conflict;

  const auto start = std::chrono::steady_clock::now();
  const AdjacencyMatrix adj = build_adjacency(m);
  FeatureMatrix features;
  if (a.weights == "uniform") {
    features = FeatureMatrix::Zero(static_cast<Eigen::Index>(m.faces.size()), 1);
  } else {
    Rng rng(a.seed);
    const DescriptorParams params = DescriptorParams::random(8, 8, rng);
    features = descriptor_forward(compute_descriptor_inputs(m, adj, compute_geometry(m)), params);
  }
  const PooledMesh pooled = pool_to_target(m, adj, features, a.target, opts);
  const double ms = elapsed_ms(start);

  for (std::size_t p = 0; p < pooled.passes.size(); ++p) {
    const PoolPlan& plan = pooled.passes[p];
    const double removed = 1.0 - static_cast<double>(plan.output_faces()) / static_cast<double>(plan.input_faces());
    out << "pass=" << p + 1 << " faces=" << plan.input_faces() << "->" << plan.output_faces()
        << " regions=" << plan.regions.size() << " removed_fraction=" << fixed(removed, 4) << '\n';
  }
  out << "passes=" << pooled.pass_count() << " faces_before=" << m.faces.size()
      << " faces_after=" << pooled.mesh.faces.size() << " target=" << a.target
      << " stalled=" << yes_no(pooled.stalled) << " time_ms=" << fixed(ms, 3) << '\n';
  if (!a.output.empty()) write_off_file(a.output, pooled.mesh);
  if (pooled.stalled) {
    err << "stall: no collapsible face left at " << pooled.mesh.faces.size() << " faces (target " << a.target
        << ")\n";
    if (a.strict) return kExitFailure;
  }
  return kExitOk;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  ConfigArgs config;
  std::string data;
  bool synthetic = false;
  std::string out_dir;
  std::optional<int> threads;
  std::optional<int> epochs;
  bool deterministic = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  LoadedConfig lc = load_config(a.config);
  RunConfig& run = lc.run;
  if (a.threads) run.train.threads = *a.threads;
  if (a.epochs) run.train.epochs = *a.epochs;
  if (a.deterministic) run.train.threads = 1;
  run.train.validate();
  Splits data = acquire_data(run, a.data, a.synthetic, run.train.threads, err);
  if (data.train.empty()) throw UsageError("training split is empty");
  if (!lc.num_classes_set) run.model.num_classes = static_cast<int>(data.train.num_classes());
  if (static_cast<std::size_t>(run.model.num_classes) != data.train.num_classes()) {
    throw UsageError("config num_classes=" + std::to_string(run.model.num_classes) + " but the dataset has " +
                     std::to_string(data.train.num_classes()) + " classes");
  }
  run.model.validate();

  const PreparedSet train_set = prepare_dataset(data.train, run.model, run.train.threads);
  const PreparedSet test_set = prepare_dataset(data.test, run.model, run.train.threads);
  fs::create_directories(a.out_dir);
  const fs::path metrics_path = fs::path(a.out_dir) / "metrics.txt";
  std::ofstream metrics(metrics_path);
  if (!metrics) throw UsageError("cannot write " + metrics_path.string());
  out << "train=" << train_set.size() << " test=" << test_set.size() << " classes=" << run.model.num_classes
      << " params=" << parameter_count(ModelParams::zeros(run.model)) << '\n';

  const TrainResult result = train(train_set, test_set, run.model, run.train, [&](const EpochMetrics& m, const ModelParams&) {
    metrics << format_metrics(m) << '\n';
    metrics.flush();
    out << format_metrics(m) << '\n';
  });
  const std::string summary =
      "best_epoch=" + std::to_string(result.best_epoch) + " best_test_acc=" + fixed(result.best_test_acc, 4);
  metrics << summary << '\n';
  if (!metrics) throw UsageError("failed writing " + metrics_path.string());

  const fs::path ck = fs::path(a.out_dir) / "checkpoint.bin";
  save_checkpoint(ck, result.best_params, run.model);
  out << summary << '\n' << "checkpoint=" << ck.string() << " sha256=" << file_sha256(ck) << '\n';
  return kExitOk;
}

// --- eval -------------------------------------------------------------------

struct EvalArgs {
  ConfigArgs config;
  std::string checkpoint;
  std::string data;
  bool synthetic = false;
  std::string split = "test";
  int threads = 1;
  bool deterministic = false;
};

int cmd_eval(EvalArgs a, std::ostream& out, std::ostream& err) {
  if (a.deterministic) a.threads = 1;
  LoadedConfig lc = load_config(a.config);
  Checkpoint ck = load_checkpoint(a.checkpoint);
  if (!a.config.config_path.empty() || !a.config.overrides.empty()) {
    // Model keys given in the config or via --set must agree with the checkpoint.
    const KeyValues kv = gather_key_values(a.config);
    RunConfig expected_run;
    expected_run.model = ck.config;
    KeyValues model_kv;
    const KeyValues canonical = model_config_key_values(ck.config);
    for (const auto& [k, v] : kv) {
      for (const auto& [ck_key, ck_value] : canonical) {
        if (k == ck_key) model_kv.emplace_back(k, v);
      }
    }
    apply_key_values(expected_run, model_kv);
    ck = load_checkpoint(a.checkpoint, expected_run.model);
  }
  if (a.split != "train" && a.split != "test") throw UsageError("--split must be train or test");
  Splits data = acquire_data(lc.run, a.data, a.synthetic, a.threads, err);
  const Dataset& ds = a.split == "train" ? data.train : data.test;
  if (ds.empty()) throw UsageError("the " + a.split + " split is empty");
  if (ds.num_classes() != static_cast<std::size_t>(ck.config.num_classes)) {
    throw UsageError("checkpoint has " + std::to_string(ck.config.num_classes) + " classes, dataset has " +
                     std::to_string(ds.num_classes()));
  }
  const PreparedSet set = prepare_dataset(ds, ck.config, a.threads);
  const EvalReport rep = evaluate(set, ck.params, ck.config, a.threads);
  for (std::size_t c = 0; c < rep.class_accuracy.size(); ++c) {
    out << "class=" << set.class_names[c] << " count=" << rep.class_count[c]
        << " accuracy=" << fixed(rep.class_accuracy[c], 4) << '\n';
  }
  out << "split=" << a.split << " samples=" << set.size() << " accuracy=" << fixed(rep.accuracy, 4)
      << " mean_loss=" << fixed(rep.mean_loss, 6) << " stalls=" << rep.stalls << '\n';
  return kExitOk;
}

// --- bench ------------------------------------------------------------------

struct BenchArgs {
  std::size_t faces = 500;
  int batches = 50;
  int batch = 50;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string report;
  bool deterministic = false;
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
};

Stat stats(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.stddev += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(s.stddev / static_cast<double>(xs.size() - 1)) : 0.0;
  return s;
}

std::string peak_rss() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream is(line.substr(6));
      long kb = 0;
      is >> kb;
      return std::to_string(kb);
    }
  }
  return "n/a";
}

int cmd_bench(BenchArgs a, std::ostream& out) {
  if (a.deterministic) a.threads = 1;
  if (a.batch < 1) throw UsageError("--batch must be >= 1");
  if (a.batches < 1) throw UsageError("--passes must be >= 1");
  if (a.threads < 1) throw UsageError("--threads must be >= 1");
  if (a.faces < 20) throw UsageError("--faces must be >= 20");

  ModelConfig config;
  const auto target = [&](double frac) { return static_cast<std::size_t>(std::lround(frac * a.faces)); };
  config.blocks[0].pool_target = target(0.8);
  config.blocks[1].pool_target = target(0.6);
  config.blocks[2].pool_target = target(0.4);
  config.validate();
  const ModelParams params = ModelParams::init(config);

  const auto n = static_cast<std::size_t>(a.batch);
  std::vector<Mesh> meshes(n);
  parallel_for(n, a.threads, [&](std::size_t i) { meshes[i] = mesh_near_face_count(a.faces, derive_seed(a.seed, i)); });

  struct MeshTimes {
    double prepare = 0.0;
    PhaseTimes fwd;
    PhaseTimes bwd;
    std::vector<double> removal;  // first-pass removal per block
    double checksum = 0.0;
  };
  const std::vector<std::string> phases{"prepare",  "descriptor_fwd", "regions_fwd", "conv_fwd", "pool_fwd",
                                        "head_fwd", "head_bwd",       "pool_bwd",    "conv_bwd", "descriptor_bwd"};
  std::vector<std::vector<double>> per_phase(phases.size());
  std::vector<double> wall;
  std::vector<double> removal_sum(config.blocks.size(), 0.0);
  double checksum = 0.0;
  std::vector<MeshTimes> mt(n);

  for (int b = 0; b < a.batches; ++b) {
    const auto start = std::chrono::steady_clock::now();
    parallel_for(n, a.threads, [&](std::size_t i) {
      MeshTimes& t = mt[i];
      t = MeshTimes{};
      const auto p0 = std::chrono::steady_clock::now();
      const MeshInput input = prepare_input(meshes[i], config);
      t.prepare = elapsed_ms(p0) / 1000.0;
      const ForwardResult fr = model_forward(input, params, config, nullptr, &t.fwd);
      const auto h0 = std::chrono::steady_clock::now();
      const LossResult loss = cross_entropy_loss(fr.logits, static_cast<int>(i % config.num_classes));
      t.fwd.head += elapsed_ms(h0) / 1000.0;
      ModelParams g = model_backward(input, fr.tape, params, config, loss.grad, {}, &t.bwd);
      for (const BlockTape& bt : fr.tape.blocks) {
        const auto& passes = bt.pooled.passes;
        t.removal.push_back(passes.empty() ? 0.0
                                           : 1.0 - static_cast<double>(passes[0].output_faces()) /
                                                       static_cast<double>(passes[0].input_faces()));
      }
      t.checksum = loss.loss;
      for (const TensorRef& ref : tensors(g)) {
        for (std::size_t k = 0; k < ref.size; ++k) t.checksum += ref.data[k];
      }
    });
    wall.push_back(elapsed_ms(start));
    std::vector<double> sums(phases.size(), 0.0);
    for (const MeshTimes& t : mt) {
      const double v[] = {t.prepare,  t.fwd.descriptor, t.fwd.regions, t.fwd.conv, t.fwd.pool,
                          t.fwd.head, t.bwd.head,       t.bwd.pool,    t.bwd.conv, t.bwd.descriptor};
      for (std::size_t k = 0; k < phases.size(); ++k) sums[k] += v[k] * 1000.0;
      if (b == 0) {
        for (std::size_t k = 0; k < t.removal.size(); ++k) removal_sum[k] += t.removal[k];
        checksum += t.checksum;  // summed in mesh order
      }
    }
    for (std::size_t k = 0; k < phases.size(); ++k) per_phase[k].push_back(sums[k]);
  }

  out << "faces=" << a.faces << " batch=" << a.batch << " batches=" << a.batches << " threads=" << a.threads << " unit=ms_per_batch\n";
  std::ostringstream csv;
  csv << "phase,mean_ms,std_ms\n";
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const Stat s = stats(per_phase[k]);
    out << "phase=" << phases[k] << " mean_ms=" << fixed(s.mean, 3) << " std_ms=" << fixed(s.stddev, 3) << '\n';
    csv << phases[k] << ',' << fixed(s.mean, 3) << ',' << fixed(s.stddev, 3) << '\n';
  }
  const Stat w = stats(wall);
  out << "phase=batch_wall mean_ms=" << fixed(w.mean, 3) << " std_ms=" << fixed(w.stddev, 3) << '\n';
  csv << "batch_wall," << fixed(w.mean, 3) << ',' << fixed(w.stddev, 3) << '\n';
  out << "removal_fraction";
  for (std::size_t k = 0; k < removal_sum.size(); ++k) {
    out << " block" << k + 1 << '=' << fixed(removal_sum[k] / static_cast<double>(n), 4);
  }
  out << '\n';
  char sum_buf[64];
  std::snprintf(sum_buf, sizeof sum_buf, "%.17g", checksum);
  out << "checksum=" << sum_buf << '\n';
  out << "peak_rss_kb=" << peak_rss() << " (best effort)\n";
  if (!a.report.empty()) {
    std::ofstream rep(a.report);
    if (!rep) throw UsageError("cannot write " + a.report);
    rep << csv.str();
  }
  return kExitOk;
}

// --- gradcheck --------------------------------------------------------------

struct GradcheckArgs {
  std::size_t faces = 55;
  double tolerance = 1e-3;
  bool linear = false;
  int meshes = 1;
  std::uint64_t seed = 0;
  bool corrupt_conv = false;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  if (a.meshes < 1) throw UsageError("--meshes must be >= 1");
  if (!(a.tolerance > 0.0)) throw UsageError("--tolerance must be > 0");
  bool all_passed = true;
  for (int k = 0; k < a.meshes; ++k) {
    const std::uint64_t seed = derive_seed(a.seed, static_cast<std::uint64_t>(k));
    const Mesh m = gradcheck_mesh(a.faces, seed);
    const ModelConfig config = gradcheck_model_config(m.faces.size(), 3, a.linear, seed);
    const ModelParams params = gradcheck_params(config, a.linear);
    GradCheckOptions opts;
    opts.tolerance = a.tolerance;
    opts.skip_kinks = !a.linear;
    if (a.corrupt_conv) {
      // Negative control: a conv adjoint whose weight gradient is off by 1%.
      opts.conv_backward_override = [](const FeatureMatrix& x, const RegionTable& r, const ConvParams& p,
                                       const ConvCache& c, const FeatureMatrix& g, const ConvOptions& o) {
        ConvGradients cg = conv_backward(x, r, p, c, g, o);
        cg.params.w_center *= 1.01;
        return cg;
      };
    }
    const GradCheckReport rep = grad_check(prepare_input(m, config), static_cast<int>(seed % 3), params, config, opts);
    out << "mesh=" << k << " faces=" << m.faces.size() << " stalled=" << yes_no(rep.stalled) << '\n';
    for (const GroupReport& g : rep.groups) {
      char err_buf[32];
      std::snprintf(err_buf, sizeof err_buf, "%.3e", g.max_rel_error);
      out << "  group=" << g.name << " max_rel_error=" << err_buf << " checked=" << g.checked
          << " skipped=" << g.skipped << " status=" << (g.passed ? "pass" : "FAIL") << '\n';
    }
    all_passed = all_passed && rep.passed();
  }
  out << "gradcheck " << (all_passed ? "passed" : "FAILED") << " tolerance=" << a.tolerance << '\n';
  return all_passed ? kExitOk : kExitFailure;
}

// --- synth ------------------------------------------------------------------

int cmd_synth(const ConfigArgs& config, const std::string& out_dir, int threads, std::ostream& out) {
  const LoadedConfig lc = load_config(config);
  const Dataset all = generate_synthetic(lc.run.synthetic, threads);
  auto [train, test] =
      make_splits(all, lc.run.per_class_train > 0 ? lc.run.per_class_train : 30, lc.run.split_seed);
  Dataset merged = train;
  merged.samples.insert(merged.samples.end(), test.samples.begin(), test.samples.end());
  write_dataset(merged, out_dir);
  out << "wrote " << merged.size() << " meshes (" << train.size() << " train, " << test.size() << " test) to "
      << out_dir << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mesh convolution and face-collapse pooling toolkit", "meshconv"};
  app.require_subcommand(1);

  std::string info_path;
  auto* info = app.add_subcommand("info", "print mesh statistics and validation flags");
  info->add_option("mesh", info_path, "OFF or OBJ file")->required();

  PoolArgs pool_args;
  auto* pool = app.add_subcommand("pool", "pool a mesh down to a target face count");
  pool->add_option("mesh", pool_args.input, "OFF or OBJ file")->required();
  pool->add_option("--target,-t", pool_args.target, "target face count (>= 4)")->required();
  pool->add_option("--weights", pool_args.weights, "face features for the weights")
      ->check(CLI::IsMember({"uniform", "descriptor"}));
  pool->add_option("--conflict", pool_args.conflict, "region conflict rule")
      ->check(CLI::IsMember({"center_disjoint", "removed_set", "full_region"}));
  pool->add_option("--output,-o", pool_args.output, "write the pooled mesh as OFF");
  pool->add_option("--seed", pool_args.seed, "descriptor weight seed");
  pool->add_flag("--strict", pool_args.strict, "exit with status 1 on a stall");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train the classifier");
  add_config_options(*train_cmd, train_args.config);
  train_cmd->add_option("--data", train_args.data, "dataset root (<class>/<split>/<file>)");
  train_cmd->add_flag("--synthetic", train_args.synthetic, "generate the synthetic dataset instead");
  train_cmd->add_option("--out", train_args.out_dir, "output directory for metrics and checkpoint")->required();
  train_cmd->add_option("--threads", train_args.threads, "worker threads");
  train_cmd->add_option("--epochs", train_args.epochs, "epoch count");
  train_cmd->add_flag("--deterministic", train_args.deterministic, "run serially (results never depend on threads)");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_config_options(*eval, eval_args.config);
  eval->add_option("checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  eval->add_option("--data", eval_args.data, "dataset root");
  eval->add_flag("--synthetic", eval_args.synthetic, "regenerate the synthetic dataset");
  eval->add_option("--split", eval_args.split, "train or test");
  eval->add_option("--threads", eval_args.threads, "worker threads");
  eval->add_flag("--deterministic", eval_args.deterministic, "run serially");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "time forward/backward phases over batches of meshes");
  bench->add_option("--faces", bench_args.faces, "approximate faces per mesh");
  bench->add_option("--passes,--batches", bench_args.batches, "number of timed batches");
  bench->add_option("--batch", bench_args.batch, "meshes per batch");
  bench->add_option("--threads", bench_args.threads, "worker threads");
  bench->add_option("--seed", bench_args.seed, "mesh seed");
  bench->add_option("--report", bench_args.report, "also write per-phase timings as CSV");
  bench->add_flag("--deterministic", bench_args.deterministic, "run serially");

  GradcheckArgs gc_args;
  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
  gradcheck->add_option("--faces", gc_args.faces, "approximate faces per mesh");
  gradcheck->add_option("--tolerance", gc_args.tolerance, "max relative error");
  gradcheck->add_flag("--linear", gc_args.linear, "no activations and zero |.| weights");
  gradcheck->add_option("--meshes", gc_args.meshes, "number of seeded meshes");
  gradcheck->add_option("--seed", gc_args.seed, "base seed");
  gradcheck->add_flag("--corrupt-conv", gc_args.corrupt_conv, "negative control: perturb the conv adjoint");

  ConfigArgs synth_config;
  std::string synth_out;
  int synth_threads = 1;
  auto* synth = app.add_subcommand("synth", "write the synthetic dataset as OFF files");
  add_config_options(*synth, synth_config);
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--threads", synth_threads, "worker threads");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (info->parsed()) return cmd_info(info_path, out);
    if (pool->parsed()) return cmd_pool(pool_args, out, err);
    if (train_cmd->parsed()) return cmd_train(train_args, out, err);
    if (eval->parsed()) return cmd_eval(eval_args, out, err);
    if (bench->parsed()) return cmd_bench(bench_args, out);
    if (gradcheck->parsed()) return cmd_gradcheck(gc_args, out);
    if (synth->parsed()) return cmd_synth(synth_config, synth_out, synth_threads, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace meshconv::cli
