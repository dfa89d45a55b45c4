#include "meshconv/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace meshconv {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  throw ConfigError("config: invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

long long to_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) bad_value(key, value, "an int");
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an unsigned integer");
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  // strtod rather than from_chars: gcc 11 lacks floating-point from_chars.
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size()) bad_value(key, value, "a number");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(key, value, "true/false");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

template <typename E>
E parse_enum(const std::string& key, const std::string& value, const std::map<std::string, E>& names) {
  const auto it = names.find(value);
  if (it == names.end()) {
    std::string expected;
    for (const auto& [n, e] : names) expected += (expected.empty() ? "" : "|") + n;
    bad_value(key, value, expected);
  }
  return it->second;
}

template <typename E>
std::string enum_name(E value, const std::map<std::string, E>& names) {
  for (const auto& [n, e] : names) {
    if (e == value) return n;
  }
  throw std::logic_error("config: enum value without a name");
}

const std::map<std::string, HeadKind> kHeads{{"linear", HeadKind::kLinear},
                                             {"class_channels", HeadKind::kClassChannels}};
const std::map<std::string, AbsMode> kAbsModes{{"componentwise", AbsMode::kComponentwise},
                                               {"euclidean", AbsMode::kEuclidean}};
const std::map<std::string, bool> kAggregates{{"sum", false}, {"mean", true}};
const std::map<std::string, ConflictRule> kConflicts{{"center_disjoint", ConflictRule::kCenterDisjoint},
                                                     {"removed_set", ConflictRule::kRemovedSet},
                                                     {"full_region", ConflictRule::kFullRegion}};
const std::map<std::string, AveragingMode> kAveraging{{"shared_vertex", AveragingMode::kSharedVertex},
                                                      {"whole_region", AveragingMode::kWholeRegion}};
const std::map<std::string, OptimizerKind> kOptimizers{{"sgd", OptimizerKind::kSgd}, {"adam", OptimizerKind::kAdam}};

// Block lists resize config.blocks; every list must agree on the block count.
void set_block_list(ModelConfig& m, const std::string& key, const std::string& value,
                    const std::function<void(BlockConfig&, const std::string&)>& set) {
  const auto items = split_list(value);
  if (items.empty()) bad_value(key, value, "a comma-separated list");
  m.blocks.resize(items.size(), m.blocks.empty() ? BlockConfig{} : m.blocks.back());
  for (std::size_t i = 0; i < items.size(); ++i) set(m.blocks[i], items[i]);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["num_classes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.num_classes = to_int(k, v);
    };
    t["k_geo"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.k_geo = to_int(k, v); };
    t["k_geom"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.k_geom = to_int(k, v); };
    t["conv_layers"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      set_block_list(c.model, k, v, [&](BlockConfig& b, const std::string& s) { b.conv_layers = to_int(k, s); });
    };
    t["channels"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      set_block_list(c.model, k, v, [&](BlockConfig& b, const std::string& s) { b.channels = to_int(k, s); });
    };
    t["kernel_sizes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      set_block_list(c.model, k, v, [&](BlockConfig& b, const std::string& s) { b.kernel_size = to_int(k, s); });
    };
    t["t_schedule"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      set_block_list(c.model, k, v, [&](BlockConfig& b, const std::string& s) { b.pool_target = to_u64(k, s); });
    };
    t["activation"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.activation = to_bool(k, v);
    };
    t["final_activation"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.final_activation = to_bool(k, v);
    };
    t["head"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.head = parse_enum(k, v, kHeads); };
    t["abs_mode"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.abs_mode = parse_enum(k, v, kAbsModes);
    };
    t["aggregate"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.mean_aggregate = parse_enum(k, v, kAggregates);
    };
    t["conflict"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.conflict = parse_enum(k, v, kConflicts);
    };
    t["averaging"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model.averaging = parse_enum(k, v, kAveraging);
    };
    t["model_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.model.seed = to_u64(k, v); };

    t["optimizer"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.optimizer = parse_enum(k, v, kOptimizers);
    };
    t["lr"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.learning_rate = to_double(k, v); };
    t["momentum"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.momentum = to_double(k, v);
    };
    t["beta1"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta1 = to_double(k, v); };
    t["beta2"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.beta2 = to_double(k, v); };
    t["epsilon"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epsilon = to_double(k, v); };
    t["weight_decay"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.weight_decay = to_double(k, v);
    };
    t["epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.epochs = to_int(k, v); };
    t["batch_size"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.batch_size = to_int(k, v);
    };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = to_u64(k, v); };
    t["threads"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.train.threads = to_int(k, v); };

    t["synthetic.classes"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.classes.clear();
      try {
        for (const std::string& s : split_list(v)) c.synthetic.classes.push_back(parse_shape_class(s));
      } catch (const std::invalid_argument&) {
        bad_value(k, v, "a list of icosphere|box|torus");
      }
    };
    t["synthetic.samples_per_class"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.samples_per_class = to_int(k, v);
    };
    t["synthetic.face_lo"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.face_lo = to_u64(k, v);
    };
    t["synthetic.face_hi"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.face_hi = to_u64(k, v);
    };
    t["synthetic.jitter"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.jitter = to_double(k, v);
    };
    t["synthetic.rigid"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.rigid = to_bool(k, v);
    };
    t["synthetic.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.synthetic.seed = to_u64(k, v);
    };
    t["per_class_train"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.per_class_train = to_int(k, v);
    };
    t["split_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.split_seed = to_u64(k, v); };
    return t;
  }();
  return table;
}

const std::set<std::string> kModelKeys{"num_classes", "k_geo",    "k_geom",     "conv_layers", "channels",
                                       "kernel_sizes", "t_schedule", "activation", "final_activation", "head",
                                       "abs_mode",    "aggregate", "conflict",   "averaging",   "model_seed"};

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: expected key=value at line " + std::to_string(line_no));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(line_no));
    if (!seen.insert(key).second) {
      throw ConfigError("config: repeated key '" + key + "' at line " + std::to_string(line_no));
    }
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValues parse_key_values_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_key_values(in);
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void apply_key_values(RunConfig& config, const KeyValues& kv) {
  const auto& table = setters();
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(config, key, value);
  }
}

KeyValues model_config_key_values(const ModelConfig& m) {
  const auto num = [](auto v) { return std::to_string(v); };
  return {
      {"num_classes", num(m.num_classes)},
      {"k_geo", num(m.k_geo)},
      {"k_geom", num(m.k_geom)},
      {"conv_layers", join(m.blocks, [&](const BlockConfig& b) { return num(b.conv_layers); })},
      {"channels", join(m.blocks, [&](const BlockConfig& b) { return num(b.channels); })},
      {"kernel_sizes", join(m.blocks, [&](const BlockConfig& b) { return num(b.kernel_size); })},
      {"t_schedule", join(m.blocks, [&](const BlockConfig& b) { return num(b.pool_target); })},
      {"activation", m.activation ? "true" : "false"},
      {"final_activation", m.final_activation ? "true" : "false"},
      {"head", enum_name(m.head, kHeads)},
      {"abs_mode", enum_name(m.abs_mode, kAbsModes)},
      {"aggregate", enum_name(m.mean_aggregate, kAggregates)},
      {"conflict", enum_name(m.conflict, kConflicts)},
      {"averaging", enum_name(m.averaging, kAveraging)},
      {"model_seed", num(m.seed)},
  };
}

ModelConfig model_config_from_key_values(const KeyValues& kv) {
  RunConfig rc;
  for (const auto& [key, value] : kv) {
    if (!kModelKeys.contains(key)) throw ConfigError("config: '" + key + "' is not a model key");
  }
  apply_key_values(rc, kv);
  return rc.model;
}

KeyValues train_config_key_values(const TrainConfig& t) {
  return {
      {"optimizer", enum_name(t.optimizer, kOptimizers)},
      {"lr", format_double(t.learning_rate)},
      {"momentum", format_double(t.momentum)},
      {"beta1", format_double(t.beta1)},
      {"beta2", format_double(t.beta2)},
      {"epsilon", format_double(t.epsilon)},
      {"weight_decay", format_double(t.weight_decay)},
      {"epochs", std::to_string(t.epochs)},
      {"batch_size", std::to_string(t.batch_size)},
      {"seed", std::to_string(t.seed)},
      {"threads", std::to_string(t.threads)},
  };
}

}  // namespace meshconv
