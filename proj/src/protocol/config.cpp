#include "sabfl/protocol/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_uint<T>(key, item));
  }
  return out;
}

}  // namespace

const char* to_string(LrSchedule s) { return s == LrSchedule::kConstant ? "constant" : "inverse"; }

const char* to_string(DatasetSource s) {
  switch (s) {
    case DatasetSource::kSynthetic:
      return "synthetic";
    case DatasetSource::kIdx:
      return "idx";
    case DatasetSource::kCsv:
      return "csv";
  }
  return "unknown";
}

const char* to_string(StakeMode s) { return s == StakeMode::kShardSize ? "shard_size" : "uniform"; }

double RunConfig::learning_rate(std::uint64_t round) const {
  if (lr_schedule == LrSchedule::kConstant) return lr;
  return lr / (1.0 + lr_decay * static_cast<double>(round - 1));
}

void RunConfig::validate() const {
  if (num_workers < 1 || num_validators < 1) throw ConfigError("need K >= 1 and V >= 1");
  if (num_workers + num_validators + 1 != num_participants) {
    throw ConfigError("K + V + 1 must equal num_participants");
  }
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (lr_decay < 0.0) throw ConfigError("lr_decay must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (stopping_window < 2) throw ConfigError("stopping_window must be >= 2");
  if (max_rounds < 1) throw ConfigError("max_rounds must be >= 1");
  if (model == ModelKind::kQuadratic) throw ConfigError("protocol runs need a classifier model");
  if (model == ModelKind::kMlp && hidden_dim < 1) throw ConfigError("mlp needs hidden_dim >= 1");
  if (!(partition_lambda > 0.0)) throw ConfigError("partition_lambda must be > 0");
  if (aggregator == AggregatorKind::kKrum && num_workers < krum_f + 3) {
    throw ConfigError("krum needs K >= krum_f + 3");
  }
  if (source == DatasetSource::kIdx && (train_images.empty() || train_labels.empty() || test_images.empty() ||
                                        test_labels.empty())) {
    throw ConfigError("idx source needs train/test image and label paths");
  }
  if (source == DatasetSource::kCsv && (train_csv.empty() || test_csv.empty())) {
    throw ConfigError("csv source needs train_csv and test_csv");
  }
  if (attack.malicious_ids.empty() ? num_malicious > num_participants
                                   : attack.malicious_ids.size() != num_malicious && num_malicious != 0) {
    throw ConfigError("num_malicious inconsistent with participants / malicious_ids");
  }
  for (auto id : attack.malicious_ids) {
    if (id >= num_participants) throw ConfigError("malicious id outside participant range");
  }
  if (!(attack.max_malicious_validator_fraction >= 0.0 && attack.max_malicious_validator_fraction <= 0.5)) {
    throw ConfigError("max_malicious_validator_fraction must lie in [0, 0.5]");
  }
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "experiment") c.experiment = v;
  else if (key == "variant") c.variant = v;
  else if (key == "num_participants") c.num_participants = parse_uint<std::size_t>(key, v);
  else if (key == "workers") c.num_workers = parse_uint<std::size_t>(key, v);
  else if (key == "validators") c.num_validators = parse_uint<std::size_t>(key, v);
  else if (key == "epochs") c.epochs = parse_uint<std::size_t>(key, v);
  else if (key == "lr") c.lr = parse_real(key, v);
  else if (key == "lr_schedule") {
    if (v == "constant") c.lr_schedule = LrSchedule::kConstant;
    else if (v == "inverse") c.lr_schedule = LrSchedule::kInverse;
    else throw ConfigError("lr_schedule must be constant or inverse");
  } else if (key == "lr_decay") c.lr_decay = parse_real(key, v);
  else if (key == "batch_size") c.batch_size = parse_uint<std::size_t>(key, v);
  else if (key == "stopping_window") c.stopping_window = parse_uint<std::size_t>(key, v);
  else if (key == "max_rounds") c.max_rounds = parse_uint<std::size_t>(key, v);
  else if (key == "aggregator") c.aggregator = aggregator_from_string(v);
  else if (key == "krum_f") c.krum_f = parse_uint<std::uint32_t>(key, v);
  else if (key == "seed") c.seed = parse_uint<std::uint64_t>(key, v);
  else if (key == "model") c.model = model_kind_from_string(v);
  else if (key == "hidden_dim") c.hidden_dim = parse_uint<std::size_t>(key, v);
  else if (key == "dataset") {
    if (v == "synthetic") c.source = DatasetSource::kSynthetic;
    else if (v == "idx") c.source = DatasetSource::kIdx;
    else if (v == "csv") c.source = DatasetSource::kCsv;
    else throw ConfigError("dataset must be synthetic, idx or csv");
  } else if (key == "train_samples") c.train_samples = parse_uint<std::size_t>(key, v);
  else if (key == "test_samples") c.test_samples = parse_uint<std::size_t>(key, v);
  else if (key == "input_dim") c.input_dim = parse_uint<std::size_t>(key, v);
  else if (key == "num_classes") c.num_classes = parse_uint<std::size_t>(key, v);
  else if (key == "class_separation") c.class_separation = parse_real(key, v);
  else if (key == "train_images") c.train_images = v;
  else if (key == "train_labels") c.train_labels = v;
  else if (key == "test_images") c.test_images = v;
  else if (key == "test_labels") c.test_labels = v;
  else if (key == "train_csv") c.train_csv = v;
  else if (key == "test_csv") c.test_csv = v;
  else if (key == "partition_lambda") c.partition_lambda = parse_real(key, v);
  else if (key == "min_shard_size") c.min_shard_size = parse_uint<std::size_t>(key, v);
  else if (key == "num_malicious") c.num_malicious = parse_uint<std::size_t>(key, v);
  else if (key == "malicious_ids") {
    const auto ids = parse_list<ParticipantId>(key, v);
    c.attack.malicious_ids = {ids.begin(), ids.end()};
  } else if (key == "flip_map") {
    const auto m = parse_list<int>(key, v);
    c.attack.flip_map = m;
  } else if (key == "malicious_validators") c.attack.validators_can_be_malicious = parse_bool(key, v);
  else if (key == "max_malicious_validator_fraction") c.attack.max_malicious_validator_fraction = parse_real(key, v);
  else if (key == "stake_mode") {
    if (v == "shard_size") c.stake_mode = StakeMode::kShardSize;
    else if (v == "uniform") c.stake_mode = StakeMode::kUniform;
    else throw ConfigError("stake_mode must be shard_size or uniform");
  } else if (key == "threads") c.threads = parse_uint<std::size_t>(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

RunConfig parse_run_config(std::istream& in) {
  RunConfig cfg;
  for (const auto& [k, v] : parse_settings(in)) apply_setting(cfg, k, v);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  RunConfig cfg = parse_run_config(in);
  resolve_paths(cfg, path.parent_path());
  return cfg;
}

void resolve_paths(RunConfig& cfg, const std::filesystem::path& base_dir) {
  if (base_dir.empty()) return;
  for (auto* p : {&cfg.train_images, &cfg.train_labels, &cfg.test_images, &cfg.test_labels, &cfg.train_csv,
                  &cfg.test_csv}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base_dir / *p).string();
  }
}

std::string to_settings(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  auto ids = [](const auto& xs) {
    std::string s;
    for (auto x : xs) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
  };
  os << "experiment = " << c.experiment << '\n'
     << "variant = " << c.variant << '\n'
     << "num_participants = " << c.num_participants << '\n'
     << "workers = " << c.num_workers << '\n'
     << "validators = " << c.num_validators << '\n'
     << "epochs = " << c.epochs << '\n'
     << "lr = " << c.lr << '\n'
     << "lr_schedule = " << to_string(c.lr_schedule) << '\n'
     << "lr_decay = " << c.lr_decay << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "stopping_window = " << c.stopping_window << '\n'
     << "max_rounds = " << c.max_rounds << '\n'
     << "aggregator = " << to_string(c.aggregator) << '\n'
     << "krum_f = " << c.krum_f << '\n'
     << "seed = " << c.seed << '\n'
     << "model = " << to_string(c.model) << '\n'
     << "hidden_dim = " << c.hidden_dim << '\n'
     << "dataset = " << to_string(c.source) << '\n'
     << "train_samples = " << c.train_samples << '\n'
     << "test_samples = " << c.test_samples << '\n'
     << "input_dim = " << c.input_dim << '\n'
     << "num_classes = " << c.num_classes << '\n'
     << "class_separation = " << c.class_separation << '\n';
  if (!c.train_images.empty()) os << "train_images = " << c.train_images << '\n';
  if (!c.train_labels.empty()) os << "train_labels = " << c.train_labels << '\n';
  if (!c.test_images.empty()) os << "test_images = " << c.test_images << '\n';
  if (!c.test_labels.empty()) os << "test_labels = " << c.test_labels << '\n';
  if (!c.train_csv.empty()) os << "train_csv = " << c.train_csv << '\n';
  if (!c.test_csv.empty()) os << "test_csv = " << c.test_csv << '\n';
  os << "partition_lambda = " << c.partition_lambda << '\n'
     << "min_shard_size = " << c.min_shard_size << '\n'
     << "num_malicious = " << c.num_malicious << '\n';
  if (!c.attack.malicious_ids.empty()) os << "malicious_ids = " << ids(c.attack.malicious_ids) << '\n';
  if (!c.attack.flip_map.empty()) os << "flip_map = " << ids(c.attack.flip_map) << '\n';
  os << "malicious_validators = " << (c.attack.validators_can_be_malicious ? "true" : "false") << '\n'
     << "max_malicious_validator_fraction = " << c.attack.max_malicious_validator_fraction << '\n'
     << "stake_mode = " << to_string(c.stake_mode) << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

}  // namespace sabfl
