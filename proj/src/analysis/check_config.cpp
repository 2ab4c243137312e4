#include "sabfl/analysis/check_config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "sabfl/protocol/config.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

double real_value(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": expected a real, got '" + v + "'");
  return x;
}

std::size_t count_value(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return static_cast<std::size_t>(std::stoull(v));
  } catch (const std::exception&) {
    throw ConfigError(key + ": value out of range");
  }
}

}  // namespace

ModelSpec ConvergenceCheckConfig::spec() const { return ModelSpec::quadratic(std::vector<double>(dim, 0.0)); }

std::vector<std::uint64_t> ConvergenceCheckConfig::seeds() const {
  std::vector<std::uint64_t> out(num_seeds);
  for (std::size_t i = 0; i < num_seeds; ++i) out[i] = seed + i;
  return out;
}

ConvergenceCheckConfig parse_convergence_config(std::istream& in) {
  ConvergenceCheckConfig c;
  TheoryConfig& t = c.theory;
  std::string schedule = "example";
  double lr = 0.0;
  std::size_t batch = 1;
  for (const auto& [k, v] : parse_settings(in)) {
    if (k == "L") t.L = real_value(k, v);
    else if (k == "delta") t.delta = real_value(k, v);
    else if (k == "M") t.M = real_value(k, v);
    else if (k == "epsilon") t.epsilon = real_value(k, v);
    else if (k == "epsilon_tilde") t.epsilon_tilde = real_value(k, v);
    else if (k == "epochs") t.epochs = count_value(k, v);
    else if (k == "workers") t.num_workers = count_value(k, v);
    else if (k == "validators") t.num_validators = count_value(k, v);
    else if (k == "rounds") t.rounds = count_value(k, v);
    else if (k == "dim") c.dim = count_value(k, v);
    else if (k == "seed") c.seed = count_value(k, v);
    else if (k == "seeds") c.num_seeds = count_value(k, v);
    else if (k == "lr_schedule") schedule = v;
    else if (k == "lr") lr = real_value(k, v);
    else if (k == "batch_size") batch = count_value(k, v);
    else if (k == "initial_distance") c.initial_distance = real_value(k, v);
    else if (k == "decay_threshold") c.decay_threshold = real_value(k, v);
    else if (k == "threads") c.threads = count_value(k, v);
    else if (k == "checkpoints") {
      c.checkpoints.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) c.checkpoints.push_back(count_value(k, item.substr(b, e - b + 1)));
      }
    } else {
      throw ConfigError("unknown convergence-check key '" + k + "'");
    }
  }

  if (schedule == "example") {
    const double offset = std::ceil(2.0 * t.L);
    t.lr = [offset](std::size_t r) { return 1.0 / (offset + static_cast<double>(r)); };
  } else if (schedule == "constant") {
    if (!(lr > 0.0)) throw ConfigError("lr_schedule = constant needs lr > 0");
    t.lr = [lr](std::size_t) { return lr; };
  } else {
    throw ConfigError("lr_schedule must be example or constant");
  }
  t.batch = [batch](std::size_t) { return batch; };

  if (c.dim == 0) throw ConfigError("dim must be positive");
  if (c.num_seeds == 0) throw ConfigError("seeds must be positive");
  if (c.initial_distance < 0.0) throw ConfigError("initial_distance must be non-negative");
  if (c.initial_distance > 0.0) {
    const ModelSpec s = c.spec();
    ParamVector w0 = ParamVector::zeros(s.shape());
    const double step = c.initial_distance / std::sqrt(static_cast<double>(c.dim));
    for (auto& x : w0.values) x = step;
    t.initial_weight = std::move(w0);
  }
  for (auto cp : c.checkpoints) {
    if (cp == 0 || cp > t.rounds) throw ConfigError("checkpoint " + std::to_string(cp) + " outside 1..rounds");
  }
  t.validate();
  return c;
}

ConvergenceCheckConfig load_convergence_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_convergence_config(in);
}

}  // namespace sabfl
