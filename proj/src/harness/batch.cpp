#include "sabfl/harness/batch.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "sabfl/chain/bytes.hpp"
#include "sabfl/harness/report.hpp"
#include "sabfl/protocol/protocol.hpp"
#include "sabfl/util/error.hpp"
#include "sabfl/util/parallel.hpp"

namespace sabfl {
namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool path_safe(const std::string& label) {
  if (label.empty() || label == "." || label == "..") return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

struct Section {
  std::string name;
  Settings settings;
};

}  // namespace

void ExperimentMatrix::validate() const {
  if (repeats == 0) throw ConfigError("matrix: repeats must be positive");
  if (cells.empty()) throw ConfigError("matrix: no cells");
  std::set<std::string> seen;
  for (const auto& c : cells) {
    if (!path_safe(c.label)) throw ConfigError("matrix: label '" + c.label + "' is not path-safe");
    if (!seen.insert(c.label).second) throw ConfigError("matrix: duplicate label '" + c.label + "'");
    try {
      c.cfg.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("matrix cell '" + c.label + "': " + e.what());
    }
  }
}

ExperimentMatrix parse_matrix(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentMatrix m;
  Settings base;
  std::vector<Section> cells;
  Settings* target = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = "matrix line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      const std::string header = trim(line.substr(1, line.size() - 2));
      if (header == "base") {
        target = &base;
      } else if (header.rfind("cell", 0) == 0 && header.size() > 4 && (header[4] == ' ' || header[4] == '\t')) {
        cells.push_back({trim(header.substr(4)), {}});
        target = &cells.back().settings;
      } else {
        throw ConfigError(where + "unknown section [" + header + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (!target) {
      if (key != "repeats") throw ConfigError(where + "only 'repeats' may appear before a section");
      try {
        const long long n = std::stoll(value);
        if (n <= 0 || std::to_string(n) != value) throw std::invalid_argument("repeats");
        m.repeats = static_cast<std::size_t>(n);
      } catch (const std::exception&) {
        throw ConfigError(where + "repeats must be a positive integer");
      }
      continue;
    }
    target->emplace_back(std::move(key), std::move(value));
  }

  for (const auto& cell : cells) {
    RunConfig cfg;
    std::vector<std::string> aggregators;
    for (const Settings* group : std::array<const Settings*, 2>{&base, &cell.settings}) {
      for (const auto& [k, v] : *group) {
        if (k == "aggregators") {
          aggregators = split_list(v);
          continue;
        }
        try {
          apply_setting(cfg, k, v);
        } catch (const ConfigError& e) {
          throw ConfigError("matrix cell '" + cell.name + "': " + e.what());
        }
      }
    }
    resolve_paths(cfg, base_dir);
    if (aggregators.empty()) {
      m.cells.push_back({cell.name, cfg});
      continue;
    }
    for (const auto& a : aggregators) {
      RunConfig c = cfg;
      try {
        c.aggregator = aggregator_from_string(a);
      } catch (const ConfigError& e) {
        throw ConfigError("matrix cell '" + cell.name + "': " + e.what());
      }
      m.cells.push_back({cell.name + "-" + a, c});
    }
  }
  m.validate();
  return m;
}

ExperimentMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix " + path.string());
  return parse_matrix(in, path.parent_path());
}

std::vector<BatchRun> run_batch(const ExperimentMatrix& matrix, const std::filesystem::path& out_dir,
                                const BatchOptions& options) {
  matrix.validate();
  std::vector<BatchRun> runs;
  std::vector<RunConfig> configs;
  for (const auto& cell : matrix.cells) {
    for (std::size_t k = 0; k < matrix.repeats; ++k) {
      RunConfig c = cell.cfg;
      c.seed = options.seed.value_or(cell.cfg.seed) + k;
      c.threads = 1;
      runs.push_back({cell.label, k, c.seed, 0.0, {}, {}});
      configs.push_back(std::move(c));
    }
  }
  std::filesystem::create_directories(out_dir);
  parallel_for(runs.size(), options.jobs, [&](std::size_t i) {
    const auto dir = out_dir / runs[i].label / ("rep" + std::to_string(runs[i].repeat));
    const RunReport rep = run_experiment(configs[i], dir);
    runs[i].final_accuracy = rep.final_accuracy;
    runs[i].chain_tip = to_hex(rep.chain_tip);
    runs[i].fault = rep.fault;
  });
  if (options.write_report) emit_report(out_dir);
  return runs;
}

}  // namespace sabfl
