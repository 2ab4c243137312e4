#include "sabfl/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sabfl/chain/block.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Canonical aggregator order first, then anything else alphabetically.
std::vector<std::string> order_methods(const std::set<std::string>& present) {
  std::vector<std::string> out;
  for (auto k : {AggregatorKind::kSoftmax, AggregatorKind::kSoftmaxAccuracy, AggregatorKind::kVanilla,
                 AggregatorKind::kSimple, AggregatorKind::kMedian, AggregatorKind::kKrum}) {
    if (present.count(to_string(k))) out.emplace_back(to_string(k));
  }
  for (const auto& m : present) {
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return sum / static_cast<double>(n); }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string row_name(const std::string& experiment, const std::string& variant) {
  return variant.empty() ? experiment : experiment + "-" + variant;
}

}  // namespace

double robustness_score(double acc_lh, double acc_hh) {
  // Fractions or percentages both work; only the ratio matters.
  if (!(acc_lh > 0.0) || !(acc_hh > 0.0) || !std::isfinite(acc_lh) || !std::isfinite(acc_hh)) {
    throw ConfigError("robustness_score: accuracies must be positive");
  }
  return std::min(acc_lh, acc_hh) / std::max(acc_lh, acc_hh);
}

ComparisonReport rank_methods(std::vector<std::string> experiments, std::vector<std::string> methods,
                              std::vector<std::vector<double>> accuracy) {
  if (accuracy.size() != experiments.size()) throw DimensionError("rank_methods: row count mismatch");
  for (const auto& row : accuracy) {
    if (row.size() != methods.size()) throw DimensionError("rank_methods: column count mismatch");
  }
  ComparisonReport rep;
  rep.experiments = std::move(experiments);
  rep.methods = std::move(methods);
  rep.accuracy = std::move(accuracy);
  const std::size_t m = rep.methods.size();
  for (const auto& row : rep.accuracy) {
    std::vector<std::size_t> ranks(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t better = 0;
      for (std::size_t k = 0; k < m; ++k) better += row[k] > row[i];
      ranks[i] = better + 1;
    }
    rep.ranks.push_back(std::move(ranks));
  }
  const double n = static_cast<double>(rep.ranks.size());
  for (std::size_t i = 0; i < m; ++i) {
    MethodRank s{rep.methods[i], 0.0, 0.0};
    if (!rep.ranks.empty()) {
      for (const auto& r : rep.ranks) s.mean += static_cast<double>(r[i]);
      s.mean /= n;
      for (const auto& r : rep.ranks) s.sd += (static_cast<double>(r[i]) - s.mean) * (static_cast<double>(r[i]) - s.mean);
      s.sd = std::sqrt(s.sd / n);
    }
    rep.rank_stats.push_back(s);
  }
  return rep;
}

RunSummary read_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    RunSummary s;
    s.experiment = j.at("experiment").get<std::string>();
    s.variant = j.at("variant").get<std::string>();
    s.aggregator = j.at("aggregator").get<std::string>();
    s.num_malicious = j.at("num_malicious").get<std::size_t>();
    s.partition_lambda = j.at("partition_lambda").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.final_accuracy = j.at("final_accuracy").get<double>();
    s.chain_tip = j.at("chain_tip").get<std::string>();
    if (!j.at("fault").is_null()) s.fault = j.at("fault").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<RunSummary> collect_summaries(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "summary.json") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunSummary> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(read_summary(p));
  return out;
}

ReportFiles emit_report(const std::filesystem::path& results_dir, const std::optional<std::filesystem::path>& out_dir) {
  const auto runs = collect_summaries(results_dir);
  if (runs.empty()) throw ConfigError("no run summaries under " + results_dir.string());
  const std::filesystem::path dest = out_dir.value_or(results_dir);
  std::filesystem::create_directories(dest);

  // (experiment, variant) -> method -> mean accuracy over repeats.
  using RowKey = std::pair<std::string, std::string>;
  std::map<RowKey, std::map<std::string, Mean>> cells;
  std::map<RowKey, std::size_t> malicious;
  std::map<std::pair<std::string, std::size_t>, std::map<std::string, Mean>> trends;
  std::set<std::string> present;
  for (const auto& r : runs) {
    const RowKey key{r.experiment, r.variant};
    cells[key][r.aggregator].add(r.final_accuracy);
    malicious[key] = std::max(malicious[key], r.num_malicious);
    trends[{r.variant, r.num_malicious}][r.aggregator].add(r.final_accuracy);
    present.insert(r.aggregator);
  }
  const auto methods = order_methods(present);

  ReportFiles files{dest / "comparison.csv", dest / "robustness.csv", dest / "rankings.csv", dest / "trends.csv"};

  std::ostringstream cmp;
  cmp << "experiment,variant,num_malicious";
  for (const auto& m : methods) cmp << ',' << m;
  cmp << '\n';
  std::vector<std::string> full_rows;
  std::vector<std::vector<double>> full_acc;
  for (const auto& [key, by_method] : cells) {
    cmp << key.first << ',' << key.second << ',' << malicious[key];
    std::vector<double> row;
    for (const auto& m : methods) {
      cmp << ',';
      auto it = by_method.find(m);
      if (it != by_method.end()) {
        cmp << fmt(it->second.value());
        row.push_back(it->second.value());
      }
    }
    cmp << '\n';
    if (row.size() == methods.size()) {
      full_rows.push_back(row_name(key.first, key.second));
      full_acc.push_back(std::move(row));
    }
  }
  write_file(files.comparison, cmp.str());

  // Robustness pairs the LH and HH variants of each experiment.
  std::ostringstream rob;
  rob << "experiment,method,acc_lh,acc_hh,robustness\n";
  std::set<std::string> experiments;
  for (const auto& [key, _] : cells) experiments.insert(key.first);
  for (const auto& e : experiments) {
    auto lh = cells.find({e, "LH"});
    auto hh = cells.find({e, "HH"});
    if (lh == cells.end() || hh == cells.end()) continue;
    for (const auto& m : methods) {
      auto a = lh->second.find(m);
      auto b = hh->second.find(m);
      if (a == lh->second.end() || b == hh->second.end()) continue;
      const double x = a->second.value(), y = b->second.value();
      rob << e << ',' << m << ',' << fmt(x) << ',' << fmt(y) << ',';
      if (x > 0.0 && y > 0.0) rob << fmt(robustness_score(x, y));
      rob << '\n';
    }
  }
  write_file(files.robustness, rob.str());

  // Rankings only use rows where every method ran.
  const auto ranked = rank_methods(full_rows, methods, full_acc);
  std::ostringstream rk;
  rk << "method,mean_rank,sd_rank,experiments\n";
  for (const auto& s : ranked.rank_stats) {
    rk << s.method << ',' << fmt(s.mean) << ',' << fmt(s.sd) << ',' << ranked.experiments.size() << '\n';
  }
  write_file(files.rankings, rk.str());

  std::ostringstream tr;
  tr << "variant,num_malicious";
  for (const auto& m : methods) tr << ',' << m;
  tr << '\n';
  for (const auto& [key, by_method] : trends) {
    tr << key.first << ',' << key.second;
    for (const auto& m : methods) {
      tr << ',';
      auto it = by_method.find(m);
      if (it != by_method.end()) tr << fmt(it->second.value());
    }
    tr << '\n';
  }
  write_file(files.trends, tr.str());
  return files;
}

}  // namespace sabfl
