#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sabfl {

// min/max of the two accuracies, so the score never exceeds 1.
double robustness_score(double acc_lh, double acc_hh);

struct MethodRank {
  std::string method;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

// Rows are experiments, columns are methods. Ranks use competition order:
// 1 is the best accuracy, ties share the lower number and the next rank
// skips (e.g. 1, 2, 2, 4).
struct ComparisonReport {
  std::vector<std::string> experiments;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> accuracy;
  std::vector<std::vector<std::size_t>> ranks;
  std::vector<MethodRank> rank_stats;
};

ComparisonReport rank_methods(std::vector<std::string> experiments, std::vector<std::string> methods,
                              std::vector<std::vector<double>> accuracy);

// One summary.json as read back by the report stage.
struct RunSummary {
  std::string experiment;
  std::string variant;
  std::string aggregator;
  std::size_t num_malicious = 0;
  double partition_lambda = 0.0;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  std::string chain_tip;
  std::optional<std::string> fault;
};

RunSummary read_summary(const std::filesystem::path& path);

// Every summary.json below `dir`, in sorted path order.
std::vector<RunSummary> collect_summaries(const std::filesystem::path& dir);

struct ReportFiles {
  std::filesystem::path comparison, robustness, rankings, trends;
};

// Reads run summaries under results_dir and writes comparison.csv,
// robustness.csv, rankings.csv and trends.csv into out_dir (defaults to
// results_dir). Throws ConfigError when no summaries are found.
ReportFiles emit_report(const std::filesystem::path& results_dir,
                        const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace sabfl
