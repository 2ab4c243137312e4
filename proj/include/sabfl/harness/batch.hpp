#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "sabfl/protocol/config.hpp"

namespace sabfl {

struct MatrixCell {
  std::string label;
  RunConfig cfg;
};

// A list of labelled run configurations, each repeated with seeds
// cfg.seed, cfg.seed + 1, ...
//
// File format: "key = value" lines. A leading "repeats = N" (default 5)
// applies to the whole matrix. Keys under [base] apply to every cell;
// each [cell NAME] section overrides them. A cell that sets
// "aggregators = a, b, ..." expands into one cell per aggregator, labelled
// NAME-a, NAME-b, ...
struct ExperimentMatrix {
  std::vector<MatrixCell> cells;
  std::size_t repeats = 5;

  // Labels unique and path-safe, configs valid, repeats > 0.
  void validate() const;
};

// Relative data paths inside cells resolve against base_dir.
ExperimentMatrix parse_matrix(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentMatrix load_matrix(const std::filesystem::path& path);

struct BatchRun {
  std::string label;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  double final_accuracy = 0.0;
  std::string chain_tip;
  std::optional<std::string> fault;
};

struct BatchOptions {
  std::size_t jobs = 1;
  // Replaces every cell's base seed.
  std::optional<std::uint64_t> seed;
  bool write_report = true;
};

// Runs every (cell, repeat) pair into out_dir/<label>/rep<k>/ and, unless
// disabled, writes the report tables into out_dir. Results come back in
// matrix order regardless of job scheduling.
std::vector<BatchRun> run_batch(const ExperimentMatrix& matrix, const std::filesystem::path& out_dir,
                                const BatchOptions& options = {});

}  // namespace sabfl
