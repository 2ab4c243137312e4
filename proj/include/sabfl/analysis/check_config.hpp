#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <vector>

#include "sabfl/analysis/theory.hpp"

namespace sabfl {

// Settings for the convergence-check subcommand. The objective is
// 1/2 ||w - w*||^2 in `dim` dimensions with w* = 0.
//
// Keys: L, delta, M, epsilon, epsilon_tilde, epochs, workers, validators,
// rounds, dim, seed, seeds (count), lr_schedule (example | constant), lr,
// batch_size, initial_distance, checkpoints (comma list), decay_threshold,
// threads.
struct ConvergenceCheckConfig {
  TheoryConfig theory = TheoryConfig::example(1.0, 1000);
  std::size_t dim = 10;
  std::uint64_t seed = 0;
  std::size_t num_seeds = 20;
  // When positive, every seed starts at distance initial_distance from w*
  // along the all-ones direction; otherwise the start is drawn per seed.
  double initial_distance = 0.0;
  std::vector<std::size_t> checkpoints{10, 100, 1000};
  double decay_threshold = 0.1;
  std::size_t threads = 1;

  ModelSpec spec() const;
  std::vector<std::uint64_t> seeds() const;
};

ConvergenceCheckConfig parse_convergence_config(std::istream& in);
ConvergenceCheckConfig load_convergence_config(const std::filesystem::path& path);

}  // namespace sabfl
