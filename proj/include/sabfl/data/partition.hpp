#pragma once

#include <cstdint>
#include <vector>

#include "sabfl/data/dataset.hpp"

namespace sabfl {

struct PartitionConfig {
  double lambda = 1.0;  // Dirichlet concentration; smaller = more heterogeneous
  std::size_t num_participants = 20;
  std::uint64_t seed = 0;
  std::size_t min_shard_size = 1;
};

// Size- and label-skewed split of the whole training set. Shard sizes are
// min_shard_size plus a Dirichlet(lambda)-weighted share of the remaining
// rows; each participant's class mix targets its own Dirichlet(lambda)
// draw, fitted to the available class counts. Every row goes to exactly
// one shard and shard i is owned by participant i.
std::vector<DataShard> partition(const Dataset& ds, const PartitionConfig& cfg);

// Splits `total` into integer parts proportional to `weights` (largest
// remainder, ties to the lower index).
std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total);

}  // namespace sabfl
