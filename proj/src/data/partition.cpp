#include "sabfl/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "sabfl/util/error.hpp"
#include "sabfl/util/seed.hpp"

namespace sabfl {
namespace {

std::vector<double> dirichlet(double lambda, std::size_t n, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(lambda, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = std::max(g(rng), 1e-300);
  const double s = std::accumulate(x.begin(), x.end(), 0.0);
  for (auto& v : x) v /= s;
  return x;
}

// Rescales rows and columns of `t` (rows x cols) in turn until both
// marginals match.
void fit_marginals(std::vector<double>& t, std::size_t rows, std::size_t cols,
                   const std::vector<double>& row_sums, const std::vector<double>& col_sums) {
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (std::size_t k = 0; k < cols; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += t[i * cols + k];
      if (s > 0.0) {
        for (std::size_t i = 0; i < rows; ++i) t[i * cols + k] *= col_sums[k] / s;
      }
    }
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < cols; ++k) s += t[i * cols + k];
      worst = std::max(worst, std::abs(s - row_sums[i]));
      if (s > 0.0) {
        for (std::size_t k = 0; k < cols; ++k) t[i * cols + k] *= row_sums[i] / s;
      }
    }
    if (worst < 1e-9) break;
  }
}

}  // namespace

std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t total) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::size_t> out(weights.size(), 0);
  if (weights.empty() || !(wsum > 0.0)) {
    for (std::size_t i = 0; i < total && !out.empty(); ++i) ++out[i % out.size()];
    return out;
  }
  std::vector<double> frac(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] / wsum * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(exact));
    frac[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  // Floating error can overshoot by a unit.
  while (assigned > total) {
    auto it = std::max_element(out.begin(), out.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; assigned < total; r = (r + 1) % order.size()) {
    ++out[order[r]];
    ++assigned;
  }
  return out;
}

std::vector<DataShard> partition(const Dataset& ds, const PartitionConfig& cfg) {
  const std::size_t n = ds.size(), parts = cfg.num_participants, classes = ds.num_classes;
  if (!(cfg.lambda > 0.0)) throw ConfigError("partition: lambda must be > 0");
  if (parts < 3) throw ConfigError("partition: need at least 3 participants");
  if (n == 0) throw ConfigError("partition: empty dataset");
  if (parts * cfg.min_shard_size > n) {
    throw ConfigError("partition: min_shard_size " + std::to_string(cfg.min_shard_size) + " x " +
                      std::to_string(parts) + " participants exceeds " + std::to_string(n) + " rows");
  }

  std::mt19937_64 rng(derive_seed(cfg.seed, {0x9A27}));

  std::vector<std::size_t> sizes = apportion(dirichlet(cfg.lambda, parts, rng), n - parts * cfg.min_shard_size);
  for (auto& s : sizes) s += cfg.min_shard_size;

  std::vector<std::vector<std::size_t>> pools(classes);
  for (std::size_t i = 0; i < n; ++i) pools[ds.labels[i]].push_back(i);
  for (auto& p : pools) std::shuffle(p.begin(), p.end(), rng);

  std::vector<double> target(parts * classes);
  for (std::size_t i = 0; i < parts; ++i) {
    const auto mix = dirichlet(cfg.lambda, classes, rng);
    for (std::size_t k = 0; k < classes; ++k) target[i * classes + k] = std::max(mix[k], 1e-12) * sizes[i];
  }
  std::vector<double> row_sums(sizes.begin(), sizes.end()), col_sums(classes);
  for (std::size_t k = 0; k < classes; ++k) col_sums[k] = static_cast<double>(pools[k].size());
  fit_marginals(target, parts, classes, row_sums, col_sums);

  std::vector<std::size_t> remaining(classes);
  for (std::size_t k = 0; k < classes; ++k) remaining[k] = pools[k].size();

  std::vector<DataShard> shards(parts);
  for (std::size_t i = 0; i < parts; ++i) {
    std::vector<std::size_t> counts;
    if (i + 1 == parts) {
      counts = remaining;
    } else {
      std::vector<double> row(target.begin() + i * classes, target.begin() + (i + 1) * classes);
      counts = apportion(row, sizes[i]);
      std::size_t deficit = 0;
      for (std::size_t k = 0; k < classes; ++k) {
        if (counts[k] > remaining[k]) {
          deficit += counts[k] - remaining[k];
          counts[k] = remaining[k];
        }
      }
      while (deficit > 0) {
        std::size_t best = classes;
        for (std::size_t k = 0; k < classes; ++k) {
          if (counts[k] < remaining[k] &&
              (best == classes || remaining[k] - counts[k] > remaining[best] - counts[best])) {
            best = k;
          }
        }
        ++counts[best];
        --deficit;
      }
    }
    auto& shard = shards[i];
    shard.owner = static_cast<ParticipantId>(i);
    for (std::size_t k = 0; k < classes; ++k) {
      for (std::size_t c = 0; c < counts[k]; ++c) shard.indices.push_back(pools[k][--remaining[k]]);
    }
    std::sort(shard.indices.begin(), shard.indices.end());
  }
  return shards;
}

}  // namespace sabfl
