#include "sabfl/core/sgd.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "sabfl/util/error.hpp"

namespace sabfl {

ParamVector local_sgd(const ModelSpec& spec, const ParamVector& w0, const ShardView& shard,
                      const SgdConfig& cfg, std::uint64_t seed) {
  if (cfg.epochs < 1) throw ConfigError("local_sgd: epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("local_sgd: learning rate must be > 0");
  if (cfg.batch_size < 1) throw ConfigError("local_sgd: batch size must be >= 1");
  if (shard.empty()) throw ConfigError("local_sgd: empty shard");

  const std::size_t n = shard.size();
  const std::size_t batch = effective_batch_size(cfg.batch_size, n);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::vector<std::size_t> picked;
  ParamVector w = w0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      picked.assign(order.begin() + start, order.begin() + stop);
      std::sort(picked.begin(), picked.end());
      const ParamVector g = eval_gradient(spec, w, shard.gather(picked));
      for (std::size_t i = 0; i < w.size(); ++i) w.values[i] -= cfg.learning_rate * g.values[i];
    }
  }
  return w;
}

}  // namespace sabfl
