#pragma once

#include <cstddef>
#include <cstdint>

#include "sabfl/core/model.hpp"
#include "sabfl/data/dataset.hpp"

namespace sabfl {

struct SgdConfig {
  std::size_t epochs = 1;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
};

// Batch size actually used on a shard of `shard_size` rows.
inline std::size_t effective_batch_size(std::size_t batch_size, std::size_t shard_size) {
  return batch_size > shard_size ? shard_size : batch_size;
}

// Minibatch SGD for `epochs` passes over the shard, reshuffled each epoch
// from `seed`. The final batch of an epoch may be short. Rows inside a batch
// are reduced in ascending shard position, so one full-batch step equals
// w0 - lr * eval_gradient(w0, whole shard) bit for bit.
ParamVector local_sgd(const ModelSpec& spec, const ParamVector& w0, const ShardView& shard,
                      const SgdConfig& cfg, std::uint64_t seed);

}  // namespace sabfl
