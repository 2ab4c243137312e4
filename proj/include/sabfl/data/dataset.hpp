#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sabfl/core/minibatch.hpp"
#include "sabfl/util/types.hpp"

namespace sabfl {

enum class Split { kTrain, kTest };

struct Dataset {
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // row-major, size() * input_dim
  std::vector<int> labels;
  Split split = Split::kTrain;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
  // Rows aligned, labels in range, and (train split) every class present.
  void check() const;
  Minibatch to_minibatch() const;
};

enum class ShardUse { kTraining, kValidation };

// A participant's rows of the shared training set.
struct DataShard {
  ParticipantId owner = 0;
  std::vector<std::size_t> indices;
  ShardUse use = ShardUse::kTraining;
};

// Read-only window onto a shard. An optional label map relabels rows on the
// fly; the dataset itself is never modified.
class ShardView {
 public:
  ShardView(const Dataset& data, std::span<const std::size_t> indices);
  ShardView(const Dataset& data, const DataShard& shard)
      : ShardView(data, std::span<const std::size_t>(shard.indices)) {}

  ShardView with_label_map(std::vector<int> label_map) const;

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  const Dataset& dataset() const { return *data_; }
  std::size_t row_index(std::size_t pos) const { return indices_[pos]; }
  int label(std::size_t pos) const;
  const std::vector<int>& label_map() const { return label_map_; }

  // Gathers the given shard positions, in the order supplied.
  Minibatch gather(std::span<const std::size_t> positions) const;
  Minibatch all() const;

 private:
  const Dataset* data_;
  std::span<const std::size_t> indices_;
  std::vector<int> label_map_;  // empty = identity
};

}  // namespace sabfl
