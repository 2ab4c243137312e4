#include "sabfl/data/dataset.hpp"

#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {

void Dataset::check() const {
  if (features.size() != labels.size() * input_dim) {
    throw DimensionError("dataset features/labels misaligned");
  }
  std::vector<bool> seen(num_classes, false);
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw IngestionError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(num_classes) + ")");
    }
    seen[y] = true;
  }
  if (split == Split::kTrain) {
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (!seen[c]) throw IngestionError("train split has no sample of class " + std::to_string(c));
    }
  }
}

Minibatch Dataset::to_minibatch() const {
  return Minibatch{input_dim, features, labels};
}

ShardView::ShardView(const Dataset& data, std::span<const std::size_t> indices)
    : data_(&data), indices_(indices) {
  for (auto i : indices_) {
    if (i >= data.size()) throw DimensionError("shard index out of dataset bounds");
  }
}

ShardView ShardView::with_label_map(std::vector<int> label_map) const {
  ShardView v = *this;
  v.label_map_ = std::move(label_map);
  return v;
}

int ShardView::label(std::size_t pos) const {
  const int y = data_->labels[indices_[pos]];
  if (label_map_.empty()) return y;
  if (y < 0 || static_cast<std::size_t>(y) >= label_map_.size()) {
    throw ConfigError("label " + std::to_string(y) + " outside label map domain");
  }
  return label_map_[y];
}

Minibatch ShardView::gather(std::span<const std::size_t> positions) const {
  Minibatch b;
  b.input_dim = data_->input_dim;
  b.features.reserve(positions.size() * b.input_dim);
  b.labels.reserve(positions.size());
  for (auto pos : positions) {
    auto r = data_->row(indices_[pos]);
    b.features.insert(b.features.end(), r.begin(), r.end());
    b.labels.push_back(label(pos));
  }
  return b;
}

Minibatch ShardView::all() const {
  std::vector<std::size_t> pos(size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = i;
  return gather(pos);
}

}  // namespace sabfl
