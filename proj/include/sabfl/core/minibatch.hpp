#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sabfl {

// Row-major feature block with one class label per row.
struct Minibatch {
  std::size_t input_dim = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * input_dim, input_dim};
  }
};

}  // namespace sabfl
