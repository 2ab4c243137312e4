#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace sabfl {

// Window rule: for round i >= W, k_i = min/max of the last W accuracies
// (1 when the max is 0). Training stops at the first round T whose k_i is
// strictly below k_{i-1}; the reported accuracy is max a_1..a_T.
struct StoppingState {
  std::vector<double> accuracies;         // a_1, a_2, ...
  std::vector<double> k_values;           // k_W, k_{W+1}, ...
  std::optional<std::size_t> stopped_at;  // T, 1-based
  std::optional<double> final_accuracy;

  bool stopped() const { return stopped_at.has_value(); }
  // Best accuracy so far; used when a run ends without the rule firing.
  double best_accuracy() const;
  // k_i for 1-based round i, if defined.
  std::optional<double> k_at(std::size_t round, std::size_t window) const;
};

// Throws ConfigError if already stopped or window < 2.
StoppingState update_stopping(StoppingState s, double new_accuracy, std::size_t window);

}  // namespace sabfl
