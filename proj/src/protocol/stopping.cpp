#include "sabfl/protocol/stopping.hpp"

#include <algorithm>

#include "sabfl/util/error.hpp"

namespace sabfl {

double StoppingState::best_accuracy() const {
  return accuracies.empty() ? 0.0 : *std::max_element(accuracies.begin(), accuracies.end());
}

std::optional<double> StoppingState::k_at(std::size_t round, std::size_t window) const {
  if (round < window || round - window >= k_values.size()) return std::nullopt;
  return k_values[round - window];
}

StoppingState update_stopping(StoppingState s, double new_accuracy, std::size_t window) {
  if (s.stopped()) throw ConfigError("update_stopping called after the rule fired");
  if (window < 2) throw ConfigError("stopping window must be >= 2");
  s.accuracies.push_back(new_accuracy);
  const std::size_t i = s.accuracies.size();
  if (i < window) return s;

  const auto first = s.accuracies.end() - static_cast<std::ptrdiff_t>(window);
  const auto [lo, hi] = std::minmax_element(first, s.accuracies.end());
  const double k = *hi == 0.0 ? 1.0 : *lo / *hi;
  s.k_values.push_back(k);
  if (s.k_values.size() >= 2 && k < s.k_values[s.k_values.size() - 2]) {
    s.stopped_at = i;
    s.final_accuracy = s.best_accuracy();
  }
  return s;
}

}  // namespace sabfl
