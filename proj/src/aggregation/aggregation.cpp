#include "sabfl/aggregation/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

void check_weights(std::span<const ParamVector> weights) {
  if (weights.empty()) throw ConfigError("aggregation needs at least one weight vector");
  for (const auto& w : weights) {
    if (w.shape != weights[0].shape || w.size() != weights[0].size()) {
      throw DimensionError("aggregation: weight vectors disagree in shape");
    }
  }
}

}  // namespace

LossMatrix::LossMatrix(std::vector<ParticipantId> validators, std::vector<ParticipantId> workers)
    : validator_ids(std::move(validators)),
      worker_ids(std::move(workers)),
      entries(validator_ids.size() * worker_ids.size(), 0.0) {}

void LossMatrix::check() const {
  if (validator_ids.empty() || worker_ids.empty()) throw DimensionError("loss matrix needs V >= 1 and K >= 1");
  if (entries.size() != validator_ids.size() * worker_ids.size()) {
    throw DimensionError("loss matrix entry count does not match V x K");
  }
  if (!std::is_sorted(validator_ids.begin(), validator_ids.end()) ||
      !std::is_sorted(worker_ids.begin(), worker_ids.end())) {
    throw ConfigError("loss matrix ids must be in ascending order");
  }
  for (double e : entries) {
    if (!std::isfinite(e)) throw ConfigError("loss matrix holds a non-finite entry");
  }
}

std::vector<double> mean_loss(const LossMatrix& losses) {
  losses.check();
  const std::size_t v = losses.num_validators(), k = losses.num_workers();
  std::vector<double> out(k, 0.0);
  for (std::size_t j = 0; j < v; ++j) {
    for (std::size_t i = 0; i < k; ++i) out[i] += losses.at(j, i);
  }
  for (auto& x : out) x /= static_cast<double>(v);
  return out;
}

ScoreVector softmax_scores(std::span<const double> losses) {
  if (losses.empty()) throw ConfigError("softmax_scores: empty loss vector");
  for (double l : losses) {
    if (!std::isfinite(l)) throw ConfigError("softmax_scores: non-finite loss");
  }
  const double lowest = *std::min_element(losses.begin(), losses.end());
  ScoreVector out;
  out.scores.resize(losses.size());
  double total = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    out.scores[i] = std::exp(-(losses[i] - lowest));
    total += out.scores[i];
  }
  for (auto& p : out.scores) p /= total;
  return out;
}

ParamVector weighted_average(std::span<const ParamVector> weights, std::span<const double> coeffs) {
  check_weights(weights);
  if (coeffs.size() != weights.size()) throw DimensionError("weighted_average: coefficient count mismatch");
  ParamVector out = ParamVector::zeros(weights[0].shape);
  out.values.assign(weights[0].size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    for (std::size_t c = 0; c < out.size(); ++c) out.values[c] += coeffs[i] * weights[i].values[c];
  }
  // The exact convex combination lies in [min, max]; rounding may not.
  for (std::size_t c = 0; c < out.size(); ++c) {
    double lo = weights[0].values[c], hi = lo;
    for (const auto& w : weights) {
      lo = std::min(lo, w.values[c]);
      hi = std::max(hi, w.values[c]);
    }
    out.values[c] = std::clamp(out.values[c], lo, hi);
  }
  return out;
}

Aggregate aggregate_softmax(std::span<const ParamVector> weights, const LossMatrix& losses) {
  check_weights(weights);
  if (losses.num_workers() != weights.size()) throw DimensionError("aggregate_softmax: K mismatch");
  Aggregate out;
  out.scores = softmax_scores(mean_loss(losses));
  out.weights = weighted_average(weights, out.scores.scores);
  return out;
}

Aggregate aggregate_softmax_accuracy(std::span<const ParamVector> weights, const LossMatrix& accuracies) {
  check_weights(weights);
  if (accuracies.num_workers() != weights.size()) throw DimensionError("aggregate_softmax_accuracy: K mismatch");
  auto mean = mean_loss(accuracies);
  for (auto& a : mean) a = -a;
  Aggregate out;
  out.scores = softmax_scores(mean);
  out.weights = weighted_average(weights, out.scores.scores);
  return out;
}

ParamVector aggregate_vanilla(std::span<const ParamVector> weights, std::span<const std::size_t> sample_sizes) {
  check_weights(weights);
  if (sample_sizes.size() != weights.size()) throw DimensionError("aggregate_vanilla: size count mismatch");
  double total = 0.0;
  for (auto n : sample_sizes) total += static_cast<double>(n);
  if (!(total > 0.0)) throw ConfigError("aggregate_vanilla: total sample size is zero");
  std::vector<double> coeffs(weights.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = static_cast<double>(sample_sizes[i]) / total;
  return weighted_average(weights, coeffs);
}

ParamVector aggregate_simple(std::span<const ParamVector> weights) {
  check_weights(weights);
  ParamVector out = ParamVector::zeros(weights[0].shape);
  out.values.assign(weights[0].size(), 0.0);
  for (const auto& w : weights) {
    for (std::size_t c = 0; c < out.size(); ++c) out.values[c] += w.values[c];
  }
  for (auto& v : out.values) v /= static_cast<double>(weights.size());
  return out;
}

ParamVector aggregate_median(std::span<const ParamVector> weights) {
  check_weights(weights);
  const std::size_t k = weights.size();
  ParamVector out = ParamVector::zeros(weights[0].shape);
  out.values.assign(weights[0].size(), 0.0);
  std::vector<double> column(k);
  for (std::size_t c = 0; c < out.size(); ++c) {
    for (std::size_t i = 0; i < k; ++i) column[i] = weights[i].values[c];
    std::sort(column.begin(), column.end());
    out.values[c] = k % 2 ? column[k / 2] : 0.5 * (column[k / 2 - 1] + column[k / 2]);
  }
  return out;
}

std::vector<double> krum_scores(std::span<const ParamVector> weights, std::size_t byzantine) {
  check_weights(weights);
  const std::size_t k = weights.size();
  if (k < byzantine + 3) {
    throw ConfigError("krum needs K >= f + 3 (K=" + std::to_string(k) + ", f=" + std::to_string(byzantine) + ")");
  }
  const std::size_t neighbours = k - byzantine - 2;
  std::vector<double> dist(k * k, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      dist[a * k + b] = dist[b * k + a] = squared_distance(weights[a].values, weights[b].values);
    }
  }
  std::vector<double> scores(k), row;
  for (std::size_t a = 0; a < k; ++a) {
    row.clear();
    for (std::size_t b = 0; b < k; ++b) {
      if (b != a) row.push_back(dist[a * k + b]);
    }
    std::sort(row.begin(), row.end());
    double s = 0.0;
    for (std::size_t n = 0; n < neighbours; ++n) s += row[n];
    scores[a] = s;
  }
  return scores;
}

KrumResult aggregate_krum(std::span<const ParamVector> weights, std::size_t byzantine) {
  const auto scores = krum_scores(weights, byzantine);
  KrumResult out;
  out.selected = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
  out.weights = weights[out.selected];
  return out;
}

}  // namespace sabfl
