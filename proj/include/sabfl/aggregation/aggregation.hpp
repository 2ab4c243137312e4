#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "sabfl/core/param_vector.hpp"
#include "sabfl/util/types.hpp"

namespace sabfl {

// V x K matrix: entry (j, i) is validator j's loss (or accuracy) for worker
// i's weights. Ids are kept in ascending order.
struct LossMatrix {
  std::vector<ParticipantId> validator_ids;
  std::vector<ParticipantId> worker_ids;
  std::vector<double> entries;  // row-major, V rows

  LossMatrix() = default;
  LossMatrix(std::vector<ParticipantId> validators, std::vector<ParticipantId> workers);

  std::size_t num_validators() const { return validator_ids.size(); }
  std::size_t num_workers() const { return worker_ids.size(); }
  double& at(std::size_t j, std::size_t i) { return entries[j * worker_ids.size() + i]; }
  double at(std::size_t j, std::size_t i) const { return entries[j * worker_ids.size() + i]; }
  std::span<const double> row(std::size_t j) const {
    return {entries.data() + j * worker_ids.size(), worker_ids.size()};
  }
  // Throws DimensionError / ConfigError when the invariants fail.
  void check() const;
  friend bool operator==(const LossMatrix&, const LossMatrix&) = default;
};

struct ScoreVector {
  std::vector<double> scores;
  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

// Column means, validators summed in ascending order.
std::vector<double> mean_loss(const LossMatrix& losses);

// p_i = exp(-F_i) / sum_s exp(-F_s), shifted by the minimum loss first.
ScoreVector softmax_scores(std::span<const double> losses);

struct Aggregate {
  ParamVector weights;
  ScoreVector scores;
};

// Global weight = sum_i p_i w_i with p = softmax_scores(mean_loss(losses)).
Aggregate aggregate_softmax(std::span<const ParamVector> weights, const LossMatrix& losses);

// Same, but scored by mean validator accuracy: higher accuracy, higher score.
Aggregate aggregate_softmax_accuracy(std::span<const ParamVector> weights, const LossMatrix& accuracies);

// Sample-size weighted mean (FedAvg).
ParamVector aggregate_vanilla(std::span<const ParamVector> weights, std::span<const std::size_t> sample_sizes);

ParamVector aggregate_simple(std::span<const ParamVector> weights);

// Coordinate-wise median; even counts take the midpoint of the middle pair.
ParamVector aggregate_median(std::span<const ParamVector> weights);

struct KrumResult {
  ParamVector weights;
  std::size_t selected = 0;
};

// Krum score of candidate i: sum of squared distances to its K - f - 2
// nearest other candidates.
std::vector<double> krum_scores(std::span<const ParamVector> weights, std::size_t byzantine);

// Picks the lowest Krum score, ties to the lowest index. Needs K >= f + 3.
KrumResult aggregate_krum(std::span<const ParamVector> weights, std::size_t byzantine);

// sum_i coeff_i * w_i, reduced in index order and clamped into the
// per-coordinate range of the inputs.
ParamVector weighted_average(std::span<const ParamVector> weights, std::span<const double> coeffs);

}  // namespace sabfl
