#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sabfl/core/model.hpp"
#include "sabfl/core/param_vector.hpp"

namespace sabfl {

// Constants and schedules for the instrumented softmax algorithm. The
// learning-rate and batch schedules are indexed by round r >= 1.
struct TheoryConfig {
  double L = 1.0;
  double delta = 0.01;
  double M = 0.1;
  double epsilon = 1.0;
  double epsilon_tilde = 1.0;
  std::function<double(std::size_t)> lr;
  std::function<std::size_t(std::size_t)> batch;
  std::size_t epochs = 1;
  std::size_t num_workers = 5;
  std::size_t num_validators = 3;
  std::size_t rounds = 1000;
  // Starting point; drawn from the seed when unset.
  std::optional<ParamVector> initial_weight;

  // alpha_r = 1 / (ceil(2L) + r), B_r = 1, E = 1, delta = 0.01.
  static TheoryConfig example(double L, std::size_t rounds);

  // Throws ConfigError if any round violates the step-size conditions
  // or the schedule is not non-increasing.
  void validate() const;
};

struct ConvergenceTrace {
  std::vector<double> alpha;          // alpha_r
  std::vector<double> grad_norm_sq;   // ||grad F(w~^{r-1})||^2
  std::vector<double> cum_lhs;        // running sum of alpha_r * grad_norm_sq
  std::vector<double> rhs;            // bound evaluated at R = r
  double f0 = 0.0;
  double fstar = 0.0;

  std::size_t rounds() const { return alpha.size(); }
  // cum_lhs[R-1] / sum_{r<=R} alpha_r.
  double normalized(std::size_t R) const;
  bool all_finite_nonnegative() const;
};

// F(w) + u with |u| < tolerance, u uniform from the seed. If the noisy value
// cannot be represented inside the band (tiny tolerance) F(w) is returned.
double oracle_validator_loss(const std::function<double(const ParamVector&)>& true_F, const ParamVector& w,
                             double tolerance, std::uint64_t seed);

// max_i |F~_j(w_i)| + eps~.
double validator_scale(std::span<const double> coarse_losses, double epsilon_tilde);

// Per-round precision eps / (2^r K^{5/2} m). May underflow to zero.
double validator_tolerance(double epsilon, std::size_t round, std::size_t num_workers, double m);

ConvergenceTrace run_algorithm2(const ModelSpec& spec, const TheoryConfig& cfg, std::uint64_t seed);

double theorem1_rhs(const TheoryConfig& cfg, std::size_t R, double F0, double Fstar);

// Categorical draw over rounds with probability proportional to alpha_r.
// Returns a 1-based round index.
std::size_t sample_round_index(std::span<const double> alphas, std::mt19937_64& rng);

struct SoftmaxMeanReport {
  double mean = 0.0;
  double softmax_weighted = 0.0;      // sum softmax(x)_i x_i
  double neg_softmax_weighted = 0.0;  // sum softmax(-x)_i x_i
  double upper_margin = 0.0;          // softmax_weighted - mean, >= 0
  double lower_margin = 0.0;          // mean - neg_softmax_weighted, >= 0
  bool holds(double slack) const { return upper_margin >= -slack && lower_margin >= -slack; }
};

SoftmaxMeanReport check_softmax_mean_inequality(std::span<const double> x);

// Element-wise mean over seeds; traces must share a length.
ConvergenceTrace average_traces(std::span<const ConvergenceTrace> traces);

struct ConvergenceCheck {
  ConvergenceTrace mean;
  std::vector<std::size_t> checkpoints;
  bool bound_holds = true;       // mean cum_lhs <= rhs at every checkpoint
  double decay_ratio = 0.0;      // normalized(last) / normalized(first)
  bool decay_holds = false;      // decay_ratio < decay_threshold
};

ConvergenceCheck run_convergence_check(const ModelSpec& spec, const TheoryConfig& cfg,
                                       std::span<const std::uint64_t> seeds, std::vector<std::size_t> checkpoints,
                                       double decay_threshold, std::size_t threads);

// Columns r, alpha, grad_norm_sq, cum_lhs, rhs.
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);

}  // namespace sabfl
