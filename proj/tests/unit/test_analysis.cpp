#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sabfl/analysis/check_config.hpp"
#include "sabfl/analysis/theory.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

ModelSpec centred(std::size_t d) { return ModelSpec::quadratic(std::vector<double>(d, 0.0)); }

ParamVector filled(const ModelSpec& spec, double v) {
  ParamVector w = ParamVector::zeros(spec.shape());
  std::fill(w.values.begin(), w.values.end(), v);
  return w;
}

// Exact softmax-weighted mean in 50-digit arithmetic.
double weighted_oracle(const std::vector<double>& x, double sign) {
  std::vector<double> flipped;
  for (double v : x) flipped.push_back(-sign * v);
  const auto p = oracle::softmax_neg(flipped);
  oracle::BigFloat s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += oracle::BigFloat(p[i]) * x[i];
  return static_cast<double>(s);
}

TEST(TheoryConfig, ExampleScheduleAndChecks) {
  const auto cfg = TheoryConfig::example(1.0, 50);
  EXPECT_DOUBLE_EQ(cfg.lr(1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(cfg.lr(10), 1.0 / 12.0);
  EXPECT_EQ(cfg.batch(7), 1u);
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(TheoryConfig::example(1.3, 5).lr(1), 1.0 / 4.0);

  auto rising = cfg;
  rising.lr = [](std::size_t r) { return 0.01 * static_cast<double>(r); };
  EXPECT_THROW(rising.validate(), ConfigError);
  auto big = cfg;
  big.lr = [](std::size_t) { return 1.2; };
  EXPECT_THROW(big.validate(), ConfigError);
  auto bad_delta = cfg;
  bad_delta.delta = 0.95;  // needs 1 - delta >= (L a)^2 = 1/9
  EXPECT_THROW(bad_delta.validate(), ConfigError);
}

TEST(Oracle, NoiseStaysInsideTheBand) {
  const auto spec = centred(3);
  const auto w = filled(spec, 0.4);
  const std::function<double(const ParamVector&)> F = [&](const ParamVector& v) {
    return eval_loss(spec, v, Minibatch{});
  };
  const double f = F(w);
  bool moved = false;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    const double out = oracle_validator_loss(F, w, 1e-3, s);
    EXPECT_LT(std::fabs(out - f), 1e-3);
    moved = moved || out != f;
  }
  EXPECT_TRUE(moved);
  EXPECT_EQ(oracle_validator_loss(F, w, 0.0, 1), f);
  EXPECT_EQ(oracle_validator_loss(F, w, 1e-300, 1), f);
  EXPECT_THROW(oracle_validator_loss(F, w, -1.0, 1), ConfigError);
  EXPECT_THROW(oracle_validator_loss(F, w, std::nan(""), 1), ConfigError);
}

TEST(Oracle, ScaleAndToleranceByHand) {
  const std::vector<double> coarse{0.3, -0.5};
  EXPECT_DOUBLE_EQ(validator_scale(coarse, 0.2), 0.7);
  // eps / (2^r K^{5/2} m) with K = 4: 4^{5/2} = 32.
  EXPECT_DOUBLE_EQ(validator_tolerance(1.0, 3, 4, 2.0), 1.0 / (8.0 * 32.0 * 2.0));
  EXPECT_EQ(validator_tolerance(1.0, 5000, 4, 2.0), 0.0);
}

TEST(Rhs, ClosedFormCases) {
  auto cfg = TheoryConfig::example(1.0, 3);
  cfg.M = 0.0;
  EXPECT_DOUBLE_EQ(theorem1_rhs(cfg, 3, 2.0, 0.5), 2.0 * 1.5 / 0.01 + 2.0 / 0.01);
  // E = 1: bracket is 6, so each round adds L a^2 M / (B delta).
  cfg.M = 0.1;
  const double noise = 0.1 / 0.01 * (1.0 / 9 + 1.0 / 16 + 1.0 / 25);
  EXPECT_NEAR(theorem1_rhs(cfg, 3, 2.0, 0.0), 400.0 + 200.0 + noise, 1e-10);
  // E = 3, constant a = 0.1, B = 2: bracket 6E + L(2E-1)(E-1)a = 18 + 1.
  cfg.epochs = 3;
  cfg.lr = [](std::size_t) { return 0.1; };
  cfg.batch = [](std::size_t) { return std::size_t{2}; };
  const double denom = 2.01;
  const double per_round = 3 * 0.01 * 0.1 * 19.0 / (6 * 2 * denom);
  EXPECT_NEAR(theorem1_rhs(cfg, 2, 1.0, 0.0), 2.0 / denom + 2 * per_round + 2.0 / denom, 1e-12);
}

TEST(Algorithm2, NoiselessSingleWorkerIsGradientDescent) {
  const auto spec = centred(4);
  auto cfg = TheoryConfig::example(1.0, 30);
  cfg.M = 0.0;
  cfg.num_workers = 1;
  cfg.initial_weight = filled(spec, 0.5);
  const auto t = run_algorithm2(spec, cfg, 3);
  ASSERT_EQ(t.rounds(), 30u);
  double g2 = 4 * 0.25;
  for (std::size_t r = 0; r < 30; ++r) {
    EXPECT_NEAR(t.grad_norm_sq[r], g2, 1e-14 * std::max(1.0, g2)) << "round " << r + 1;
    const double a = 1.0 / (3.0 + static_cast<double>(r));
    g2 *= (1 - a) * (1 - a);
  }
  EXPECT_DOUBLE_EQ(t.f0, 0.5);
}

TEST(Algorithm2, DeterministicAndBounded) {
  const auto spec = centred(10);
  auto cfg = TheoryConfig::example(1.0, 200);
  const auto a = run_algorithm2(spec, cfg, 5);
  const auto b = run_algorithm2(spec, cfg, 5);
  EXPECT_EQ(a.cum_lhs, b.cum_lhs);
  EXPECT_NE(run_algorithm2(spec, cfg, 6).cum_lhs, a.cum_lhs);
  EXPECT_TRUE(a.all_finite_nonnegative());
  for (std::size_t r = 0; r < a.rounds(); ++r) {
    EXPECT_LE(a.cum_lhs[r], a.rhs[r]);
    EXPECT_NEAR(a.rhs[r], theorem1_rhs(cfg, r + 1, a.f0, a.fstar), 1e-9 * a.rhs[r]);
  }
  EXPECT_THROW(run_algorithm2(ModelSpec::logistic(2, 2), cfg, 0), ConfigError);
}

// The R=500 value is roughly 0.135 |w0|^2 plus 0.007 M, so the start and
// the noise both have to be small for it to clear 1e-3.
TEST(Algorithm2, NormalizedAverageFallsBelowOneThousandth) {
  const auto spec = centred(10);
  auto cfg = TheoryConfig::example(1.0, 500);
  cfg.M = 0.01;
  cfg.initial_weight = filled(spec, 0.05 / std::sqrt(10.0));
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  const auto check = run_convergence_check(spec, cfg, seeds, {10, 500}, 0.5, 1);
  EXPECT_LT(check.mean.normalized(500), 1e-3) << check.mean.normalized(500);
  EXPECT_TRUE(check.bound_holds);
}

TEST(Algorithm2, SampledRoundGradientShrinksWithHorizon) {
  const auto spec = centred(10);
  auto cfg = TheoryConfig::example(1.0, 1000);
  std::vector<ConvergenceTrace> traces;
  for (std::uint64_t s = 0; s < 10; ++s) traces.push_back(run_algorithm2(spec, cfg, s));
  std::mt19937_64 rng(17);
  std::vector<double> medians;
  for (std::size_t R : {100, 300, 1000}) {
    std::vector<double> draws;
    for (const auto& t : traces) {
      const std::span<const double> alphas(t.alpha.data(), R);
      for (int k = 0; k < 200; ++k) draws.push_back(t.grad_norm_sq[sample_round_index(alphas, rng) - 1]);
    }
    std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
    medians.push_back(draws[draws.size() / 2]);
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(SampleRound, Cases) {
  std::mt19937_64 rng(1);
  const std::vector<double> one{0.7};
  EXPECT_EQ(sample_round_index(one, rng), 1u);
  const std::vector<double> gaps{0.0, 2.0, 0.0, 1.0};
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 10000; ++i) ++hits[sample_round_index(gaps, rng)];
  EXPECT_EQ(hits[1] + hits[3], 0);
  EXPECT_NEAR(hits[2] / 10000.0, 2.0 / 3.0, 0.02);
  const std::vector<double> equal(4, 0.25);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 10000; ++i) ++counts[sample_round_index(equal, rng)];
  const double sd = std::sqrt(10000 * 0.25 * 0.75);
  for (int k = 1; k <= 4; ++k) EXPECT_LT(std::fabs(counts[k] - 2500.0), 4 * sd);
  EXPECT_THROW(sample_round_index(std::vector<double>{}, rng), ConfigError);
  EXPECT_THROW(sample_round_index(std::vector<double>{0.0, 0.0}, rng), ConfigError);
}

TEST(SoftmaxMean, ClosedFormAndEquality) {
  const auto r = check_softmax_mean_inequality(std::vector<double>{0.0, std::log(3.0)});
  EXPECT_NEAR(r.softmax_weighted, 0.75 * std::log(3.0), 1e-15);
  EXPECT_NEAR(r.neg_softmax_weighted, 0.25 * std::log(3.0), 1e-15);
  EXPECT_NEAR(r.mean, 0.5 * std::log(3.0), 1e-15);
  const auto eq = check_softmax_mean_inequality(std::vector<double>(7, -2.25));
  EXPECT_LT(std::fabs(eq.upper_margin), 1e-12);
  EXPECT_LT(std::fabs(eq.lower_margin), 1e-12);
  EXPECT_THROW(check_softmax_mean_inequality(std::vector<double>{}), ConfigError);
}

TEST(SoftmaxMean, RandomSweepAgainstOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 16);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> x(dim(rng));
    for (auto& v : x) v = g(rng);
    const auto r = check_softmax_mean_inequality(x);
    EXPECT_TRUE(r.holds(1e-12));
    EXPECT_NEAR(r.softmax_weighted, weighted_oracle(x, 1.0), 1e-12 * std::max(1.0, std::fabs(r.softmax_weighted)));
    EXPECT_NEAR(r.neg_softmax_weighted, weighted_oracle(x, -1.0), 1e-12 * std::max(1.0, std::fabs(r.mean)));
  }
}

TEST(Traces, AverageAndCsv) {
  ConvergenceTrace a, b;
  a.alpha = b.alpha = {0.5, 0.25};
  a.grad_norm_sq = {1, 2};
  b.grad_norm_sq = {3, 4};
  a.cum_lhs = {0.5, 1.0};
  b.cum_lhs = {1.5, 2.5};
  a.rhs = b.rhs = {10, 11};
  const std::vector<ConvergenceTrace> both{a, b};
  const auto m = average_traces(both);
  EXPECT_EQ(m.grad_norm_sq, (std::vector<double>{2, 3}));
  EXPECT_DOUBLE_EQ(m.normalized(2), 1.75 / 0.75);
  b.alpha.push_back(0.1);
  b.grad_norm_sq.push_back(0);
  b.cum_lhs.push_back(0);
  b.rhs.push_back(0);
  const std::vector<ConvergenceTrace> ragged{a, b};
  EXPECT_THROW(average_traces(ragged), DimensionError);

  const auto path = std::filesystem::temp_directory_path() / "sabfl_trace.csv";
  write_trace_csv(path, m);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "r,alpha,grad_norm_sq,cum_lhs,rhs");
  EXPECT_EQ(row, "1,0.5,2,1,10");
}

TEST(CheckConfig, ParsesKeysAndRejectsUnknown) {
  std::istringstream in("workers = 4\nvalidators = 2\nM = 0.05\nrounds = 40\ncheckpoints = 5,40\nseeds = 3\n"
                        "initial_distance = 2\n");
  const auto c = parse_convergence_config(in);
  EXPECT_EQ(c.theory.num_workers, 4u);
  EXPECT_EQ(c.theory.rounds, 40u);
  EXPECT_EQ(c.checkpoints, (std::vector<std::size_t>{5, 40}));
  EXPECT_EQ(c.seeds().size(), 3u);
  ASSERT_TRUE(c.theory.initial_weight.has_value());
  EXPECT_NEAR(squared_norm(c.theory.initial_weight->values), 4.0, 1e-12);
  std::istringstream bad("gamma = 1\n");
  EXPECT_THROW(parse_convergence_config(bad), ConfigError);
}

}  // namespace
}  // namespace sabfl
