#include "sabfl/analysis/theory.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include "sabfl/aggregation/aggregation.hpp"
#include "sabfl/util/error.hpp"
#include "sabfl/util/parallel.hpp"
#include "sabfl/util/seed.hpp"

namespace sabfl {
namespace {

enum : std::uint64_t { kTagInit = 1, kTagNoise, kTagCoarse, kTagFine };

double true_loss(const ModelSpec& spec, const ParamVector& w) { return eval_loss(spec, w, Minibatch{}); }

}  // namespace

TheoryConfig TheoryConfig::example(double L, std::size_t rounds) {
  TheoryConfig cfg;
  cfg.L = L;
  cfg.delta = 0.01;
  cfg.epochs = 1;
  cfg.rounds = rounds;
  const double offset = std::ceil(2.0 * L);
  cfg.lr = [offset](std::size_t r) { return 1.0 / (offset + static_cast<double>(r)); };
  cfg.batch = [](std::size_t) { return std::size_t{1}; };
  return cfg;
}

void TheoryConfig::validate() const {
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("L must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(M >= 0.0) || !std::isfinite(M)) throw ConfigError("M must be non-negative");
  if (!(epsilon > 0.0) || !(epsilon_tilde > 0.0)) throw ConfigError("epsilon and epsilon~ must be positive");
  if (epochs == 0 || num_workers == 0 || num_validators == 0) {
    throw ConfigError("epochs, workers and validators must be positive");
  }
  if (!lr || !batch) throw ConfigError("learning-rate and batch schedules are required");
  const double E = static_cast<double>(epochs);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t r = 1; r <= rounds; ++r) {
    const double a = lr(r);
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("learning rate must be positive at round " + std::to_string(r));
    if (a > prev) throw ConfigError("learning rate increases at round " + std::to_string(r));
    if (batch(r) == 0) throw ConfigError("batch size must be positive at round " + std::to_string(r));
    const double la = L * a;
    if (la * la * (E + 1.0) * (E - 2.0) / 2.0 + la * E > 1.0) {
      throw ConfigError("step-size condition fails at round " + std::to_string(r));
    }
    if (1.0 - delta < la * la) throw ConfigError("delta condition fails at round " + std::to_string(r));
    prev = a;
  }
}

double ConvergenceTrace::normalized(std::size_t R) const {
  if (R == 0 || R > rounds()) throw ConfigError("normalized: round out of range");
  double total = 0.0;
  for (std::size_t r = 0; r < R; ++r) total += alpha[r];
  return cum_lhs[R - 1] / total;
}

bool ConvergenceTrace::all_finite_nonnegative() const {
  for (const auto* v : {&alpha, &grad_norm_sq, &cum_lhs, &rhs}) {
    for (double x : *v) {
      if (!std::isfinite(x) || x < 0.0) return false;
    }
  }
  return true;
}

double oracle_validator_loss(const std::function<double(const ParamVector&)>& true_F, const ParamVector& w,
                             double tolerance, std::uint64_t seed) {
  if (!(tolerance >= 0.0)) throw ConfigError("oracle tolerance must be non-negative");
  const double f = true_F(w);
  if (tolerance == 0.0) return f;
  std::mt19937_64 rng(seed);
  const double u = tolerance * (2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng) - 1.0);
  const double out = f + u;
  // Rounding can push the sum onto or past the band edge.
  return std::fabs(out - f) < tolerance ? out : f;
}

double validator_scale(std::span<const double> coarse_losses, double epsilon_tilde) {
  double m = 0.0;
  for (double v : coarse_losses) m = std::max(m, std::fabs(v));
  return m + epsilon_tilde;
}

double validator_tolerance(double epsilon, std::size_t round, std::size_t num_workers, double m) {
  const double k = static_cast<double>(num_workers);
  const double base = epsilon / (k * k * std::sqrt(k) * m);
  return std::ldexp(base, -static_cast<int>(std::min<std::size_t>(round, 4096)));
}

double theorem1_rhs(const TheoryConfig& cfg, std::size_t R, double F0, double Fstar) {
  const double E = static_cast<double>(cfg.epochs);
  const double denom = E - 1.0 + cfg.delta;
  double noise = 0.0;
  for (std::size_t r = 1; r <= R; ++r) {
    const double a = cfg.lr(r);
    const double B = static_cast<double>(cfg.batch(r));
    noise += cfg.L * E * a * a * cfg.M * (6.0 * E + cfg.L * (2.0 * E - 1.0) * (E - 1.0) * a) / (6.0 * B * denom);
  }
  return 2.0 * (F0 - Fstar) / denom + noise + 2.0 * cfg.epsilon / denom;
}

ConvergenceTrace run_algorithm2(const ModelSpec& spec, const TheoryConfig& cfg, std::uint64_t seed) {
  if (spec.kind != ModelKind::kQuadratic) throw ConfigError("the convergence check needs the quadratic model");
  cfg.validate();
  const std::size_t d = spec.parameter_count();
  const std::size_t K = cfg.num_workers;
  const std::size_t V = cfg.num_validators;
  const double E = static_cast<double>(cfg.epochs);
  const double denom = E - 1.0 + cfg.delta;
  const std::function<double(const ParamVector&)> F = [&spec](const ParamVector& w) { return true_loss(spec, w); };

  ParamVector global = cfg.initial_weight ? *cfg.initial_weight : init_weights(spec, derive_seed(seed, {kTagInit}));
  if (global.shape != spec.shape()) throw DimensionError("initial weight does not match the quadratic model");

  ConvergenceTrace trace;
  trace.f0 = F(global);
  trace.fstar = 0.0;
  const double rhs_fixed = 2.0 * (trace.f0 - trace.fstar) / denom + 2.0 * cfg.epsilon / denom;
  double noise_sum = 0.0;
  double cum = 0.0;

  std::vector<ParticipantId> worker_ids(K), validator_ids(V);
  std::iota(worker_ids.begin(), worker_ids.end(), ParticipantId{0});
  std::iota(validator_ids.begin(), validator_ids.end(), static_cast<ParticipantId>(K));
  std::vector<ParamVector> locals(K);
  std::vector<double> coarse(K);
  for (std::size_t r = 1; r <= cfg.rounds; ++r) {
    const double a = cfg.lr(r);
    const std::size_t B = cfg.batch(r);
    const double g2 = squared_norm(eval_gradient(spec, global, Minibatch{}).values);
    cum += a * g2;
    noise_sum += cfg.L * E * a * a * cfg.M * (6.0 * E + cfg.L * (2.0 * E - 1.0) * (E - 1.0) * a) /
                 (6.0 * static_cast<double>(B) * denom);
    trace.alpha.push_back(a);
    trace.grad_norm_sq.push_back(g2);
    trace.cum_lhs.push_back(cum);
    trace.rhs.push_back(rhs_fixed + noise_sum);

    // Local steps: exact gradient plus zero-mean Gaussian noise whose total
    // variance is M / B_r.
    const double sd = std::sqrt(cfg.M / (static_cast<double>(d) * static_cast<double>(B)));
    for (std::size_t i = 0; i < K; ++i) {
      std::mt19937_64 rng(derive_seed(seed, {kTagNoise, r, i}));
      std::normal_distribution<double> noise(0.0, 1.0);
      ParamVector w = global;
      for (std::size_t t = 0; t < cfg.epochs; ++t) {
        ParamVector g = eval_gradient(spec, w, Minibatch{});
        for (std::size_t k = 0; k < d; ++k) w.values[k] -= a * (g.values[k] + sd * noise(rng));
      }
      locals[i] = std::move(w);
    }

    LossMatrix fine(validator_ids, worker_ids);
    for (std::size_t j = 0; j < V; ++j) {
      for (std::size_t i = 0; i < K; ++i) {
        coarse[i] = oracle_validator_loss(F, locals[i], cfg.epsilon_tilde, derive_seed(seed, {kTagCoarse, r, j, i}));
      }
      const double tol = validator_tolerance(cfg.epsilon, r, K, validator_scale(coarse, cfg.epsilon_tilde));
      for (std::size_t i = 0; i < K; ++i) {
        fine.at(j, i) = oracle_validator_loss(F, locals[i], tol, derive_seed(seed, {kTagFine, r, j, i}));
      }
    }
    global = aggregate_softmax(locals, fine).weights;
  }
  return trace;
}

std::size_t sample_round_index(std::span<const double> alphas, std::mt19937_64& rng) {
  if (alphas.empty()) throw ConfigError("sample_round_index: no rounds");
  double total = 0.0;
  for (double a : alphas) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("sample_round_index: weights must be finite and >= 0");
    total += a;
  }
  if (!(total > 0.0)) throw ConfigError("sample_round_index: all weights are zero");
  std::discrete_distribution<std::size_t> pick(alphas.begin(), alphas.end());
  return pick(rng) + 1;
}

SoftmaxMeanReport check_softmax_mean_inequality(std::span<const double> x) {
  if (x.empty()) throw ConfigError("check_softmax_mean_inequality: empty input");
  SoftmaxMeanReport rep;
  for (double v : x) rep.mean += v;
  rep.mean /= static_cast<double>(x.size());

  const auto weighted = [&](double sign) {
    double top = -std::numeric_limits<double>::infinity();
    for (double v : x) top = std::max(top, sign * v);
    double z = 0.0, s = 0.0;
    for (double v : x) {
      const double e = std::exp(sign * v - top);
      z += e;
      s += e * v;
    }
    return s / z;
  };
  rep.softmax_weighted = weighted(1.0);
  rep.neg_softmax_weighted = weighted(-1.0);
  rep.upper_margin = rep.softmax_weighted - rep.mean;
  rep.lower_margin = rep.mean - rep.neg_softmax_weighted;
  return rep;
}

ConvergenceTrace average_traces(std::span<const ConvergenceTrace> traces) {
  if (traces.empty()) throw ConfigError("average_traces: no traces");
  const std::size_t n = traces.front().rounds();
  ConvergenceTrace out;
  out.alpha = traces.front().alpha;
  out.grad_norm_sq.assign(n, 0.0);
  out.cum_lhs.assign(n, 0.0);
  out.rhs.assign(n, 0.0);
  for (const auto& t : traces) {
    if (t.rounds() != n) throw DimensionError("average_traces: length mismatch");
    for (std::size_t r = 0; r < n; ++r) {
      out.grad_norm_sq[r] += t.grad_norm_sq[r];
      out.cum_lhs[r] += t.cum_lhs[r];
      out.rhs[r] += t.rhs[r];
    }
    out.f0 += t.f0;
    out.fstar += t.fstar;
  }
  const double k = static_cast<double>(traces.size());
  for (std::size_t r = 0; r < n; ++r) {
    out.grad_norm_sq[r] /= k;
    out.cum_lhs[r] /= k;
    out.rhs[r] /= k;
  }
  out.f0 /= k;
  out.fstar /= k;
  return out;
}

ConvergenceCheck run_convergence_check(const ModelSpec& spec, const TheoryConfig& cfg,
                                       std::span<const std::uint64_t> seeds, std::vector<std::size_t> checkpoints,
                                       double decay_threshold, std::size_t threads) {
  if (seeds.empty()) throw ConfigError("convergence check needs at least one seed");
  for (auto c : checkpoints) {
    if (c == 0 || c > cfg.rounds) throw ConfigError("checkpoint " + std::to_string(c) + " outside 1.." +
                                                    std::to_string(cfg.rounds));
  }
  std::vector<ConvergenceTrace> traces(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t s) { traces[s] = run_algorithm2(spec, cfg, seeds[s]); });

  ConvergenceCheck out;
  out.mean = average_traces(traces);
  out.checkpoints = std::move(checkpoints);
  for (auto c : out.checkpoints) {
    if (!(out.mean.cum_lhs[c - 1] <= out.mean.rhs[c - 1])) out.bound_holds = false;
  }
  if (!out.checkpoints.empty()) {
    out.decay_ratio = out.mean.normalized(out.checkpoints.back()) / out.mean.normalized(out.checkpoints.front());
    out.decay_holds = out.decay_ratio < decay_threshold;
  }
  return out;
}

void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "r,alpha,grad_norm_sq,cum_lhs,rhs\n" << std::setprecision(17);
  for (std::size_t r = 0; r < trace.rounds(); ++r) {
    out << r + 1 << ',' << trace.alpha[r] << ',' << trace.grad_norm_sq[r] << ',' << trace.cum_lhs[r] << ','
        << trace.rhs[r] << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path.string());
}

}  // namespace sabfl
