#include "sabfl/core/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

void check_inputs(const ModelSpec& spec, const ParamVector& w, const Minibatch& data) {
  if (w.shape != spec.shape() || !w.consistent()) {
    throw DimensionError("parameter vector " + w.shape.to_string() + " does not match model " +
                         spec.shape().to_string());
  }
  if (!spec.is_classifier()) {
    if (spec.quadratic_target.size() != spec.input_dim) {
      throw DimensionError("quadratic target length mismatch");
    }
    return;
  }
  if (data.empty()) throw ConfigError("empty minibatch");
  if (data.input_dim != spec.input_dim || data.features.size() != data.size() * data.input_dim) {
    throw DimensionError("minibatch feature width does not match model input_dim");
  }
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.num_classes) {
      throw DimensionError("label outside [0, num_classes)");
    }
  }
}

// Views into the flat parameter layout.
//   logistic: W[c][d], b[c]
//   mlp:      W1[h][d], b1[h], W2[c][h], b2[c]
struct Layer {
  std::size_t in, out, w_off, b_off;
};

std::vector<Layer> layers_of(const ModelSpec& s) {
  const std::size_t d = s.input_dim, c = s.num_classes, h = s.hidden_dim;
  if (s.kind == ModelKind::kLogistic) return {{d, c, 0, c * d}};
  const std::size_t l2 = h * d + h;
  return {{d, h, 0, h * d}, {h, c, l2, l2 + c * h}};
}

void affine(const Layer& l, const std::vector<double>& p, std::span<const double> x,
            std::vector<double>& out) {
  out.assign(l.out, 0.0);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* wr = p.data() + l.w_off + o * l.in;
    double z = p[l.b_off + o];
    for (std::size_t i = 0; i < l.in; ++i) z += wr[i] * x[i];
    out[o] = z;
  }
}

double log_sum_exp(const std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

struct Forward {
  std::vector<double> hidden;  // post-ReLU (mlp only)
  std::vector<double> logits;
};

void forward(const ModelSpec& spec, const std::vector<Layer>& ls, const std::vector<double>& p,
             std::span<const double> x, Forward& f) {
  if (spec.kind == ModelKind::kLogistic) {
    affine(ls[0], p, x, f.logits);
    return;
  }
  affine(ls[0], p, x, f.hidden);
  for (double& v : f.hidden) v = v > 0.0 ? v : 0.0;
  affine(ls[1], p, f.hidden, f.logits);
}

}  // namespace

ModelSpec ModelSpec::quadratic(std::vector<double> target) {
  ModelSpec s;
  s.kind = ModelKind::kQuadratic;
  s.input_dim = target.size();
  s.quadratic_target = std::move(target);
  return s;
}

ModelSpec ModelSpec::logistic(std::size_t input_dim, std::size_t num_classes) {
  if (input_dim == 0 || num_classes < 2) throw ConfigError("logistic model needs d >= 1, C >= 2");
  ModelSpec s;
  s.kind = ModelKind::kLogistic;
  s.input_dim = input_dim;
  s.num_classes = num_classes;
  return s;
}

ModelSpec ModelSpec::mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes) {
  if (input_dim == 0 || hidden_dim == 0 || num_classes < 2) {
    throw ConfigError("mlp needs d >= 1, h >= 1, C >= 2");
  }
  ModelSpec s;
  s.kind = ModelKind::kMlp;
  s.input_dim = input_dim;
  s.hidden_dim = hidden_dim;
  s.num_classes = num_classes;
  return s;
}

Shape ModelSpec::shape() const {
  Shape sh;
  sh.kind = kind;
  sh.input_dim = static_cast<std::uint32_t>(input_dim);
  sh.num_classes = static_cast<std::uint32_t>(kind == ModelKind::kQuadratic ? 0 : num_classes);
  sh.hidden_dim = static_cast<std::uint32_t>(kind == ModelKind::kMlp ? hidden_dim : 0);
  return sh;
}

ParamVector init_weights(const ModelSpec& spec, std::uint64_t seed) {
  ParamVector w = ParamVector::zeros(spec.shape());
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t begin, std::size_t end, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = begin; i < end; ++i) w.values[i] = u(rng);
  };
  if (spec.kind == ModelKind::kQuadratic) {
    fill(0, w.size(), std::max<std::size_t>(1, spec.input_dim));
    return w;
  }
  for (const auto& l : layers_of(spec)) {
    fill(l.w_off, l.w_off + l.in * l.out, l.in);
    fill(l.b_off, l.b_off + l.out, l.in);
  }
  return w;
}

std::vector<double> logits(const ModelSpec& spec, const ParamVector& w, std::span<const double> x) {
  if (!spec.is_classifier()) throw ConfigError("logits requested from quadratic model");
  if (x.size() != spec.input_dim || w.shape != spec.shape()) throw DimensionError("logits: shape mismatch");
  Forward f;
  forward(spec, layers_of(spec), w.values, x, f);
  return f.logits;
}

double eval_loss(const ModelSpec& spec, const ParamVector& w, const Minibatch& data) {
  check_inputs(spec, w, data);
  if (!spec.is_classifier()) {
    return 0.5 * squared_distance(w.values, spec.quadratic_target);
  }
  const auto ls = layers_of(spec);
  Forward f;
  double total = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    forward(spec, ls, w.values, data.row(n), f);
    total += log_sum_exp(f.logits) - f.logits[data.labels[n]];
  }
  return total / static_cast<double>(data.size());
}

ParamVector eval_gradient(const ModelSpec& spec, const ParamVector& w, const Minibatch& data) {
  check_inputs(spec, w, data);
  ParamVector g = ParamVector::zeros(spec.shape());
  if (!spec.is_classifier()) {
    for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = w.values[i] - spec.quadratic_target[i];
    return g;
  }
  const auto ls = layers_of(spec);
  const Layer& out_layer = ls.back();
  Forward f;
  std::vector<double> dz(spec.num_classes), dh;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.row(n);
    forward(spec, ls, w.values, x, f);
    const double lse = log_sum_exp(f.logits);
    for (std::size_t c = 0; c < dz.size(); ++c) dz[c] = std::exp(f.logits[c] - lse);
    dz[data.labels[n]] -= 1.0;

    std::span<const double> out_in = spec.kind == ModelKind::kMlp ? std::span<const double>(f.hidden) : x;
    for (std::size_t o = 0; o < out_layer.out; ++o) {
      double* gw = g.values.data() + out_layer.w_off + o * out_layer.in;
      for (std::size_t i = 0; i < out_layer.in; ++i) gw[i] += dz[o] * out_in[i];
      g.values[out_layer.b_off + o] += dz[o];
    }
    if (spec.kind != ModelKind::kMlp) continue;

    const Layer& hid = ls[0];
    dh.assign(hid.out, 0.0);
    for (std::size_t o = 0; o < out_layer.out; ++o) {
      const double* wr = w.values.data() + out_layer.w_off + o * out_layer.in;
      for (std::size_t j = 0; j < hid.out; ++j) dh[j] += dz[o] * wr[j];
    }
    for (std::size_t j = 0; j < hid.out; ++j) {
      if (f.hidden[j] <= 0.0) continue;
      double* gw = g.values.data() + hid.w_off + j * hid.in;
      for (std::size_t i = 0; i < hid.in; ++i) gw[i] += dh[j] * x[i];
      g.values[hid.b_off + j] += dh[j];
    }
  }
  const double inv = static_cast<double>(data.size());
  for (double& v : g.values) v /= inv;
  return g;
}

double eval_accuracy(const ModelSpec& spec, const ParamVector& w, const Minibatch& data) {
  if (!spec.is_classifier()) throw ConfigError("accuracy is undefined for the quadratic model");
  check_inputs(spec, w, data);
  const auto ls = layers_of(spec);
  Forward f;
  std::size_t correct = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    forward(spec, ls, w.values, data.row(n), f);
    // max_element returns the first maximum: ties go to the lowest class.
    const auto pred = std::max_element(f.logits.begin(), f.logits.end()) - f.logits.begin();
    if (pred == data.labels[n]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace sabfl
