#pragma once

#include <cstdint>
#include <vector>

#include "sabfl/core/minibatch.hpp"
#include "sabfl/core/param_vector.hpp"

namespace sabfl {

// Model definitions. The quadratic objective F(w) = 1/2 ||w - w*||^2 ignores
// its data argument; the classifiers use mean softmax cross-entropy.
struct ModelSpec {
  ModelKind kind = ModelKind::kQuadratic;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::size_t hidden_dim = 0;
  std::vector<double> quadratic_target;

  static ModelSpec quadratic(std::vector<double> target);
  static ModelSpec logistic(std::size_t input_dim, std::size_t num_classes);
  static ModelSpec mlp(std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes);

  Shape shape() const;
  std::size_t parameter_count() const { return shape().parameter_count(); }
  bool is_classifier() const { return kind != ModelKind::kQuadratic; }
};

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer (weights and biases).
ParamVector init_weights(const ModelSpec& spec, std::uint64_t seed);

double eval_loss(const ModelSpec& spec, const ParamVector& w, const Minibatch& data);
ParamVector eval_gradient(const ModelSpec& spec, const ParamVector& w, const Minibatch& data);
double eval_accuracy(const ModelSpec& spec, const ParamVector& w, const Minibatch& data);

// Class scores for a single feature row (classifiers only).
std::vector<double> logits(const ModelSpec& spec, const ParamVector& w, std::span<const double> x);

}  // namespace sabfl
