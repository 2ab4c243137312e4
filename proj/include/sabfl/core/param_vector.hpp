#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sabfl {

enum class ModelKind : std::uint8_t { kQuadratic = 0, kLogistic = 1, kMlp = 2 };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Binds a flat parameter vector to an architecture.
struct Shape {
  ModelKind kind = ModelKind::kQuadratic;
  std::uint32_t input_dim = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t hidden_dim = 0;

  std::size_t parameter_count() const;
  std::string to_string() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct ParamVector {
  std::vector<double> values;
  Shape shape;

  ParamVector() = default;
  ParamVector(std::vector<double> v, Shape s) : values(std::move(v)), shape(s) {}
  static ParamVector zeros(const Shape& s) {
    return ParamVector(std::vector<double>(s.parameter_count(), 0.0), s);
  }

  std::size_t size() const { return values.size(); }
  bool consistent() const { return values.size() == shape.parameter_count(); }
  bool all_finite() const;
  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

// Compares binary64 bit patterns (distinguishes -0.0 from 0.0).
bool bit_identical(std::span<const double> a, std::span<const double> b);

double squared_norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace sabfl
