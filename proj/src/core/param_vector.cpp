#include "sabfl/core/param_vector.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "sabfl/util/error.hpp"

namespace sabfl {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kQuadratic:
      return "quadratic";
    case ModelKind::kLogistic:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "quadratic") return ModelKind::kQuadratic;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "mlp") return ModelKind::kMlp;
  throw ConfigError("unknown model kind '" + name + "'");
}

std::size_t Shape::parameter_count() const {
  const std::size_t d = input_dim, c = num_classes, h = hidden_dim;
  switch (kind) {
    case ModelKind::kQuadratic:
      return d;
    case ModelKind::kLogistic:
      return c * d + c;
    case ModelKind::kMlp:
      return h * d + h + c * h + c;
  }
  return 0;
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << sabfl::to_string(kind) << "(d=" << input_dim << ",c=" << num_classes
     << ",h=" << hidden_dim << ")";
  return os.str();
}

bool ParamVector::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool bit_identical(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace sabfl
