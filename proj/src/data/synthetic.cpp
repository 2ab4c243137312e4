#include "sabfl/data/synthetic.hpp"

#include <cmath>
#include <random>

#include "sabfl/util/error.hpp"
#include "sabfl/util/seed.hpp"

namespace sabfl {
namespace {

std::vector<double> class_centres(const SyntheticConfig& cfg) {
  const std::size_t d = cfg.input_dim, c = cfg.num_classes;
  std::vector<double> centres(c * d, 0.0);
  if (c <= d) {
    for (std::size_t k = 0; k < c; ++k) centres[k * d + k] = cfg.class_separation;
    return centres;
  }
  std::mt19937_64 rng(derive_seed(cfg.seed, {0xC3}));
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t k = 0; k < c; ++k) {
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      centres[k * d + j] = n01(rng);
      norm += centres[k * d + j] * centres[k * d + j];
    }
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) centres[k * d + j] *= cfg.class_separation / norm;
  }
  return centres;
}

Dataset draw(std::size_t n, const SyntheticConfig& cfg, const std::vector<double>& centres,
             std::uint64_t stream, Split split) {
  Dataset ds;
  ds.input_dim = cfg.input_dim;
  ds.num_classes = cfg.num_classes;
  ds.split = split;
  ds.features.resize(n * cfg.input_dim);
  ds.labels.resize(n);
  std::mt19937_64 rng(derive_seed(cfg.seed, {stream}));
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % cfg.num_classes);
    ds.labels[i] = y;
    for (std::size_t j = 0; j < cfg.input_dim; ++j) {
      ds.features[i * cfg.input_dim + j] = centres[y * cfg.input_dim + j] + n01(rng);
    }
  }
  return ds;
}

void validate(std::size_t n, const SyntheticConfig& cfg) {
  if (cfg.input_dim == 0 || cfg.num_classes < 2) throw ConfigError("synthetic: need d >= 1 and C >= 2");
  if (n < cfg.num_classes) throw ConfigError("synthetic: num_samples must be >= num_classes");
  if (!(cfg.class_separation >= 0.0)) throw ConfigError("synthetic: separation must be >= 0");
}

}  // namespace

Dataset generate_synthetic(std::size_t num_samples, const SyntheticConfig& cfg, Split split) {
  validate(num_samples, cfg);
  return draw(num_samples, cfg, class_centres(cfg), split == Split::kTrain ? 1 : 2, split);
}

std::pair<Dataset, Dataset> generate_synthetic_split(std::size_t train_samples,
                                                     std::size_t test_samples,
                                                     const SyntheticConfig& cfg) {
  validate(train_samples, cfg);
  validate(test_samples, cfg);
  const auto centres = class_centres(cfg);
  return {draw(train_samples, cfg, centres, 1, Split::kTrain),
          draw(test_samples, cfg, centres, 2, Split::kTest)};
}

}  // namespace sabfl
