#pragma once

#include <cstdint>
#include <utility>

#include "sabfl/data/dataset.hpp"

namespace sabfl {

struct SyntheticConfig {
  std::size_t input_dim = 10;
  std::size_t num_classes = 2;
  double class_separation = 3.0;
  std::uint64_t seed = 0;
};

// Gaussian blobs: class c is N(separation * u_c, I) with unit centre
// directions u_c (coordinate axes when C <= d, random otherwise). Labels
// cycle 0..C-1 so every class appears once num_samples >= C.
Dataset generate_synthetic(std::size_t num_samples, const SyntheticConfig& cfg,
                           Split split = Split::kTrain);

// Train and test splits drawn from the same blobs with independent noise.
std::pair<Dataset, Dataset> generate_synthetic_split(std::size_t train_samples,
                                                     std::size_t test_samples,
                                                     const SyntheticConfig& cfg);

}  // namespace sabfl
