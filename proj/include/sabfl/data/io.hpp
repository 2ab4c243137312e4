#pragma once

#include <filesystem>
#include <iosfwd>

#include "sabfl/data/dataset.hpp"

namespace sabfl {

// MNIST-style IDX pair: images (magic 0x00000803, uint8 pixels scaled to
// [0,1]) and labels (magic 0x00000801). num_classes = max label + 1.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 Split split = Split::kTrain);

// CSV with header "f0,...,f{d-1},label".
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(std::istream& in, std::size_t num_classes = 0, Split split = Split::kTrain);
Dataset read_csv(const std::filesystem::path& path, std::size_t num_classes = 0,
                 Split split = Split::kTrain);

}  // namespace sabfl
