#include "sabfl/data/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off, const std::string& what) {
  if (off + 4 > b.size()) throw IngestionError(what + ": truncated header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                 Split split) {
  const auto img = slurp(images_path);
  const auto lab = slurp(labels_path);
  const std::string iname = images_path.string(), lname = labels_path.string();

  if (be32(img, 0, iname) != 0x00000803) throw IngestionError(iname + ": bad magic (expected 0x00000803)");
  if (be32(lab, 0, lname) != 0x00000801) throw IngestionError(lname + ": bad magic (expected 0x00000801)");
  const std::size_t count = be32(img, 4, iname);
  const std::size_t rows = be32(img, 8, iname), cols = be32(img, 12, iname);
  const std::size_t label_count = be32(lab, 4, lname);
  if (label_count != count) {
    throw IngestionError("label count " + std::to_string(label_count) + " does not match image count " +
                         std::to_string(count));
  }
  const std::size_t dim = rows * cols;
  if (img.size() != 16 + count * dim) throw IngestionError(iname + ": truncated or oversized pixel block");
  if (lab.size() != 8 + count) throw IngestionError(lname + ": truncated or oversized label block");
  if (count == 0 || dim == 0) throw IngestionError(iname + ": no samples");

  Dataset ds;
  ds.input_dim = dim;
  ds.split = split;
  ds.features.resize(count * dim);
  ds.labels.resize(count);
  for (std::size_t i = 0; i < count * dim; ++i) ds.features[i] = img[16 + i] / 255.0;
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    ds.labels[i] = lab[8 + i];
    max_label = std::max(max_label, ds.labels[i]);
  }
  ds.num_classes = static_cast<std::size_t>(max_label) + 1;
  return ds;
}

void write_csv(const Dataset& ds, std::ostream& out) {
  for (std::size_t j = 0; j < ds.input_dim; ++j) out << 'f' << j << ',';
  out << "label\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (double v : ds.row(i)) out << v << ',';
    out << ds.labels[i] << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write " + path.string());
  write_csv(ds, out);
}

Dataset read_csv(std::istream& in, std::size_t num_classes, Split split) {
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("csv: empty input");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected;
  for (std::size_t k = 0; k + 1 < columns; ++k) expected += "f" + std::to_string(k) + ",";
  if (columns < 2 || line != expected + "label") throw IngestionError("csv: header must be f0..fN,label");
  Dataset ds;
  ds.input_dim = columns - 1;
  ds.split = split;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      if (col < ds.input_dim) {
        try {
          ds.features.push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw IngestionError("csv line " + std::to_string(line_no) + ": bad number '" + cell + "'");
        }
      } else if (col == ds.input_dim) {
        int y = -1;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
        if (ec != std::errc() || p != cell.data() + cell.size() || y < 0) {
          throw IngestionError("csv line " + std::to_string(line_no) + ": bad label '" + cell + "'");
        }
        ds.labels.push_back(y);
        max_label = std::max(max_label, y);
      }
      ++col;
    }
    if (col != columns) throw IngestionError("csv line " + std::to_string(line_no) + ": wrong column count");
  }
  if (ds.labels.empty()) throw IngestionError("csv: no rows");
  ds.num_classes = num_classes ? num_classes : static_cast<std::size_t>(max_label) + 1;
  ds.check();
  return ds;
}

Dataset read_csv(const std::filesystem::path& path, std::size_t num_classes, Split split) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  return read_csv(in, num_classes, split);
}

}  // namespace sabfl
