#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sabfl {

using Hash256 = std::array<std::uint8_t, 32>;
using RoleSeed = std::array<std::uint8_t, 8>;

Hash256 sha256(std::span<const std::uint8_t> data);
std::string to_hex(std::span<const std::uint8_t> data);

std::string base64_encode(std::span<const std::uint8_t> data);
// Rejects anything that is not the canonical encoding of its payload.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Big-endian fixed-width writer used for hashing and the weight sidecar.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void bytes(std::span<const std::uint8_t> v) { out_.insert(out_.end(), v.begin(), v.end()); }
  void reals(std::span<const double> v) {
    for (double x : v) f64(x);
  }

  const std::vector<std::uint8_t>& data() const { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const;
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> reals_to_bytes(std::span<const double> v);
std::vector<double> bytes_to_reals(std::span<const std::uint8_t> b);

}  // namespace sabfl
