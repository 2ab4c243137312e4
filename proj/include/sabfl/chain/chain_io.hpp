#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sabfl/chain/chain.hpp"

namespace sabfl {

// One JSON object per line per block. Hashes, seeds and real arrays are
// base64 of their canonical bytes; parameter vectors live in a sidecar
// binary file read back in block order:
//   magic "SABFLW01", then per block: u64 round, u32 vector count,
//   per vector: u32 length, length x f64 (big-endian). The global weight
//   comes first, then workers in ascending id.
struct ChainFiles {
  std::filesystem::path jsonl;
  std::filesystem::path weights;

  static ChainFiles in_dir(const std::filesystem::path& dir) {
    return {dir / "chain.jsonl", dir / "chain.weights"};
  }
  // Sidecar next to a given chain.jsonl.
  static ChainFiles beside(const std::filesystem::path& jsonl) {
    return {jsonl, jsonl.parent_path() / (jsonl.stem().string() + ".weights")};
  }
};

void write_chain(std::span<const Block> blocks, const ChainFiles& files);

void write_chain_streams(std::span<const Block> blocks, std::string& jsonl, std::vector<std::uint8_t>& weights);

// Throws IngestionError on any syntactic or structural problem.
std::vector<Block> read_chain(const ChainFiles& files);
std::vector<Block> read_chain_streams(const std::string& jsonl, std::span<const std::uint8_t> weights);

// Read, then validate_chain; parse failures are reported as kMalformed.
ValidationResult validate_chain_files(const ChainFiles& files);
ValidationResult validate_chain_bytes(const std::string& jsonl, std::span<const std::uint8_t> weights);

}  // namespace sabfl
