#pragma once

#include <map>
#include <span>
#include <vector>

#include "sabfl/chain/block.hpp"

namespace sabfl {

// Append-only hash-linked sequence starting at a genesis block.
class Chain {
 public:
  explicit Chain(Block genesis);

  const Block& genesis() const { return blocks_.front(); }
  const Block& tip() const { return blocks_.back(); }
  const Hash256& genesis_hash() const { return genesis().block_hash; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t size() const { return blocks_.size(); }
  // Next round number to be built.
  std::uint64_t next_round() const { return tip().round + 1; }

  // Throws ProtocolFault unless `b` links to the tip with the next round.
  void append(Block b);

 private:
  std::vector<Block> blocks_;
};

// Every block in order, plus role re-derivation from the genesis ledger and
// each block's recorded swaps. Reports the first inconsistency.
ValidationResult validate_chain(std::span<const Block> blocks);
inline ValidationResult validate_chain(const Chain& chain) { return validate_chain(chain.blocks()); }

struct RewardConfig {
  double worker_pool = 0.7;
  double validator_pool = 0.2;
  double miner_share = 0.1;
  // Keeps a zero-deviation validator finite.
  double deviation_floor = 1e-9;
};

// Worker i receives worker_pool * p_i. Validator j receives a share of
// validator_pool proportional to 1 / (d_j + floor), where d_j is the mean
// absolute gap between its losses and the column means. The miner gets
// miner_share.
std::map<ParticipantId, double> compute_round_rewards(const Block& block, const RewardConfig& cfg = {});

}  // namespace sabfl
