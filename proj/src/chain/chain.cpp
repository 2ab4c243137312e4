#include "sabfl/chain/chain.hpp"

#include <cmath>
#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {

Chain::Chain(Block genesis) {
  if (!genesis.is_genesis() || !genesis.genesis) throw ProtocolFault("chain must start with a genesis block");
  blocks_.push_back(std::move(genesis));
}

void Chain::append(Block b) {
  if (b.prev_hash != tip().block_hash) throw ProtocolFault("block does not link to the chain tip");
  if (b.round != next_round()) {
    throw ProtocolFault("expected round " + std::to_string(next_round()) + ", got " + std::to_string(b.round));
  }
  blocks_.push_back(std::move(b));
}

ValidationResult validate_chain(std::span<const Block> blocks) {
  if (blocks.empty()) return ValidationResult::fault(FaultCode::kGenesis, 0, "empty chain");
  const Block& g = blocks.front();
  if (!g.is_genesis() || !g.genesis) return ValidationResult::fault(FaultCode::kGenesis, g.round, "first block is not genesis");
  if (auto r = validate_block(g, Hash256{}); !r.ok()) return r;

  const auto& params = *g.genesis;
  std::vector<ParticipantId> universe;
  for (const auto& [id, s] : params.ledger.stakes()) universe.push_back(id);

  for (std::size_t n = 1; n < blocks.size(); ++n) {
    const Block& b = blocks[n];
    if (b.round != blocks[n - 1].round + 1) {
      return ValidationResult::fault(FaultCode::kRoundSequence, b.round,
                                     "expected round " + std::to_string(blocks[n - 1].round + 1));
    }
    if (auto r = validate_block(b, blocks[n - 1].block_hash); !r.ok()) return r;
    if (b.global_weight.shape != g.global_weight.shape) {
      return ValidationResult::fault(FaultCode::kMalformed, b.round, "model shape changed along the chain");
    }
    RoleAssignment expected;
    try {
      expected = elect_roles(params.ledger, b.round, b.prev_hash, params.num_workers, params.num_validators);
      expected = apply_swaps(std::move(expected), b.role_swaps);
    } catch (const std::exception& e) {
      return ValidationResult::fault(FaultCode::kRoleMismatch, b.round, e.what());
    }
    if (!(expected == b.roles) || !b.roles.partitions(universe)) {
      return ValidationResult::fault(FaultCode::kRoleMismatch, b.round, "roles differ from stake election");
    }
  }
  return {};
}

std::map<ParticipantId, double> compute_round_rewards(const Block& block, const RewardConfig& cfg) {
  std::map<ParticipantId, double> out;
  if (block.is_genesis()) return out;
  const auto& workers = block.roles.workers;
  for (std::size_t i = 0; i < workers.size(); ++i) out[workers[i]] = cfg.worker_pool * block.scores.scores.at(i);

  const auto& m = block.loss_matrix;
  const auto means = mean_loss(m);
  std::vector<double> inverse(m.num_validators());
  double total = 0.0;
  for (std::size_t j = 0; j < m.num_validators(); ++j) {
    double dev = 0.0;
    for (std::size_t i = 0; i < m.num_workers(); ++i) dev += std::abs(m.at(j, i) - means[i]);
    dev /= static_cast<double>(m.num_workers());
    inverse[j] = 1.0 / (dev + cfg.deviation_floor);
    total += inverse[j];
  }
  for (std::size_t j = 0; j < m.num_validators(); ++j) {
    out[m.validator_ids[j]] = cfg.validator_pool * inverse[j] / total;
  }
  out[block.roles.miner] = cfg.miner_share;
  return out;
}

}  // namespace sabfl
