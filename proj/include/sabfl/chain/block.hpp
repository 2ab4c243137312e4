#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sabfl/aggregation/aggregation.hpp"
#include "sabfl/chain/bytes.hpp"
#include "sabfl/chain/election.hpp"
#include "sabfl/core/param_vector.hpp"

namespace sabfl {

enum class AggregatorKind : std::uint8_t {
  kSoftmax = 0,
  kSoftmaxAccuracy = 1,
  kVanilla = 2,
  kSimple = 3,
  kMedian = 4,
  kKrum = 5,
};

const char* to_string(AggregatorKind kind);
AggregatorKind aggregator_from_string(const std::string& name);

struct AggregationRule {
  AggregatorKind kind = AggregatorKind::kSoftmax;
  std::uint32_t krum_f = 0;
  friend bool operator==(const AggregationRule&, const AggregationRule&) = default;
};

// Election parameters fixed at chain creation; stored in the genesis block
// so any verifier can re-derive every round's roles.
struct GenesisParams {
  StakeLedger ledger;
  std::uint32_t num_workers = 0;
  std::uint32_t num_validators = 0;
  friend bool operator==(const GenesisParams&, const GenesisParams&) = default;
};

// Raised when a round's inputs cannot form a valid block.
class ProtocolFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Block {
  std::uint64_t round = 0;
  Hash256 prev_hash{};
  RoleSeed role_seed{};
  RoleAssignment roles;
  std::vector<RoleSwap> role_swaps;
  AggregationRule rule;
  std::map<ParticipantId, ParamVector> worker_weights;
  std::map<ParticipantId, std::uint64_t> worker_sample_sizes;
  LossMatrix loss_matrix;
  std::optional<LossMatrix> accuracy_matrix;  // softmax_accuracy rule only
  ScoreVector scores;
  ParamVector global_weight;
  std::optional<GenesisParams> genesis;  // round 0 only
  Hash256 block_hash{};

  bool is_genesis() const { return round == 0; }
  // Canonical bytes of every field except block_hash: declaration order,
  // big-endian fixed-width integers, binary64 bit patterns, maps by id.
  std::vector<std::uint8_t> canonical_bytes() const;
  Hash256 compute_hash() const { return sha256(canonical_bytes()); }
  friend bool operator==(const Block&, const Block&) = default;
};

Block make_genesis(const StakeLedger& ledger, std::size_t num_workers, std::size_t num_validators,
                   ParamVector initial_weight);

struct BlockInputs {
  RoleAssignment roles;
  std::vector<RoleSwap> role_swaps;
  AggregationRule rule;
  std::map<ParticipantId, ParamVector> worker_weights;
  std::map<ParticipantId, std::uint64_t> worker_sample_sizes;  // vanilla only
  LossMatrix loss_matrix;
  std::optional<LossMatrix> accuracy_matrix;
};

struct AggregationOutcome {
  ScoreVector scores;
  ParamVector global_weight;
  std::optional<std::size_t> krum_selected;
};

// Scores and global weight implied by a block's own contents. The scores
// are softmax(mean accuracy) under the accuracy rule and softmax(-mean loss)
// otherwise; the global weight follows the block's rule.
AggregationOutcome recompute_aggregation(const BlockInputs& in);

// Throws ProtocolFault when the loss matrix does not match the roles.
Block build_block(std::uint64_t round, const Hash256& prev_hash, BlockInputs in);

enum class FaultCode {
  kOk = 0,
  kMalformed,
  kLinkage,
  kRoundSequence,
  kRoleSeed,
  kRoleMismatch,
  kHashMismatch,
  kScoreMismatch,
  kAggregationMismatch,
  kGenesis,
};

const char* to_string(FaultCode code);

struct ValidationResult {
  FaultCode code = FaultCode::kOk;
  std::uint64_t round = 0;
  std::string detail;

  bool ok() const { return code == FaultCode::kOk; }
  static ValidationResult fault(FaultCode c, std::uint64_t r, std::string d) { return {c, r, std::move(d)}; }
};

// Linkage, hash integrity, and bit-exact recomputation of scores and the
// global weight from the block's own matrices and worker weights.
ValidationResult validate_block(const Block& block, const Hash256& prev_hash);

}  // namespace sabfl
