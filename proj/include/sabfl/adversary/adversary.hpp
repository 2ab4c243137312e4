#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "sabfl/aggregation/aggregation.hpp"
#include "sabfl/chain/election.hpp"
#include "sabfl/core/sgd.hpp"
#include "sabfl/data/dataset.hpp"

namespace sabfl {

struct AttackConfig {
  std::set<ParticipantId> malicious_ids;
  std::vector<int> flip_map;  // flip_map[l] = poisoned label; empty = l -> C-1-l
  bool validators_can_be_malicious = true;
  double max_malicious_validator_fraction = 0.5;

  bool is_malicious(ParticipantId id) const { return malicious_ids.count(id) != 0; }
  // Throws ConfigError unless the flip map is a bijection and the cap is in [0, 0.5].
  void check(std::size_t num_classes) const;
  std::vector<int> resolved_flip_map(std::size_t num_classes) const;
};

// l -> C-1-l.
std::vector<int> reverse_flip_map(std::size_t num_classes);

// View of `shard` with labels passed through `flip_map`.
ShardView flip_labels(const ShardView& shard, const std::vector<int>& flip_map);

// local_sgd on the flipped-label view.
ParamVector malicious_worker_update(const ModelSpec& spec, const ParamVector& w0, const ShardView& shard,
                                    const std::vector<int>& flip_map, const SgdConfig& cfg, std::uint64_t seed);

// eval_loss of every worker's weights on the validator's flipped-label view.
std::vector<double> malicious_validator_losses(const ModelSpec& spec, std::span<const ParamVector> worker_weights,
                                               const ShardView& shard, const std::vector<int>& flip_map);

struct CappedRoles {
  RoleAssignment roles;
  std::vector<RoleSwap> swaps;
};

// If more than floor(cap * V) validators are malicious, swaps the excess
// (picked with `seed`) for honest workers (also picked with `seed`). Set
// sizes never change. Throws ConfigError if there are too few honest workers.
CappedRoles cap_malicious_validators(const RoleAssignment& roles, const AttackConfig& cfg, std::uint64_t seed);

}  // namespace sabfl
