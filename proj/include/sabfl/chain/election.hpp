#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sabfl/chain/bytes.hpp"
#include "sabfl/util/types.hpp"

namespace sabfl {

class StakeLedger {
 public:
  StakeLedger() = default;
  explicit StakeLedger(const std::map<ParticipantId, double>& stakes);

  // Stakes must be finite and > 0.
  void set_stake(ParticipantId id, double stake);
  double stake(ParticipantId id) const;
  bool contains(ParticipantId id) const { return stakes_.count(id) != 0; }
  std::size_t size() const { return stakes_.size(); }
  const std::map<ParticipantId, double>& stakes() const { return stakes_; }
  friend bool operator==(const StakeLedger&, const StakeLedger&) = default;

 private:
  std::map<ParticipantId, double> stakes_;
};

enum class Role : std::uint8_t { kWorker, kValidator, kMiner };

struct RoleAssignment {
  std::uint64_t round = 0;
  std::vector<ParticipantId> workers;     // ascending
  std::vector<ParticipantId> validators;  // ascending
  ParticipantId miner = 0;

  Role role_of(ParticipantId id) const;
  // True when workers, validators and {miner} partition `universe`.
  bool partitions(const std::vector<ParticipantId>& universe) const;
  friend bool operator==(const RoleAssignment&, const RoleAssignment&) = default;
};

// A post-election exchange: the validator leaves the committee and the
// worker takes its seat.
struct RoleSwap {
  ParticipantId validator_out = 0;
  ParticipantId worker_in = 0;
  friend bool operator==(const RoleSwap&, const RoleSwap&) = default;
};

// First 8 bytes of SHA-256("sabfl-roles" || prev_hash || round).
RoleSeed role_seed(const Hash256& prev_hash, std::uint64_t round);

// Uniform in (0, 1) for `id`, derived from the round's role seed.
double election_uniform(const RoleSeed& seed, ParticipantId id);

// Stake-weighted sampling without replacement (Efraimidis-Spirakis keys
// log(u)/stake, ties to the lower id): the first pick is the miner, the next
// V are validators, everyone else works. Needs |ledger| >= K + V + 1.
RoleAssignment elect_roles(const StakeLedger& ledger, std::uint64_t round, const Hash256& prev_hash,
                           std::size_t num_workers, std::size_t num_validators);

// Applies swaps in order; throws ConfigError if a swap does not move a
// current validator out and a current worker in.
RoleAssignment apply_swaps(RoleAssignment roles, const std::vector<RoleSwap>& swaps);

}  // namespace sabfl
