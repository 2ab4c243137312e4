#include "sabfl/chain/election.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {

StakeLedger::StakeLedger(const std::map<ParticipantId, double>& stakes) {
  for (const auto& [id, s] : stakes) set_stake(id, s);
}

void StakeLedger::set_stake(ParticipantId id, double stake) {
  if (!std::isfinite(stake) || !(stake > 0.0)) {
    throw ConfigError("stake of participant " + std::to_string(id) + " must be finite and > 0");
  }
  stakes_[id] = stake;
}

double StakeLedger::stake(ParticipantId id) const {
  auto it = stakes_.find(id);
  if (it == stakes_.end()) throw ConfigError("unknown participant " + std::to_string(id));
  return it->second;
}

Role RoleAssignment::role_of(ParticipantId id) const {
  if (id == miner) return Role::kMiner;
  if (std::binary_search(validators.begin(), validators.end(), id)) return Role::kValidator;
  if (std::binary_search(workers.begin(), workers.end(), id)) return Role::kWorker;
  throw ConfigError("participant " + std::to_string(id) + " holds no role");
}

bool RoleAssignment::partitions(const std::vector<ParticipantId>& universe) const {
  std::vector<ParticipantId> all = workers;
  all.insert(all.end(), validators.begin(), validators.end());
  all.push_back(miner);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) return false;
  std::vector<ParticipantId> u = universe;
  std::sort(u.begin(), u.end());
  return all == u;
}

RoleSeed role_seed(const Hash256& prev_hash, std::uint64_t round) {
  ByteWriter w;
  static constexpr std::string_view kTag = "sabfl-roles";
  w.bytes({reinterpret_cast<const std::uint8_t*>(kTag.data()), kTag.size()});
  w.bytes(prev_hash);
  w.u64(round);
  const Hash256 h = sha256(w.data());
  RoleSeed seed{};
  std::copy_n(h.begin(), seed.size(), seed.begin());
  return seed;
}

double election_uniform(const RoleSeed& seed, ParticipantId id) {
  ByteWriter w;
  w.bytes(seed);
  w.u32(id);
  const Hash256 h = sha256(w.data());
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits = (bits << 8) | h[i];
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

RoleAssignment elect_roles(const StakeLedger& ledger, std::uint64_t round, const Hash256& prev_hash,
                           std::size_t num_workers, std::size_t num_validators) {
  if (ledger.size() < num_workers + num_validators + 1) {
    throw ConfigError("election needs at least K + V + 1 = " +
                      std::to_string(num_workers + num_validators + 1) + " participants, ledger has " +
                      std::to_string(ledger.size()));
  }
  const RoleSeed seed = role_seed(prev_hash, round);
  struct Keyed {
    double key;
    ParticipantId id;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(ledger.size());
  for (const auto& [id, stake] : ledger.stakes()) {
    keyed.push_back({std::log(election_uniform(seed, id)) / stake, id});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return a.key != b.key ? a.key > b.key : a.id < b.id;
  });

  RoleAssignment roles;
  roles.round = round;
  roles.miner = keyed[0].id;
  for (std::size_t i = 1; i <= num_validators; ++i) roles.validators.push_back(keyed[i].id);
  for (std::size_t i = num_validators + 1; i < keyed.size(); ++i) roles.workers.push_back(keyed[i].id);
  std::sort(roles.validators.begin(), roles.validators.end());
  std::sort(roles.workers.begin(), roles.workers.end());
  return roles;
}

RoleAssignment apply_swaps(RoleAssignment roles, const std::vector<RoleSwap>& swaps) {
  for (const auto& s : swaps) {
    auto v = std::find(roles.validators.begin(), roles.validators.end(), s.validator_out);
    auto w = std::find(roles.workers.begin(), roles.workers.end(), s.worker_in);
    if (v == roles.validators.end() || w == roles.workers.end()) {
      throw ConfigError("invalid role swap " + std::to_string(s.validator_out) + " <-> " +
                        std::to_string(s.worker_in));
    }
    *v = s.worker_in;
    *w = s.validator_out;
    std::sort(roles.validators.begin(), roles.validators.end());
    std::sort(roles.workers.begin(), roles.workers.end());
  }
  return roles;
}

}  // namespace sabfl
