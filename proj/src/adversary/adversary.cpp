#include "sabfl/adversary/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sabfl/util/error.hpp"

namespace sabfl {

std::vector<int> reverse_flip_map(std::size_t num_classes) {
  std::vector<int> m(num_classes);
  for (std::size_t l = 0; l < num_classes; ++l) m[l] = static_cast<int>(num_classes - 1 - l);
  return m;
}

void AttackConfig::check(std::size_t num_classes) const {
  if (!(max_malicious_validator_fraction >= 0.0 && max_malicious_validator_fraction <= 0.5)) {
    throw ConfigError("malicious validator fraction cap must lie in [0, 0.5]");
  }
  if (flip_map.empty()) return;
  if (flip_map.size() != num_classes) throw ConfigError("flip map must cover every class");
  std::vector<bool> hit(num_classes, false);
  for (int t : flip_map) {
    if (t < 0 || static_cast<std::size_t>(t) >= num_classes || hit[t]) {
      throw ConfigError("flip map is not a bijection on the class labels");
    }
    hit[t] = true;
  }
}

std::vector<int> AttackConfig::resolved_flip_map(std::size_t num_classes) const {
  check(num_classes);
  return flip_map.empty() ? reverse_flip_map(num_classes) : flip_map;
}

ShardView flip_labels(const ShardView& shard, const std::vector<int>& flip_map) {
  // Compose with any existing map so repeated flips stack.
  std::vector<int> composed = flip_map;
  if (!shard.label_map().empty()) {
    composed.resize(shard.label_map().size());
    for (std::size_t l = 0; l < composed.size(); ++l) {
      const int mid = shard.label_map()[l];
      if (mid < 0 || static_cast<std::size_t>(mid) >= flip_map.size()) {
        throw ConfigError("label " + std::to_string(mid) + " outside flip map domain");
      }
      composed[l] = flip_map[mid];
    }
  }
  ShardView view = shard.with_label_map(std::move(composed));
  for (std::size_t pos = 0; pos < view.size(); ++pos) view.label(pos);  // domain check
  return view;
}

ParamVector malicious_worker_update(const ModelSpec& spec, const ParamVector& w0, const ShardView& shard,
                                    const std::vector<int>& flip_map, const SgdConfig& cfg, std::uint64_t seed) {
  return local_sgd(spec, w0, flip_labels(shard, flip_map), cfg, seed);
}

std::vector<double> malicious_validator_losses(const ModelSpec& spec, std::span<const ParamVector> worker_weights,
                                               const ShardView& shard, const std::vector<int>& flip_map) {
  const Minibatch batch = flip_labels(shard, flip_map).all();
  std::vector<double> row;
  row.reserve(worker_weights.size());
  for (const auto& w : worker_weights) row.push_back(eval_loss(spec, w, batch));
  return row;
}

CappedRoles cap_malicious_validators(const RoleAssignment& roles, const AttackConfig& cfg, std::uint64_t seed) {
  CappedRoles out{roles, {}};
  const auto cap = static_cast<std::size_t>(
      std::floor(cfg.max_malicious_validator_fraction * static_cast<double>(roles.validators.size())));
  std::vector<ParticipantId> bad, honest_workers;
  for (auto id : roles.validators) {
    if (cfg.is_malicious(id)) bad.push_back(id);
  }
  if (bad.size() <= cap) return out;
  for (auto id : roles.workers) {
    if (!cfg.is_malicious(id)) honest_workers.push_back(id);
  }
  const std::size_t excess = bad.size() - cap;
  if (honest_workers.size() < excess) {
    throw ConfigError("not enough honest workers to cap malicious validators");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(bad.begin(), bad.end(), rng);
  std::shuffle(honest_workers.begin(), honest_workers.end(), rng);
  for (std::size_t i = 0; i < excess; ++i) out.swaps.push_back({bad[i], honest_workers[i]});
  out.roles = apply_swaps(roles, out.swaps);
  return out;
}

}  // namespace sabfl
