#include "sabfl/chain/block.hpp"

#include <algorithm>

#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

void put_ids(ByteWriter& w, const std::vector<ParticipantId>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (auto id : ids) w.u32(id);
}

void put_shape(ByteWriter& w, const Shape& s) {
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u32(s.input_dim);
  w.u32(s.num_classes);
  w.u32(s.hidden_dim);
}

void put_params(ByteWriter& w, const ParamVector& p) {
  put_shape(w, p.shape);
  w.u32(static_cast<std::uint32_t>(p.size()));
  w.reals(p.values);
}

void put_matrix(ByteWriter& w, const LossMatrix& m) {
  put_ids(w, m.validator_ids);
  put_ids(w, m.worker_ids);
  w.u32(static_cast<std::uint32_t>(m.entries.size()));
  w.reals(m.entries);
}

// Structural agreement between roles, matrices and weights.
void check_inputs(const BlockInputs& in) {
  const auto& r = in.roles;
  if (in.loss_matrix.validator_ids != r.validators || in.loss_matrix.worker_ids != r.workers) {
    throw ProtocolFault("loss matrix ids do not match the round's roles");
  }
  try {
    in.loss_matrix.check();
    if (in.accuracy_matrix) in.accuracy_matrix->check();
  } catch (const std::exception& e) {
    throw ProtocolFault(std::string("loss matrix: ") + e.what());
  }
  if (in.worker_weights.size() != r.workers.size()) throw ProtocolFault("worker weight count does not match K");
  for (auto id : r.workers) {
    if (!in.worker_weights.count(id)) throw ProtocolFault("missing weights for worker " + std::to_string(id));
  }
  const bool wants_accuracy = in.rule.kind == AggregatorKind::kSoftmaxAccuracy;
  if (wants_accuracy != in.accuracy_matrix.has_value()) {
    throw ProtocolFault("accuracy matrix must be present exactly under the softmax_accuracy rule");
  }
  if (in.accuracy_matrix && (in.accuracy_matrix->validator_ids != r.validators ||
                             in.accuracy_matrix->worker_ids != r.workers)) {
    throw ProtocolFault("accuracy matrix ids do not match the round's roles");
  }
  if (in.rule.kind == AggregatorKind::kVanilla) {
    for (auto id : r.workers) {
      if (!in.worker_sample_sizes.count(id)) throw ProtocolFault("missing sample size for worker " + std::to_string(id));
    }
  }
}

BlockInputs inputs_of(const Block& b) {
  return {b.roles, b.role_swaps, b.rule, b.worker_weights, b.worker_sample_sizes, b.loss_matrix, b.accuracy_matrix};
}

}  // namespace

const char* to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kSoftmax:
      return "softmax";
    case AggregatorKind::kSoftmaxAccuracy:
      return "softmax_accuracy";
    case AggregatorKind::kVanilla:
      return "vanilla";
    case AggregatorKind::kSimple:
      return "simple";
    case AggregatorKind::kMedian:
      return "median";
    case AggregatorKind::kKrum:
      return "krum";
  }
  return "unknown";
}

AggregatorKind aggregator_from_string(const std::string& name) {
  for (auto k : {AggregatorKind::kSoftmax, AggregatorKind::kSoftmaxAccuracy, AggregatorKind::kVanilla,
                 AggregatorKind::kSimple, AggregatorKind::kMedian, AggregatorKind::kKrum}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown aggregator '" + name + "'");
}

const char* to_string(FaultCode code) {
  switch (code) {
    case FaultCode::kOk:
      return "ok";
    case FaultCode::kMalformed:
      return "malformed";
    case FaultCode::kLinkage:
      return "linkage";
    case FaultCode::kRoundSequence:
      return "round-sequence";
    case FaultCode::kRoleSeed:
      return "role-seed";
    case FaultCode::kRoleMismatch:
      return "role-mismatch";
    case FaultCode::kHashMismatch:
      return "hash-mismatch";
    case FaultCode::kScoreMismatch:
      return "score-mismatch";
    case FaultCode::kAggregationMismatch:
      return "aggregation-mismatch";
    case FaultCode::kGenesis:
      return "genesis";
  }
  return "unknown";
}

std::vector<std::uint8_t> Block::canonical_bytes() const {
  ByteWriter w;
  static constexpr std::string_view kTag = "sabfl-block-v1";
  w.bytes({reinterpret_cast<const std::uint8_t*>(kTag.data()), kTag.size()});
  w.u64(round);
  w.bytes(prev_hash);
  w.bytes(role_seed);
  w.u64(roles.round);
  put_ids(w, roles.workers);
  put_ids(w, roles.validators);
  w.u32(roles.miner);
  w.u32(static_cast<std::uint32_t>(role_swaps.size()));
  for (const auto& s : role_swaps) {
    w.u32(s.validator_out);
    w.u32(s.worker_in);
  }
  w.u8(static_cast<std::uint8_t>(rule.kind));
  w.u32(rule.krum_f);
  w.u32(static_cast<std::uint32_t>(worker_weights.size()));
  for (const auto& [id, p] : worker_weights) {
    w.u32(id);
    put_params(w, p);
  }
  w.u32(static_cast<std::uint32_t>(worker_sample_sizes.size()));
  for (const auto& [id, n] : worker_sample_sizes) {
    w.u32(id);
    w.u64(n);
  }
  put_matrix(w, loss_matrix);
  w.u8(accuracy_matrix ? 1 : 0);
  if (accuracy_matrix) put_matrix(w, *accuracy_matrix);
  w.u32(static_cast<std::uint32_t>(scores.scores.size()));
  w.reals(scores.scores);
  put_params(w, global_weight);
  w.u8(genesis ? 1 : 0);
  if (genesis) {
    w.u32(static_cast<std::uint32_t>(genesis->ledger.size()));
    for (const auto& [id, s] : genesis->ledger.stakes()) {
      w.u32(id);
      w.f64(s);
    }
    w.u32(genesis->num_workers);
    w.u32(genesis->num_validators);
  }
  return w.take();
}

Block make_genesis(const StakeLedger& ledger, std::size_t num_workers, std::size_t num_validators,
                   ParamVector initial_weight) {
  if (ledger.size() < num_workers + num_validators + 1) {
    throw ConfigError("genesis: ledger smaller than K + V + 1");
  }
  Block g;
  g.round = 0;
  g.global_weight = std::move(initial_weight);
  g.genesis = GenesisParams{ledger, static_cast<std::uint32_t>(num_workers),
                            static_cast<std::uint32_t>(num_validators)};
  g.block_hash = g.compute_hash();
  return g;
}

AggregationOutcome recompute_aggregation(const BlockInputs& in) {
  check_inputs(in);
  std::vector<ParamVector> weights;
  weights.reserve(in.roles.workers.size());
  for (auto id : in.roles.workers) weights.push_back(in.worker_weights.at(id));

  AggregationOutcome out;
  if (in.rule.kind == AggregatorKind::kSoftmaxAccuracy) {
    auto agg = aggregate_softmax_accuracy(weights, *in.accuracy_matrix);
    out.scores = std::move(agg.scores);
    out.global_weight = std::move(agg.weights);
    return out;
  }
  auto agg = aggregate_softmax(weights, in.loss_matrix);
  out.scores = std::move(agg.scores);
  switch (in.rule.kind) {
    case AggregatorKind::kSoftmax:
      out.global_weight = std::move(agg.weights);
      break;
    case AggregatorKind::kVanilla: {
      std::vector<std::size_t> sizes;
      for (auto id : in.roles.workers) sizes.push_back(in.worker_sample_sizes.at(id));
      out.global_weight = aggregate_vanilla(weights, sizes);
      break;
    }
    case AggregatorKind::kSimple:
      out.global_weight = aggregate_simple(weights);
      break;
    case AggregatorKind::kMedian:
      out.global_weight = aggregate_median(weights);
      break;
    case AggregatorKind::kKrum: {
      auto k = aggregate_krum(weights, in.rule.krum_f);
      out.global_weight = std::move(k.weights);
      out.krum_selected = k.selected;
      break;
    }
    case AggregatorKind::kSoftmaxAccuracy:
      break;
  }
  return out;
}

Block build_block(std::uint64_t round, const Hash256& prev_hash, BlockInputs in) {
  if (round == 0) throw ProtocolFault("round 0 is reserved for genesis");
  if (in.roles.round != round) throw ProtocolFault("role assignment is for a different round");
  AggregationOutcome agg;
  try {
    agg = recompute_aggregation(in);
  } catch (const ProtocolFault&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolFault(std::string("aggregation failed: ") + e.what());
  }
  Block b;
  b.round = round;
  b.prev_hash = prev_hash;
  b.role_seed = sabfl::role_seed(prev_hash, round);
  b.roles = std::move(in.roles);
  b.role_swaps = std::move(in.role_swaps);
  b.rule = in.rule;
  b.worker_weights = std::move(in.worker_weights);
  if (b.rule.kind == AggregatorKind::kVanilla) b.worker_sample_sizes = std::move(in.worker_sample_sizes);
  b.loss_matrix = std::move(in.loss_matrix);
  b.accuracy_matrix = std::move(in.accuracy_matrix);
  b.scores = std::move(agg.scores);
  b.global_weight = std::move(agg.global_weight);
  b.block_hash = b.compute_hash();
  return b;
}

ValidationResult validate_block(const Block& block, const Hash256& prev_hash) {
  const auto r = block.round;
  if (block.prev_hash != prev_hash) {
    return ValidationResult::fault(FaultCode::kLinkage, r, "prev_hash does not match predecessor");
  }
  if (block.compute_hash() != block.block_hash) {
    return ValidationResult::fault(FaultCode::kHashMismatch, r, "block_hash does not match contents");
  }
  if (block.is_genesis()) {
    if (!block.genesis) return ValidationResult::fault(FaultCode::kGenesis, r, "round 0 without genesis params");
    if (!block.global_weight.consistent() || !block.global_weight.all_finite()) {
      return ValidationResult::fault(FaultCode::kGenesis, r, "initial weight malformed");
    }
    return {};
  }
  if (block.genesis) return ValidationResult::fault(FaultCode::kGenesis, r, "genesis params outside round 0");
  if (block.role_seed != role_seed(block.prev_hash, r) || block.roles.round != r) {
    return ValidationResult::fault(FaultCode::kRoleSeed, r, "role seed or role round inconsistent");
  }
  if (block.rule.kind != AggregatorKind::kVanilla && !block.worker_sample_sizes.empty()) {
    return ValidationResult::fault(FaultCode::kMalformed, r, "sample sizes recorded for a non-vanilla rule");
  }
  AggregationOutcome agg;
  try {
    agg = recompute_aggregation(inputs_of(block));
  } catch (const std::exception& e) {
    return ValidationResult::fault(FaultCode::kMalformed, r, e.what());
  }
  if (!bit_identical(agg.scores.scores, block.scores.scores)) {
    return ValidationResult::fault(FaultCode::kScoreMismatch, r, "scores differ from recomputation");
  }
  if (agg.global_weight.shape != block.global_weight.shape ||
      !bit_identical(agg.global_weight.values, block.global_weight.values)) {
    return ValidationResult::fault(FaultCode::kAggregationMismatch, r, "global weight differs from recomputation");
  }
  return {};
}

}  // namespace sabfl
