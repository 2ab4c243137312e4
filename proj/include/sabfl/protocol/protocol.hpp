#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sabfl/chain/chain.hpp"
#include "sabfl/core/model.hpp"
#include "sabfl/data/dataset.hpp"
#include "sabfl/protocol/config.hpp"
#include "sabfl/protocol/stopping.hpp"

namespace sabfl {

struct RoundReport {
  std::uint64_t round = 0;
  RoleAssignment roles;
  std::vector<RoleSwap> role_swaps;
  ScoreVector scores;
  double test_accuracy = 0.0;
  double global_loss = 0.0;  // mean cross-entropy on the test split
  double wall_time_ms = 0.0;
  std::vector<ParticipantId> batch_clamped;  // workers whose shard was smaller than B
  std::optional<std::size_t> krum_selected;
};

// Datasets, shards, stakes and chain of one run. Participant ids are
// 0..N-1 and participant i owns shards[i].
struct RunState {
  RunConfig cfg;
  ModelSpec spec;
  Dataset train;
  Dataset test;
  Minibatch test_batch;
  std::vector<DataShard> shards;
  StakeLedger ledger;
  AttackConfig attack;  // malicious ids resolved
  std::vector<int> flip_map;
  Chain chain;
};

// Loads or generates data, partitions it, assigns stakes and malicious ids,
// and creates the genesis block holding the initial weights.
RunState prepare_run(const RunConfig& cfg);

// One full round: election, malicious-validator cap, local training,
// validator scoring, aggregation, block append. Throws ProtocolFault (chain
// unchanged) if any step fails.
std::pair<Block, RoundReport> run_round(RunState& state);

struct RunReport {
  RunConfig cfg;
  std::vector<RoundReport> rounds;
  StoppingState stopping;
  double final_accuracy = 0.0;
  std::optional<std::string> fault;
  Hash256 chain_tip{};
  std::size_t chain_length = 0;
};

// Rounds until the stopping rule fires or max_rounds. With an output
// directory, writes chain.jsonl + chain.weights, rounds.csv and summary.json.
RunReport run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir = std::nullopt);
// Same, also handing back the final state (chain included).
RunReport run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                         std::optional<RunState>* final_state);

void write_rounds_csv(const RunReport& report, const std::filesystem::path& path);
void write_summary_json(const RunReport& report, const std::filesystem::path& path);

}  // namespace sabfl
