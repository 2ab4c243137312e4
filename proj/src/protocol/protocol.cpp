#include "sabfl/protocol/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>

#include "json.hpp"
#include "sabfl/adversary/adversary.hpp"
#include "sabfl/chain/chain_io.hpp"
#include "sabfl/core/sgd.hpp"
#include "sabfl/data/io.hpp"
#include "sabfl/data/synthetic.hpp"
#include "sabfl/util/error.hpp"
#include "sabfl/util/parallel.hpp"
#include "sabfl/util/seed.hpp"

namespace sabfl {
namespace {

enum SeedTag : std::uint64_t { kData = 1, kPartition, kInit, kMalicious, kTrain, kCap };

std::pair<Dataset, Dataset> load_data(const RunConfig& cfg) {
  switch (cfg.source) {
    case DatasetSource::kSynthetic: {
      SyntheticConfig s{cfg.input_dim, cfg.num_classes, cfg.class_separation, derive_seed(cfg.seed, {kData})};
      return generate_synthetic_split(cfg.train_samples, cfg.test_samples, s);
    }
    case DatasetSource::kIdx: {
      auto train = load_idx(cfg.train_images, cfg.train_labels, Split::kTrain);
      auto test = load_idx(cfg.test_images, cfg.test_labels, Split::kTest);
      const auto classes = std::max(train.num_classes, test.num_classes);
      train.num_classes = test.num_classes = classes;
      return {std::move(train), std::move(test)};
    }
    case DatasetSource::kCsv: {
      auto train = read_csv(cfg.train_csv, 0, Split::kTrain);
      auto test = read_csv(cfg.test_csv, train.num_classes, Split::kTest);
      return {std::move(train), std::move(test)};
    }
  }
  throw ConfigError("unknown dataset source");
}

std::set<ParticipantId> pick_malicious(const RunConfig& cfg) {
  if (!cfg.attack.malicious_ids.empty()) return cfg.attack.malicious_ids;
  std::vector<ParticipantId> ids(cfg.num_participants);
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<ParticipantId>(i);
  std::mt19937_64 rng(derive_seed(cfg.seed, {kMalicious}));
  std::shuffle(ids.begin(), ids.end(), rng);
  return {ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cfg.num_malicious)};
}

}  // namespace

RunState prepare_run(const RunConfig& cfg) {
  cfg.validate();
  auto [train, test] = load_data(cfg);
  train.check();
  test.check();

  ModelSpec spec = cfg.model == ModelKind::kMlp ? ModelSpec::mlp(train.input_dim, cfg.hidden_dim, train.num_classes)
                                                : ModelSpec::logistic(train.input_dim, train.num_classes);

  PartitionConfig pc{cfg.partition_lambda, cfg.num_participants, derive_seed(cfg.seed, {kPartition}),
                     cfg.effective_min_shard_size()};
  auto shards = partition(train, pc);

  StakeLedger ledger;
  for (const auto& s : shards) {
    ledger.set_stake(s.owner, cfg.stake_mode == StakeMode::kShardSize ? static_cast<double>(s.indices.size()) : 1.0);
  }

  AttackConfig attack = cfg.attack;
  attack.malicious_ids = pick_malicious(cfg);
  auto flip_map = attack.resolved_flip_map(train.num_classes);

  Block genesis = make_genesis(ledger, cfg.num_workers, cfg.num_validators,
                               init_weights(spec, derive_seed(cfg.seed, {kInit})));
  Minibatch test_batch = test.to_minibatch();
  return RunState{cfg,
                  std::move(spec),
                  std::move(train),
                  std::move(test),
                  std::move(test_batch),
                  std::move(shards),
                  std::move(ledger),
                  std::move(attack),
                  std::move(flip_map),
                  Chain(std::move(genesis))};
}

std::pair<Block, RoundReport> run_round(RunState& st) {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig& cfg = st.cfg;
  const std::uint64_t round = st.chain.next_round();
  const Block& tip = st.chain.tip();

  RoundReport report;
  report.round = round;
  BlockInputs in;
  try {
    RoleAssignment elected = elect_roles(st.ledger, round, tip.block_hash, cfg.num_workers, cfg.num_validators);
    CappedRoles capped{elected, {}};
    if (cfg.attack.validators_can_be_malicious) {
      capped = cap_malicious_validators(elected, st.attack, derive_seed(cfg.seed, {kCap, round}));
    }
    in.roles = capped.roles;
    in.role_swaps = capped.swaps;
    in.rule = {cfg.aggregator, cfg.krum_f};

    const auto& workers = in.roles.workers;
    const auto& validators = in.roles.validators;
    SgdConfig sgd{cfg.epochs, cfg.learning_rate(round), cfg.batch_size};

    std::vector<ParamVector> trained(workers.size());
    parallel_for(workers.size(), cfg.threads, [&](std::size_t i) {
      const ParticipantId id = workers[i];
      const ShardView shard(st.train, st.shards[id]);
      const auto seed = derive_seed(cfg.seed, {kTrain, round, id});
      trained[i] = st.attack.is_malicious(id)
                       ? malicious_worker_update(st.spec, tip.global_weight, shard, st.flip_map, sgd, seed)
                       : local_sgd(st.spec, tip.global_weight, shard, sgd, seed);
    });

    const bool want_accuracy = cfg.aggregator == AggregatorKind::kSoftmaxAccuracy;
    in.loss_matrix = LossMatrix(validators, workers);
    if (want_accuracy) in.accuracy_matrix = LossMatrix(validators, workers);
    parallel_for(validators.size(), cfg.threads, [&](std::size_t j) {
      const ParticipantId id = validators[j];
      ShardView shard(st.train, st.shards[id]);
      // Colluding validators score against the flipped labels.
      if (cfg.attack.validators_can_be_malicious && st.attack.is_malicious(id)) shard = flip_labels(shard, st.flip_map);
      const Minibatch batch = shard.all();
      for (std::size_t i = 0; i < trained.size(); ++i) {
        in.loss_matrix.at(j, i) = eval_loss(st.spec, trained[i], batch);
        if (want_accuracy) in.accuracy_matrix->at(j, i) = eval_accuracy(st.spec, trained[i], batch);
      }
    });

    for (std::size_t i = 0; i < workers.size(); ++i) {
      const auto n = st.shards[workers[i]].indices.size();
      if (cfg.batch_size > n) report.batch_clamped.push_back(workers[i]);
      in.worker_weights.emplace(workers[i], std::move(trained[i]));
      in.worker_sample_sizes.emplace(workers[i], n);
    }
  } catch (const ProtocolFault&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolFault("round " + std::to_string(round) + ": " + e.what());
  }

  if (cfg.aggregator == AggregatorKind::kKrum) {
    report.krum_selected = recompute_aggregation(in).krum_selected;
  }
  Block block = build_block(round, tip.block_hash, std::move(in));
  if (!block.global_weight.all_finite()) throw ProtocolFault("round " + std::to_string(round) + ": non-finite global weight");

  report.roles = block.roles;
  report.role_swaps = block.role_swaps;
  report.scores = block.scores;
  report.test_accuracy = eval_accuracy(st.spec, block.global_weight, st.test_batch);
  report.global_loss = eval_loss(st.spec, block.global_weight, st.test_batch);
  st.chain.append(block);
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {std::move(block), std::move(report)};
}

RunReport run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir) {
  return run_experiment(cfg, out_dir, nullptr);
}

RunReport run_experiment(const RunConfig& cfg, const std::optional<std::filesystem::path>& out_dir,
                         std::optional<RunState>* final_state) {
  RunState st = prepare_run(cfg);
  RunReport rep;
  rep.cfg = cfg;
  rep.cfg.attack.malicious_ids = st.attack.malicious_ids;
  while (rep.rounds.size() < cfg.max_rounds && !rep.stopping.stopped()) {
    try {
      auto [block, round] = run_round(st);
      rep.stopping = update_stopping(std::move(rep.stopping), round.test_accuracy, cfg.stopping_window);
      rep.rounds.push_back(std::move(round));
    } catch (const ProtocolFault& e) {
      rep.fault = e.what();
      break;
    }
  }
  rep.final_accuracy = rep.stopping.final_accuracy.value_or(rep.stopping.best_accuracy());
  rep.chain_tip = st.chain.tip().block_hash;
  rep.chain_length = st.chain.size();

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_chain(st.chain.blocks(), ChainFiles::in_dir(*out_dir));
    write_rounds_csv(rep, *out_dir / "rounds.csv");
    write_summary_json(rep, *out_dir / "summary.json");
  }
  if (final_state) final_state->emplace(std::move(st));
  return rep;
}

void write_rounds_csv(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "round,accuracy,loss,k_value\n" << std::setprecision(17);
  for (const auto& r : report.rounds) {
    out << r.round << ',' << r.test_accuracy << ',' << r.global_loss << ',';
    if (auto k = report.stopping.k_at(r.round, report.cfg.stopping_window)) out << *k;
    out << '\n';
  }
}

void write_summary_json(const RunReport& report, const std::filesystem::path& path) {
  const auto& c = report.cfg;
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["variant"] = c.variant;
  j["aggregator"] = to_string(c.aggregator);
  j["seed"] = c.seed;
  j["num_participants"] = c.num_participants;
  j["num_malicious"] = c.attack.malicious_ids.size();
  j["partition_lambda"] = c.partition_lambda;
  j["final_accuracy"] = report.final_accuracy;
  j["rounds"] = report.rounds.size();
  j["stopped"] = report.stopping.stopped();
  j["stopped_at"] = report.stopping.stopped_at ? nlohmann::json(*report.stopping.stopped_at) : nlohmann::json(nullptr);
  j["chain_tip"] = to_hex(report.chain_tip);
  j["chain_length"] = report.chain_length;
  j["fault"] = report.fault ? nlohmann::json(*report.fault) : nlohmann::json(nullptr);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace sabfl
