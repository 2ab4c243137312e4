#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sabfl/chain/chain_io.hpp"
#include "sabfl/protocol/protocol.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

namespace fs = std::filesystem;

RunConfig small_run() {
  RunConfig c;
  c.num_participants = 8;
  c.num_workers = 5;
  c.num_validators = 2;
  c.train_samples = 800;
  c.test_samples = 200;
  c.input_dim = 6;
  c.num_classes = 3;
  c.class_separation = 5.0;
  c.lr = 0.1;
  c.batch_size = 16;
  c.epochs = 2;
  c.max_rounds = 20;
  c.stopping_window = 5;
  return c;
}

StoppingState feed(const std::vector<double>& acc, std::size_t window) {
  StoppingState s;
  for (double a : acc) {
    if (s.stopped()) break;
    s = update_stopping(s, a, window);
  }
  return s;
}

TEST(Config, ParsesKeyValueLines) {
  std::istringstream in(
      "# comment\n"
      "workers = 5\nvalidators=2\nnum_participants = 8  # trailing\n"
      "aggregator = median\nlr = 0.25\nmodel = mlp\nhidden_dim = 7\npartition_lambda = 0.1\n");
  const auto c = parse_run_config(in);
  EXPECT_EQ(c.num_workers, 5u);
  EXPECT_EQ(c.num_validators, 2u);
  EXPECT_EQ(c.aggregator, AggregatorKind::kMedian);
  EXPECT_DOUBLE_EQ(c.lr, 0.25);
  EXPECT_EQ(c.model, ModelKind::kMlp);
  EXPECT_EQ(c.hidden_dim, 7u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  std::istringstream unknown("wokers = 5\n");
  EXPECT_THROW(parse_run_config(unknown), ConfigError);
  std::istringstream bad_num("lr = fast\n");
  EXPECT_THROW(parse_run_config(bad_num), ConfigError);
  std::istringstream neg("epochs = -1\n");
  EXPECT_THROW(parse_run_config(neg), ConfigError);
  std::istringstream roles("workers = 10\n");
  EXPECT_THROW(parse_run_config(roles), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/run.cfg"), ConfigError);
}

TEST(Config, CanonicalFormRoundTrips) {
  RunConfig c = small_run();
  c.aggregator = AggregatorKind::kKrum;
  c.krum_f = 1;
  c.lr_schedule = LrSchedule::kInverse;
  c.lr_decay = 0.05;
  c.num_malicious = 2;
  c.stake_mode = StakeMode::kUniform;
  const std::string text = to_settings(c);
  std::istringstream in(text);
  EXPECT_EQ(to_settings(parse_run_config(in)), text);
}

TEST(Config, InverseScheduleDecays) {
  RunConfig c;
  c.lr = 0.2;
  EXPECT_DOUBLE_EQ(c.learning_rate(7), 0.2);
  c.lr_schedule = LrSchedule::kInverse;
  c.lr_decay = 0.5;
  EXPECT_DOUBLE_EQ(c.learning_rate(1), 0.2);
  EXPECT_DOUBLE_EQ(c.learning_rate(3), 0.1);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  RunConfig c;
  c.source = DatasetSource::kCsv;
  c.train_csv = "data/train.csv";
  c.test_csv = "/abs/test.csv";
  resolve_paths(c, "/etc/runs");
  EXPECT_EQ(c.train_csv, "/etc/runs/data/train.csv");
  EXPECT_EQ(c.test_csv, "/abs/test.csv");
}

TEST(Stopping, WorkedExampleWindowThree) {
  const auto s = feed({0.5, 0.6, 0.7, 0.7, 0.7, 0.65, 0.9}, 3);
  ASSERT_TRUE(s.stopped());
  EXPECT_EQ(*s.stopped_at, 6u);
  EXPECT_EQ(*s.final_accuracy, 0.7);
  ASSERT_EQ(s.k_values.size(), 4u);
  EXPECT_DOUBLE_EQ(s.k_values[0], 0.5 / 0.7);
  EXPECT_DOUBLE_EQ(s.k_values[1], 0.6 / 0.7);
  EXPECT_DOUBLE_EQ(s.k_values[2], 1.0);
  EXPECT_DOUBLE_EQ(s.k_values[3], 0.65 / 0.7);
  EXPECT_EQ(s.k_at(3, 3), s.k_values[0]);
  EXPECT_FALSE(s.k_at(2, 3).has_value());
}

TEST(Stopping, ConstantSequenceNeverStops) {
  const auto s = feed(std::vector<double>(100, 0.42), 5);
  EXPECT_FALSE(s.stopped());
  for (double k : s.k_values) EXPECT_EQ(k, 1.0);
  EXPECT_EQ(s.best_accuracy(), 0.42);
}

TEST(Stopping, ZeroWindowIsGuarded) {
  const auto s = feed({0.0, 0.0, 0.0, 0.3}, 2);
  EXPECT_EQ(s.k_values.front(), 1.0);
  EXPECT_TRUE(s.stopped());  // k drops from 1 to 0 at round 4
  EXPECT_EQ(*s.final_accuracy, 0.3);
}

TEST(Stopping, MisuseIsConfigError) {
  EXPECT_THROW(update_stopping({}, 0.5, 1), ConfigError);
  const auto s = feed({0.5, 0.6, 0.7, 0.7, 0.7, 0.65}, 3);
  EXPECT_THROW(update_stopping(s, 0.5, 3), ConfigError);
}

TEST(Protocol, SingleRoundMakesOneBlock) {
  RunConfig c = small_run();
  c.max_rounds = 1;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.rounds.size(), 1u);
  EXPECT_EQ(r.chain_length, 2u);
  EXPECT_FALSE(r.stopping.stopped());
  EXPECT_EQ(r.final_accuracy, r.rounds[0].test_accuracy);
}

TEST(Protocol, HonestRunLearnsAndEmitsValidChain) {
  const auto dir = fs::temp_directory_path() / "sabfl_protocol_honest";
  fs::remove_all(dir);
  std::optional<RunState> state;
  const auto r = run_experiment(small_run(), dir, &state);
  EXPECT_FALSE(r.fault.has_value());
  EXPECT_GT(r.final_accuracy, 0.9);
  ASSERT_TRUE(state.has_value());
  EXPECT_TRUE(validate_chain(state->chain).ok());
  EXPECT_EQ(state->chain.tip().block_hash, r.chain_tip);
  const auto files = ChainFiles::in_dir(dir);
  const auto v = validate_chain_files(files);
  EXPECT_TRUE(v.ok()) << v.detail;
  EXPECT_TRUE(fs::exists(dir / "rounds.csv"));
  std::ifstream js(dir / "summary.json");
  const auto summary = nlohmann::json::parse(js);
  EXPECT_EQ(summary.at("aggregator"), "softmax");
  EXPECT_EQ(summary.at("final_accuracy").get<double>(), r.final_accuracy);
}

TEST(Protocol, DeterministicAcrossRunsAndThreads) {
  RunConfig c = small_run();
  c.max_rounds = 5;
  c.num_malicious = 2;
  const auto a = run_experiment(c);
  c.threads = 3;
  const auto b = run_experiment(c);
  EXPECT_EQ(a.chain_tip, b.chain_tip);
  EXPECT_EQ(a.final_accuracy, b.final_accuracy);
  c.seed = 1;
  EXPECT_NE(run_experiment(c).chain_tip, a.chain_tip);
}

TEST(Protocol, MaliciousValidatorsStayCapped) {
  RunConfig c = small_run();
  c.num_participants = 10;
  c.num_workers = 5;
  c.num_validators = 4;
  c.num_malicious = 5;
  c.max_rounds = 15;
  c.stopping_window = 30;
  std::optional<RunState> state;
  const auto r = run_experiment(c, std::nullopt, &state);
  ASSERT_TRUE(state.has_value());
  bool swapped = false;
  for (const auto& round : r.rounds) {
    std::size_t bad = 0;
    for (auto v : round.roles.validators) bad += state->attack.is_malicious(v);
    EXPECT_LE(bad, 2u);
    swapped = swapped || !round.role_swaps.empty();
  }
  EXPECT_TRUE(swapped);
  EXPECT_TRUE(validate_chain(state->chain).ok());
}

TEST(Protocol, RoundFailureLeavesChainUntouched) {
  auto state = prepare_run(small_run());
  run_round(state);
  const auto tip = state.chain.tip().block_hash;
  for (auto& shard : state.shards) shard.indices.clear();
  EXPECT_THROW(run_round(state), ProtocolFault);
  EXPECT_EQ(state.chain.size(), 2u);
  EXPECT_EQ(state.chain.tip().block_hash, tip);
}

}  // namespace
}  // namespace sabfl
