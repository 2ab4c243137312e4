#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "sabfl/adversary/adversary.hpp"
#include "sabfl/data/synthetic.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

std::vector<std::size_t> iota_n(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

TEST(FlipMap, ReverseIsAnInvolution) {
  EXPECT_EQ(reverse_flip_map(4), (std::vector<int>{3, 2, 1, 0}));
  EXPECT_EQ(reverse_flip_map(1), (std::vector<int>{0}));
  AttackConfig a;
  EXPECT_EQ(a.resolved_flip_map(3), (std::vector<int>{2, 1, 0}));
  a.flip_map = {1, 2, 0};
  EXPECT_EQ(a.resolved_flip_map(3), (std::vector<int>{1, 2, 0}));
}

TEST(FlipMap, RejectsNonBijectionsAndBadCaps) {
  AttackConfig a;
  a.flip_map = {0, 0, 1};
  EXPECT_THROW(a.check(3), ConfigError);
  a.flip_map = {0, 1};
  EXPECT_THROW(a.check(3), ConfigError);
  a.flip_map = {0, 1, 3};
  EXPECT_THROW(a.check(3), ConfigError);
  a.flip_map.clear();
  a.max_malicious_validator_fraction = 0.6;
  EXPECT_THROW(a.check(3), ConfigError);
}

TEST(FlipLabels, RelabelsWithoutTouchingData) {
  const auto ds = generate_synthetic(12, {3, 4, 2.0, 1});
  const auto rows = iota_n(12);
  ShardView v(ds, rows);
  const auto f = flip_labels(v, reverse_flip_map(4));
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(f.label(i), 3 - v.label(i));
  EXPECT_EQ(f.all().features, v.all().features);
  // Flipping twice with an involution restores the labels.
  const auto back = flip_labels(f, reverse_flip_map(4));
  EXPECT_EQ(back.all().labels, v.all().labels);
}

TEST(MaliciousWorker, PoisonedUpdateScoresWorse) {
  const auto [train, test] = generate_synthetic_split(800, 400, {6, 4, 4.0, 3});
  const auto spec = ModelSpec::logistic(6, 4);
  const auto rows = iota_n(train.size());
  ShardView shard(train, rows);
  const auto w0 = init_weights(spec, 0);
  const SgdConfig sgd{3, 0.1, 32};
  const auto honest = local_sgd(spec, w0, shard, sgd, 1);
  const auto bad = malicious_worker_update(spec, w0, shard, reverse_flip_map(4), sgd, 1);
  const auto mb = test.to_minibatch();
  EXPECT_GT(eval_loss(spec, bad, mb), eval_loss(spec, honest, mb) + 1.0);
  EXPECT_LT(eval_accuracy(spec, bad, mb), 0.2);
  EXPECT_GT(eval_accuracy(spec, honest, mb), 0.9);
  // Same seed, same labels: identical to training on the flipped view directly.
  EXPECT_TRUE(bit_identical(bad.values, local_sgd(spec, w0, flip_labels(shard, reverse_flip_map(4)), sgd, 1).values));
}

TEST(MaliciousValidator, ReportsLossesOnFlippedLabels) {
  const auto [train, test] = generate_synthetic_split(400, 100, {5, 3, 4.0, 8});
  const auto spec = ModelSpec::logistic(5, 3);
  const auto rows = iota_n(100);
  ShardView shard(test, rows);
  const auto all = iota_n(train.size());
  const auto good = local_sgd(spec, init_weights(spec, 1), ShardView(train, all), {3, 0.1, 16}, 2);
  const std::vector<ParamVector> ws{good, init_weights(spec, 5)};
  const auto row = malicious_validator_losses(spec, ws, shard, reverse_flip_map(3));
  const auto flipped = flip_labels(shard, reverse_flip_map(3)).all();
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row[0], eval_loss(spec, good, flipped));
  EXPECT_EQ(row[1], eval_loss(spec, ws[1], flipped));
  // The well-trained model looks worst to a lying validator.
  EXPECT_GT(row[0], row[1]);
}

TEST(Cap, KeepsAtMostHalfTheCommittee) {
  const RoleAssignment roles{3, {0, 1, 2, 3, 4, 5}, {6, 7, 8}, 9};
  AttackConfig a;
  a.malicious_ids = {1, 6, 7, 8};
  const auto out = cap_malicious_validators(roles, a, 11);
  EXPECT_EQ(out.swaps.size(), 2u);
  EXPECT_EQ(out.roles.validators.size(), 3u);
  EXPECT_EQ(out.roles.workers.size(), 6u);
  EXPECT_EQ(out.roles.miner, 9u);
  std::size_t bad = 0;
  for (auto v : out.roles.validators) bad += a.is_malicious(v);
  EXPECT_EQ(bad, 1u);
  for (const auto& s : out.swaps) {
    EXPECT_TRUE(a.is_malicious(s.validator_out));
    EXPECT_FALSE(a.is_malicious(s.worker_in));
  }
  EXPECT_EQ(apply_swaps(roles, out.swaps), out.roles);
  const auto again = cap_malicious_validators(roles, a, 11);
  EXPECT_EQ(again.swaps, out.swaps);
}

TEST(Cap, ZeroCapAndNoOpCases) {
  const RoleAssignment roles{1, {0, 1, 2, 3}, {4, 5}, 6};
  AttackConfig a;
  a.malicious_ids = {4};
  EXPECT_TRUE(cap_malicious_validators(roles, a, 0).swaps.empty());  // floor(0.5 * 2) = 1
  a.max_malicious_validator_fraction = 0.0;
  const auto out = cap_malicious_validators(roles, a, 0);
  ASSERT_EQ(out.swaps.size(), 1u);
  EXPECT_EQ(out.swaps[0].validator_out, 4u);
  a.malicious_ids = {0, 1, 2, 3, 4, 5};
  EXPECT_THROW(cap_malicious_validators(roles, a, 0), ConfigError);
}

}  // namespace
}  // namespace sabfl
