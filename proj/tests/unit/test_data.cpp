#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sabfl/core/model.hpp"
#include "sabfl/core/sgd.hpp"
#include "sabfl/data/io.hpp"
#include "sabfl/data/partition.hpp"
#include "sabfl/data/synthetic.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("sabfl_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

// 3 images of 2x2 pixels.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> idx_pair() {
  std::vector<std::uint8_t> img, lab;
  put_be32(img, 0x00000803);
  put_be32(img, 3);
  put_be32(img, 2);
  put_be32(img, 2);
  for (std::uint8_t v : {0, 255, 51, 102, 1, 2, 3, 4, 255, 255, 0, 0}) img.push_back(v);
  put_be32(lab, 0x00000801);
  put_be32(lab, 3);
  for (std::uint8_t v : {2, 0, 1}) lab.push_back(v);
  return {img, lab};
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0) h -= x * std::log(x);
  }
  return h;
}

TEST(Synthetic, DeterministicAndBalanced) {
  SyntheticConfig cfg{10, 4, 3.0, 17};
  const auto a = generate_synthetic(100, cfg);
  const auto b = generate_synthetic(100, cfg);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  std::vector<int> counts(4, 0);
  for (int l : a.labels) ++counts[l];
  EXPECT_EQ(counts, (std::vector<int>{25, 25, 25, 25}));
  cfg.seed = 18;
  EXPECT_NE(generate_synthetic(100, cfg).features, a.features);
}

TEST(Synthetic, SplitHasIndependentNoise) {
  const auto [train, test] = generate_synthetic_split(50, 50, {5, 2, 3.0, 1});
  EXPECT_EQ(train.split, Split::kTrain);
  EXPECT_EQ(test.split, Split::kTest);
  EXPECT_NE(train.features, test.features);
}

TEST(Synthetic, SeparatedBlobsAreLearnable) {
  const auto [train, test] = generate_synthetic_split(1000, 500, {10, 2, 5.0, 3});
  const auto spec = ModelSpec::logistic(10, 2);
  const auto rows = all_rows(train.size());
  const auto w = local_sgd(spec, init_weights(spec, 1), ShardView(train, rows), {50, 0.1, 32}, 2);
  EXPECT_GT(eval_accuracy(spec, w, test.to_minibatch()), 0.95);
}

TEST(Idx, LoadsScaledPixelsAndLabels) {
  const auto dir = temp_dir("idx_ok");
  const auto [img, lab] = idx_pair();
  write_bytes(dir / "img", img);
  write_bytes(dir / "lab", lab);
  const auto ds = load_idx(dir / "img", dir / "lab");
  EXPECT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.input_dim, 4u);
  EXPECT_EQ(ds.num_classes, 3u);
  EXPECT_EQ(ds.labels, (std::vector<int>{2, 0, 1}));
  EXPECT_DOUBLE_EQ(ds.features[1], 1.0);
  EXPECT_DOUBLE_EQ(ds.features[2], 51.0 / 255.0);
}

TEST(Idx, RejectsBadMagic) {
  const auto dir = temp_dir("idx_magic");
  auto [img, lab] = idx_pair();
  img[3] = 0x01;
  write_bytes(dir / "img", img);
  write_bytes(dir / "lab", lab);
  EXPECT_THROW(load_idx(dir / "img", dir / "lab"), IngestionError);
}

TEST(Idx, RejectsTruncatedFiles) {
  const auto dir = temp_dir("idx_trunc");
  auto [img, lab] = idx_pair();
  img.pop_back();
  write_bytes(dir / "img", img);
  write_bytes(dir / "lab", lab);
  EXPECT_THROW(load_idx(dir / "img", dir / "lab"), IngestionError);
  write_bytes(dir / "img", std::vector<std::uint8_t>{0, 0, 8});
  EXPECT_THROW(load_idx(dir / "img", dir / "lab"), IngestionError);
}

TEST(Idx, RejectsCountMismatch) {
  const auto dir = temp_dir("idx_count");
  auto [img, lab] = idx_pair();
  lab[7] = 2;
  lab.pop_back();
  write_bytes(dir / "img", img);
  write_bytes(dir / "lab", lab);
  EXPECT_THROW(load_idx(dir / "img", dir / "lab"), IngestionError);
}

TEST(Idx, MissingFileIsIngestionError) {
  EXPECT_THROW(load_idx("/nonexistent/img", "/nonexistent/lab"), IngestionError);
}

TEST(Csv, RoundTripsExactly) {
  const auto ds = generate_synthetic(30, {3, 3, 2.0, 5});
  std::stringstream ss;
  write_csv(ds, ss);
  const auto back = read_csv(ss, 3);
  EXPECT_EQ(back.input_dim, 3u);
  EXPECT_EQ(back.features, ds.features);
  EXPECT_EQ(back.labels, ds.labels);
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream bad_header("a,b,label\n1,2,0\n");
  EXPECT_THROW(read_csv(bad_header), IngestionError);
  std::istringstream bad_cell("f0,f1,label\n1,x,0\n");
  EXPECT_THROW(read_csv(bad_cell), IngestionError);
  std::istringstream short_row("f0,f1,label\n1,0\n");
  EXPECT_THROW(read_csv(short_row), IngestionError);
}

TEST(ShardView, LabelMapAndGatherOrder) {
  const auto ds = generate_synthetic(8, {2, 4, 1.0, 0});
  std::vector<std::size_t> idx{5, 1, 6};
  ShardView v(ds, idx);
  const auto flipped = v.with_label_map({3, 2, 1, 0});
  EXPECT_EQ(v.label(0), 1);
  EXPECT_EQ(flipped.label(0), 2);
  std::vector<std::size_t> pos{2, 0};
  const auto mb = flipped.gather(pos);
  EXPECT_EQ(mb.labels, (std::vector<int>{1, 2}));
  EXPECT_EQ(mb.features[0], ds.row(6)[0]);
}

TEST(Apportion, LargestRemainderTiesToLowerIndex) {
  EXPECT_EQ(apportion({1, 1, 1}, 4), (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(apportion({0.5, 0.25, 0.25}, 8), (std::vector<std::size_t>{4, 2, 2}));
  const auto parts = apportion({0.1, 0.7, 0.2}, 17);
  EXPECT_EQ(std::accumulate(parts.begin(), parts.end(), std::size_t{0}), 17u);
}

TEST(Partition, DisjointCoveringAndMinimumSize) {
  const auto ds = generate_synthetic(2000, {4, 4, 2.0, 1});
  for (double lambda : {0.1, 1.0, 10.0}) {
    const auto shards = partition(ds, {lambda, 20, 3, 40});
    ASSERT_EQ(shards.size(), 20u);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < shards.size(); ++i) {
      EXPECT_EQ(shards[i].owner, i);
      EXPECT_GE(shards[i].indices.size(), 40u);
      for (auto r : shards[i].indices) EXPECT_TRUE(seen.insert(r).second) << "row " << r << " assigned twice";
    }
    EXPECT_EQ(seen.size(), ds.size());
  }
}

TEST(Partition, DeterministicUnderSeed) {
  const auto ds = generate_synthetic(500, {4, 4, 2.0, 1});
  const auto a = partition(ds, {0.3, 10, 9, 10});
  const auto b = partition(ds, {0.3, 10, 9, 10});
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].indices, b[i].indices);
}

TEST(Partition, InfeasibleMinimumIsConfigError) {
  const auto ds = generate_synthetic(100, {2, 2, 2.0, 1});
  EXPECT_THROW(partition(ds, {1.0, 10, 0, 11}), ConfigError);
  EXPECT_THROW(partition(ds, {0.0, 10, 0, 1}), ConfigError);
}

TEST(Partition, HugeLambdaIsNearlyUniform) {
  const auto ds = generate_synthetic(4000, {4, 4, 2.0, 1});
  const auto shards = partition(ds, {1e6, 4, 5, 1});
  for (const auto& s : shards) {
    EXPECT_NEAR(static_cast<double>(s.indices.size()), 1000.0, 50.0);
    std::vector<double> counts(4, 0.0);
    for (auto r : s.indices) counts[ds.labels[r]] += 1.0;
    for (double c : counts) EXPECT_NEAR(c / s.indices.size(), 0.25, 0.05);
  }
}

// Averaged over seeds: smaller lambda gives more spread in shard sizes and
// less class entropy per shard.
TEST(Partition, HeterogeneityGrowsAsLambdaShrinks) {
  const auto ds = generate_synthetic(3000, {4, 4, 2.0, 1});
  std::vector<double> size_var, class_entropy;
  for (double lambda : {0.1, 1.0, 10.0}) {
    double v_sum = 0.0, h_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto shards = partition(ds, {lambda, 10, seed, 20});
      const double mean = 300.0;
      for (const auto& s : shards) {
        v_sum += (s.indices.size() - mean) * (s.indices.size() - mean);
        std::vector<double> p(4, 0.0);
        for (auto r : s.indices) p[ds.labels[r]] += 1.0 / s.indices.size();
        h_sum += entropy(p);
      }
    }
    size_var.push_back(v_sum);
    class_entropy.push_back(h_sum);
  }
  EXPECT_GT(size_var[0], size_var[1]);
  EXPECT_GT(size_var[1], size_var[2]);
  EXPECT_LT(class_entropy[0], class_entropy[1]);
  EXPECT_LT(class_entropy[1], class_entropy[2]);
}

}  // namespace
}  // namespace sabfl
