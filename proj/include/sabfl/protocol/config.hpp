#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sabfl/adversary/adversary.hpp"
#include "sabfl/chain/block.hpp"
#include "sabfl/core/param_vector.hpp"
#include "sabfl/data/partition.hpp"

namespace sabfl {

enum class LrSchedule { kConstant, kInverse };
enum class DatasetSource { kSynthetic, kIdx, kCsv };
enum class StakeMode { kShardSize, kUniform };

// Everything needed to reproduce one run. Loaded from a flat
// "key = value" file; see README for the key list.
struct RunConfig {
  // Labels used by reports.
  std::string experiment = "exp";
  std::string variant;

  std::size_t num_participants = 20;
  std::size_t num_workers = 16;
  std::size_t num_validators = 3;

  std::size_t epochs = 4;
  double lr = 0.01;
  LrSchedule lr_schedule = LrSchedule::kConstant;
  double lr_decay = 0.0;  // inverse: lr / (1 + decay * (r - 1))
  std::size_t batch_size = 32;

  std::size_t stopping_window = 30;
  std::size_t max_rounds = 200;

  AggregatorKind aggregator = AggregatorKind::kSoftmax;
  std::uint32_t krum_f = 0;

  std::uint64_t seed = 0;

  ModelKind model = ModelKind::kLogistic;
  std::size_t hidden_dim = 16;

  DatasetSource source = DatasetSource::kSynthetic;
  std::size_t train_samples = 5000;
  std::size_t test_samples = 1000;
  std::size_t input_dim = 10;
  std::size_t num_classes = 4;
  double class_separation = 3.0;
  std::string train_images, train_labels, test_images, test_labels;
  std::string train_csv, test_csv;

  double partition_lambda = 1.0;
  std::size_t min_shard_size = 0;  // 0 = 2 * batch_size

  std::size_t num_malicious = 0;  // drawn from the seed unless malicious_ids is set
  AttackConfig attack;

  StakeMode stake_mode = StakeMode::kShardSize;
  std::size_t threads = 1;

  std::size_t effective_min_shard_size() const { return min_shard_size ? min_shard_size : 2 * batch_size; }
  double learning_rate(std::uint64_t round) const;
  // Throws ConfigError on any inconsistency.
  void validate() const;
};

// Applies one key/value pair; throws ConfigError for unknown keys or bad values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// Parses "key = value" lines ('#' starts a comment) in order.
std::vector<std::pair<std::string, std::string>> parse_settings(std::istream& in);

RunConfig parse_run_config(std::istream& in);
// Relative dataset paths resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);

// Rewrites relative dataset paths as base_dir / path.
void resolve_paths(RunConfig& cfg, const std::filesystem::path& base_dir);

// Canonical key/value form, parseable by parse_run_config.
std::string to_settings(const RunConfig& cfg);

const char* to_string(LrSchedule s);
const char* to_string(DatasetSource s);
const char* to_string(StakeMode s);

}  // namespace sabfl
