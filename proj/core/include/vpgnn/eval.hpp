#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpgnn/graph.hpp"
#include "vpgnn/metrics.hpp"
#include "vpgnn/pretrain.hpp"
#include "vpgnn/prompt.hpp"

namespace vpgnn {

// Task setting: a few-shot budget of labeled anomalies, or the
// semi-supervised budget. Negatives are always sampled so the training
// anomaly rate matches the overall rate.
struct TaskSetting {
  enum class Kind { kShots, kSemi };
  Kind kind = Kind::kShots;
  std::size_t shots = 10;        // anomalies in training (kShots)
  std::size_t semi_budget = 5000;  // anomaly label cap (kSemi)

  static TaskSetting parse(const std::string& text);  // "10-shot", "semi"...
  std::string name() const;
};

// One train/validation/test partition. train_pos holds the labeled
// anomalies, train_neg the rate-matched negatives; the validation set
// mirrors the training composition; everything else labeled is test.
struct SplitSpec {
  std::vector<NodeId> train_pos;
  std::vector<NodeId> train_neg;
  std::vector<NodeId> valid;
  std::vector<NodeId> test;
  std::string setting;
  std::uint64_t seed = 0;

  LabeledSet train_set() const;
};

// Deterministic split construction from ground-truth labels. Throws when
// the graph cannot support the setting (too few anomalies for train +
// validation, or anomaly rate zero).
SplitSpec make_split(const OrderGraph& g, const std::vector<std::int8_t>& labels,
                     const TaskSetting& setting, std::uint64_t seed);

struct ModeReport {
  std::string mode;
  std::vector<double> scores;
  double mean = 0.0;
  double ci_halfwidth = 0.0;
};

struct EvalReport {
  std::string setting;
  std::vector<ModeReport> modes;
  std::vector<std::uint64_t> split_seeds;
  std::map<std::string, std::string> config_echo;
  double wall_clock_seconds = 0.0;  // not part of the serialized report
};

struct EvalOptions {
  TaskSetting setting;
  std::size_t n_splits = 10;
  std::uint64_t master_seed = 0;
  TuneConfig tune;  // base tuning settings; mode is overridden per entry
};

// Runs every requested mode over the same sequence of splits (paired
// comparison): per split, initialize per mode, fine-tune with epoch
// selection on validation F1, and score anomaly-class F1 on the test
// partition. Scores aggregate with mean_ci in split order.
EvalReport run_benchmark(const OrderGraph& g, const PretrainedModel& model,
                         const std::vector<TuneMode>& modes,
                         const EvalOptions& options);

// The serialized report: {setting, modes:[{name,scores,mean,ci}],
// splits, config}. Stable field order and formatting, so identical runs
// emit identical bytes.
std::string report_to_json(const EvalReport& report);

// Plain-text mode table aligned for reading.
std::string report_to_table(const EvalReport& report);

}  // namespace vpgnn
