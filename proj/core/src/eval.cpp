#include "vpgnn/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace vpgnn {
namespace {

using ordered_json = nlohmann::ordered_json;

struct LabelPools {
  std::vector<NodeId> anomalies;
  std::vector<NodeId> normals;
};

LabelPools collect_pools(const std::vector<std::int8_t>& labels) {
  LabelPools pools;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pools.anomalies.push_back(static_cast<NodeId>(i));
    } else if (labels[i] == 0) {
      pools.normals.push_back(static_cast<NodeId>(i));
    }
  }
  return pools;
}

}  // namespace

TaskSetting TaskSetting::parse(const std::string& text) {
  TaskSetting s;
  if (text == "semi") {
    s.kind = Kind::kSemi;
    s.semi_budget = 0;  // auto
    return s;
  }
  const auto pos = text.find("-shot");
  if (pos != std::string::npos && pos + 5 == text.size() && pos > 0) {
    s.kind = Kind::kShots;
    s.shots = std::stoul(text.substr(0, pos));
    if (s.shots == 0) {
      throw std::invalid_argument("task setting: shots must be positive");
    }
    return s;
  }
  throw std::invalid_argument("task setting '" + text +
                              "' not understood (use e.g. 10-shot, 20-shot, semi)");
}

std::string TaskSetting::name() const {
  if (kind == Kind::kShots) {
    return std::to_string(shots) + "-shot";
  }
  return "semi";
}

LabeledSet SplitSpec::train_set() const {
  LabeledSet set;
  set.examples.reserve(train_pos.size() + train_neg.size());
  for (NodeId n : train_pos) {
    set.examples.push_back({n, 1});
  }
  for (NodeId n : train_neg) {
    set.examples.push_back({n, 0});
  }
  return set;
}

SplitSpec make_split(const OrderGraph& g, const std::vector<std::int8_t>& labels,
                     const TaskSetting& setting, std::uint64_t seed) {
  if (labels.size() != g.n_nodes()) {
    throw std::invalid_argument("make_split: label array size mismatch");
  }
  LabelPools pools = collect_pools(labels);
  const std::size_t n_anom = pools.anomalies.size();
  const std::size_t n_norm = pools.normals.size();
  if (n_anom == 0) {
    throw std::invalid_argument("make_split: anomaly rate is zero");
  }

  std::size_t n_pos = 0;
  if (setting.kind == TaskSetting::Kind::kShots) {
    n_pos = setting.shots;
  } else {
    // Auto budget: spend 80% of the anomaly labels across train+validation.
    n_pos = setting.semi_budget > 0
                ? setting.semi_budget
                : std::min<std::size_t>(5000, (n_anom * 2) / 5);
  }
  if (n_pos == 0) {
    throw std::invalid_argument("make_split: empty anomaly budget");
  }

  const double rate = static_cast<double>(n_anom) /
                      static_cast<double>(n_anom + n_norm);
  const auto n_neg = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_pos) * (1.0 - rate) / rate));
  if (n_neg == 0) {
    throw std::invalid_argument("make_split: training negatives round to zero");
  }
  if (2 * n_pos > n_anom) {
    throw std::invalid_argument(
        "make_split: insufficient anomalies for train + validation (need " +
        std::to_string(2 * n_pos) + ", have " + std::to_string(n_anom) + ")");
  }
  if (2 * n_neg > n_norm) {
    throw std::invalid_argument("make_split: insufficient normal nodes");
  }

  RngStream rng(seed, 0x73706C69);  // split stream
  rng.shuffle(pools.anomalies);
  rng.shuffle(pools.normals);

  SplitSpec split;
  split.setting = setting.name();
  split.seed = seed;
  split.train_pos.assign(pools.anomalies.begin(), pools.anomalies.begin() + n_pos);
  split.train_neg.assign(pools.normals.begin(), pools.normals.begin() + n_neg);
  // Validation mirrors the training composition.
  split.valid.assign(pools.anomalies.begin() + n_pos,
                     pools.anomalies.begin() + 2 * n_pos);
  split.valid.insert(split.valid.end(), pools.normals.begin() + n_neg,
                     pools.normals.begin() + 2 * n_neg);

  std::set<NodeId> taken;
  taken.insert(split.train_pos.begin(), split.train_pos.end());
  taken.insert(split.train_neg.begin(), split.train_neg.end());
  taken.insert(split.valid.begin(), split.valid.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == kUnlabeled) {
      continue;
    }
    const auto node = static_cast<NodeId>(i);
    if (taken.find(node) == taken.end()) {
      split.test.push_back(node);
    }
  }
  return split;
}

EvalReport run_benchmark(const OrderGraph& g, const PretrainedModel& model,
                         const std::vector<TuneMode>& modes,
                         const EvalOptions& options) {
  if (!g.has_labels()) {
    throw std::invalid_argument("run_benchmark: graph has no ground-truth labels");
  }
  if (modes.empty()) {
    throw std::invalid_argument("run_benchmark: no modes requested");
  }
  if (options.n_splits == 0) {
    throw std::invalid_argument("run_benchmark: n_splits must be positive");
  }
  const auto start = std::chrono::steady_clock::now();

  // Identical split sequence for every mode: paired comparison.
  std::vector<SplitSpec> splits;
  splits.reserve(options.n_splits);
  for (std::size_t s = 0; s < options.n_splits; ++s) {
    const std::uint64_t split_seed = derive_seed(options.master_seed, 101 + s);
    splits.push_back(make_split(g, g.labels(), options.setting, split_seed));
  }

  EvalReport report;
  report.setting = options.setting.name();
  for (const SplitSpec& split : splits) {
    report.split_seeds.push_back(split.seed);
  }

  for (const TuneMode mode : modes) {
    ModeReport mode_report;
    mode_report.mode = to_string(mode);
    for (std::size_t s = 0; s < options.n_splits; ++s) {
      const SplitSpec& split = splits[s];
      TuneConfig cfg = options.tune;
      cfg.mode = mode;
      cfg.seed = derive_seed(options.master_seed,
                             (static_cast<std::uint64_t>(mode) + 2) * 10007 + s);

      const LabeledSet train = split.train_set();
      LabeledSet valid;
      valid.examples.reserve(split.valid.size());
      for (NodeId node : split.valid) {
        valid.examples.push_back({node, g.label(node)});
      }

      std::vector<int> pred;
      if (mode == TuneMode::kNoPrompt) {
        const Classifier clf = traditional_finetune(model, g, train, cfg, &valid);
        pred = predict_classifier(clf, g, split.test);
      } else {
        RngStream init_rng(cfg.seed, 0x696E6974);
        const PromptMatrix z0 =
            mode == TuneMode::kRandomInit
                ? init_random(model.params.hidden_dim(), init_rng)
                : init_context_tokens(model, g, train, cfg.eta, init_rng);
        const TuneResult tuned = prompt_finetune(model, z0, g, train, cfg, &valid);
        pred = predict(tuned.params, tuned.prompt, g, split.test);
      }

      std::vector<int> truth;
      truth.reserve(split.test.size());
      for (NodeId node : split.test) {
        truth.push_back(g.label(node));
      }
      mode_report.scores.push_back(f1_score(pred, truth));
    }
    const auto [mean, ci] = mean_ci(mode_report.scores);
    mode_report.mean = mean;
    mode_report.ci_halfwidth = ci;
    report.modes.push_back(std::move(mode_report));
  }

  report.config_echo["eval.setting"] = options.setting.name();
  report.config_echo["eval.n_splits"] = std::to_string(options.n_splits);
  report.config_echo["seed"] = std::to_string(options.master_seed);
  report.config_echo["tune.eta"] = std::to_string(options.tune.eta);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", options.tune.lambda);
  report.config_echo["tune.lambda"] = buf;
  report.config_echo["tune.epochs"] = std::to_string(options.tune.epochs);
  std::snprintf(buf, sizeof(buf), "%g", options.tune.lr);
  report.config_echo["tune.lr"] = buf;

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["setting"] = report.setting;
  j["modes"] = ordered_json::array();
  for (const ModeReport& mode : report.modes) {
    ordered_json m;
    m["name"] = mode.mode;
    m["scores"] = mode.scores;
    m["mean"] = mode.mean;
    m["ci"] = mode.ci_halfwidth;
    j["modes"].push_back(std::move(m));
  }
  j["splits"] = report.split_seeds;
  j["config"] = ordered_json::object();
  for (const auto& [key, value] : report.config_echo) {
    j["config"][key] = value;
  }
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
  std::string out = "setting: " + report.setting + "  (" +
                    std::to_string(report.split_seeds.size()) + " splits)\n";
  out += "mode            mean F1    95% CI\n";
  for (const ModeReport& mode : report.modes) {
    char line[96];
    std::snprintf(line, sizeof(line), "%-15s %.4f    +-%.4f\n",
                  mode.mode.c_str(), mode.mean, mode.ci_halfwidth);
    out += line;
  }
  return out;
}

}  // namespace vpgnn
