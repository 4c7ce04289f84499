#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpgnn/config.hpp"
#include "vpgnn/eval.hpp"
#include "vpgnn/synthgen.hpp"

namespace vpgnn {

// Files written by the gen stage into a directory:
//   edges.txt          edge list, "u v" per line
//   features.csv       node feature matrix
//   ground_truth.csv   node_id,label for every order (true roles)
//   pseudo_labels.csv  node_id,label for rule-flagged orders only
struct GeneratedWorld {
  EntityWorld world;
  OrderGraph graph;  // full features and truth labels attached
};

GeneratedWorld generate_benchmark(const GenConfig& cfg);
void write_generated_world(const std::string& dir, const GeneratedWorld& gen,
                           const RuleSet& rules);

struct PipelineOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
};

struct PipelineArtifacts {
  EvalReport report;
  std::string report_path;
  std::string table_path;
};

// End-to-end run: generate a pre-training world and a distinct downstream
// world, pre-train on the first, fine-tune and evaluate every requested
// mode on the second, and write report.json plus an aligned ablation table.
// Throws ConfigError for bad settings and StageError for stage failures;
// artifacts written before a failure are left in place.
PipelineArtifacts run_pipeline(const PipelineOptions& options);

struct EtaSweepRow {
  std::size_t eta = 0;
  double mean = 0.0;
  double ci_halfwidth = 0.0;
  std::vector<std::uint64_t> split_seeds;
};

// One benchmark run per eta value with everything else held fixed; split
// seeds are shared across rows. Writes eta_sweep.csv into out_dir.
std::vector<EtaSweepRow> run_eta_sweep(const PipelineOptions& options,
                                       const std::vector<std::size_t>& etas);

}  // namespace vpgnn
