#include "vpgnn/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vpgnn/graph_io.hpp"

namespace vpgnn {
namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw StageError("setup", "cannot create directory " + dir + ": " + ec.message());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw StageError("report", "cannot write " + path);
  }
  out << text;
}

void write_curve_csv(const std::string& path, const TrainingCurve& curve) {
  std::ofstream out(path);
  if (!out) {
    throw StageError("pretrain", "cannot write " + path);
  }
  out << "epoch,loss\n";
  char buf[48];
  for (std::size_t e = 0; e < curve.epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e + 1, curve.epoch_loss[e]);
    out << buf;
  }
}

std::vector<std::pair<NodeId, int>> truth_rows(const OrderGraph& g) {
  std::vector<std::pair<NodeId, int>> rows;
  rows.reserve(g.n_nodes());
  for (NodeId i = 0; i < g.n_nodes(); ++i) {
    rows.emplace_back(i, g.label(i));
  }
  return rows;
}

}  // namespace

GeneratedWorld generate_benchmark(const GenConfig& cfg) {
  GeneratedWorld gen;
  gen.world = generate_world(cfg);
  gen.graph = build_benchmark_graph(gen.world, cfg);
  return gen;
}

void write_generated_world(const std::string& dir, const GeneratedWorld& gen,
                           const RuleSet& rules) {
  ensure_dir(dir);
  write_edge_file(dir + "/edges.txt", gen.graph);
  write_feature_csv(dir + "/features.csv", gen.graph.features());
  write_label_csv(dir + "/ground_truth.csv", truth_rows(gen.graph));
  const auto pseudo = apply_pseudo_label_rules(gen.world, gen.graph, rules);
  std::vector<std::pair<NodeId, int>> pseudo_rows(pseudo.begin(), pseudo.end());
  write_label_csv(dir + "/pseudo_labels.csv", pseudo_rows);
}

PipelineArtifacts run_pipeline(const PipelineOptions& options) {
  KeyValueConfig cfg = KeyValueConfig::parse_file(options.config_path);
  cfg.reject_unknown_keys();
  const std::uint64_t master = master_seed_from(cfg, options.seed_override);

  // Two worlds from one generator configuration: distinct seeds emulate
  // pre-training on one market and predicting on another.
  GenConfig gen_cfg = gen_config_from(cfg, master);
  GenConfig gen_cfg_b = gen_cfg;
  gen_cfg_b.seed = derive_seed(gen_cfg.seed, 0xB);
  const PretrainConfig pre_cfg = pretrain_config_from(cfg, master);
  EvalOptions eval_options = eval_options_from(cfg, master);
  const std::vector<TuneMode> modes = modes_from(cfg);
  const RuleSet rules;

  ensure_dir(options.out_dir);

  GeneratedWorld world_a;
  GeneratedWorld world_b;
  try {
    world_a = generate_benchmark(gen_cfg);
    write_generated_world(options.out_dir + "/world_a", world_a, rules);
    world_b = generate_benchmark(gen_cfg_b);
    write_generated_world(options.out_dir + "/world_b", world_b, rules);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("gen", e.what());
  }

  PretrainedModel model;
  try {
    TrainingCurve curve;
    model = pretrain(world_a.graph, pre_cfg, &curve);
    save_model(model, options.out_dir + "/model.bin");
    write_curve_csv(options.out_dir + "/pretrain_curve.csv", curve);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("pretrain", e.what());
  }

  PipelineArtifacts artifacts;
  try {
    artifacts.report = run_benchmark(world_b.graph, model, modes, eval_options);
  } catch (const std::exception& e) {
    throw StageError("eval", e.what());
  }

  // Audit trail: the report echoes every resolved setting.
  for (const auto& [key, value] : resolved_entries(gen_cfg)) {
    artifacts.report.config_echo[key] = value;
  }
  artifacts.report.config_echo["pretrain.epochs"] = std::to_string(pre_cfg.epochs);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", pre_cfg.lr);
  artifacts.report.config_echo["pretrain.lr"] = buf;
  artifacts.report.config_echo["pretrain.hidden_dim"] =
      std::to_string(pre_cfg.hidden_dim);
  artifacts.report.config_echo["pretrain.seed"] = std::to_string(pre_cfg.seed);
  artifacts.report.config_echo["gen.world_b_seed"] = std::to_string(gen_cfg_b.seed);

  artifacts.report_path = options.out_dir + "/report.json";
  artifacts.table_path = options.out_dir + "/ablation_table.txt";
  try {
    write_text(artifacts.report_path, report_to_json(artifacts.report));
    write_text(artifacts.table_path, report_to_table(artifacts.report));
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("report", e.what());
  }
  return artifacts;
}

std::vector<EtaSweepRow> run_eta_sweep(const PipelineOptions& options,
                                       const std::vector<std::size_t>& etas) {
  if (etas.empty()) {
    throw ConfigError("sweep-eta: empty eta list");
  }
  KeyValueConfig cfg = KeyValueConfig::parse_file(options.config_path);
  cfg.reject_unknown_keys();
  const std::uint64_t master = master_seed_from(cfg, options.seed_override);

  GenConfig gen_cfg = gen_config_from(cfg, master);
  GenConfig gen_cfg_b = gen_cfg;
  gen_cfg_b.seed = derive_seed(gen_cfg.seed, 0xB);
  const PretrainConfig pre_cfg = pretrain_config_from(cfg, master);
  EvalOptions eval_options = eval_options_from(cfg, master);

  ensure_dir(options.out_dir);

  GeneratedWorld world_a;
  GeneratedWorld world_b;
  PretrainedModel model;
  try {
    world_a = generate_benchmark(gen_cfg);
    world_b = generate_benchmark(gen_cfg_b);
  } catch (const std::exception& e) {
    throw StageError("gen", e.what());
  }
  try {
    model = pretrain(world_a.graph, pre_cfg);
  } catch (const std::exception& e) {
    throw StageError("pretrain", e.what());
  }

  std::vector<EtaSweepRow> rows;
  for (const std::size_t eta : etas) {
    EvalOptions per_eta = eval_options;
    per_eta.tune.eta = eta;
    EvalReport report;
    try {
      report = run_benchmark(world_b.graph, model, {TuneMode::kVpgnnFull}, per_eta);
    } catch (const std::exception& e) {
      throw StageError("eval", std::string("eta=") + std::to_string(eta) + ": " +
                                   e.what());
    }
    EtaSweepRow row;
    row.eta = eta;
    row.mean = report.modes.front().mean;
    row.ci_halfwidth = report.modes.front().ci_halfwidth;
    row.split_seeds = report.split_seeds;
    rows.push_back(std::move(row));
  }

  std::ofstream out(options.out_dir + "/eta_sweep.csv");
  if (!out) {
    throw StageError("report", "cannot write eta_sweep.csv");
  }
  out << "eta,mean_f1,ci95_halfwidth\n";
  char buf[80];
  for (const EtaSweepRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", row.eta, row.mean,
                  row.ci_halfwidth);
    out << buf;
  }
  return rows;
}

}  // namespace vpgnn
