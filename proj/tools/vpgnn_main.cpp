// vpgnn command-line tool: synthetic benchmark generation, pretext
// pre-training, prompt-based fine-tuning, evaluation and reporting.
//
// Exit codes: 0 success, 1 configuration error, 2 stage failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vpgnn/artifact_io.hpp"
#include "vpgnn/config.hpp"
#include "vpgnn/graph_io.hpp"
#include "vpgnn/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStage = 2;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool want_out = true) {
  cmd->add_option("--config", flags->config_path, "key=value configuration file");
  cmd->add_option("--seed", flags->seed, "master seed (overrides the config)");
  if (want_out) {
    cmd->add_option("--out", flags->out_dir, "output directory")->required();
  }
}

vpgnn::KeyValueConfig load_config(const CommonFlags& flags) {
  vpgnn::KeyValueConfig cfg =
      flags.config_path.empty()
          ? vpgnn::KeyValueConfig::parse_string("", "<defaults>")
          : vpgnn::KeyValueConfig::parse_file(flags.config_path);
  cfg.reject_unknown_keys();
  return cfg;
}

vpgnn::OrderGraph load_graph_dir(const std::string& dir,
                                 const std::string& label_path) {
  return vpgnn::load_graph(dir + "/edges.txt", dir + "/features.csv", label_path);
}

vpgnn::LabeledSet labeled_set_from_csv(const std::string& path,
                                       const vpgnn::OrderGraph& g) {
  vpgnn::LabeledSet set;
  for (const auto& [node, label] : vpgnn::read_label_csv(path)) {
    set.examples.push_back({node, label});
  }
  vpgnn::validate_labeled_set(set, g);
  return set;
}

void write_loss_csv(const std::string& path, const std::vector<double>& losses) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << "epoch,loss\n";
  char buf[48];
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e + 1, losses[e]);
    out << buf;
  }
}

int run_gen(const CommonFlags& flags) {
  const auto cfg = load_config(flags);
  const std::uint64_t master = vpgnn::master_seed_from(cfg, flags.seed);
  const vpgnn::GenConfig gen_cfg = vpgnn::gen_config_from(cfg, master);
  const auto generated = vpgnn::generate_benchmark(gen_cfg);
  vpgnn::write_generated_world(flags.out_dir, generated, vpgnn::RuleSet{});
  std::cout << "generated " << generated.graph.n_nodes() << " orders, "
            << generated.graph.n_undirected_edges() << " edges -> "
            << flags.out_dir << "\n";
  for (const auto& [key, value] : vpgnn::resolved_entries(gen_cfg)) {
    std::cout << "  " << key << " = " << value << "\n";
  }
  return kExitOk;
}

int run_pretrain(const CommonFlags& flags, const std::string& graph_dir,
                 const std::string& label_path) {
  const auto cfg = load_config(flags);
  const std::uint64_t master = vpgnn::master_seed_from(cfg, flags.seed);
  const vpgnn::PretrainConfig pre_cfg = vpgnn::pretrain_config_from(cfg, master);
  const auto g = load_graph_dir(graph_dir, label_path);
  vpgnn::TrainingCurve curve;
  const auto model = vpgnn::pretrain(g, pre_cfg, &curve);
  std::filesystem::create_directories(flags.out_dir);
  vpgnn::save_model(model, flags.out_dir + "/model.bin");
  write_loss_csv(flags.out_dir + "/pretrain_curve.csv", curve.epoch_loss);
  std::cout << "pre-trained " << pre_cfg.epochs << " epochs, final loss "
            << model.final_loss << " -> " << flags.out_dir << "/model.bin\n";
  return kExitOk;
}

int run_finetune(const CommonFlags& flags, const std::string& model_path,
                 const std::string& graph_dir, const std::string& label_path,
                 const vpgnn::TuneConfig& tune_flags, const std::string& mode) {
  vpgnn::TuneConfig tune = tune_flags;
  tune.mode = vpgnn::parse_tune_mode(mode);
  if (flags.seed.has_value()) {
    tune.seed = *flags.seed;
  }
  vpgnn::validate_tune_config(tune);

  const auto model = vpgnn::load_model(model_path);
  const auto g = load_graph_dir(graph_dir, label_path);
  const auto labeled = labeled_set_from_csv(label_path, g);

  std::filesystem::create_directories(flags.out_dir);
  vpgnn::TunedArtifact artifact;
  artifact.mode = tune.mode;
  std::vector<double> losses;
  if (tune.mode == vpgnn::TuneMode::kNoPrompt) {
    const auto clf = vpgnn::traditional_finetune(model, g, labeled, tune);
    artifact.params = clf.params;
    artifact.head = clf.head;
    losses = clf.epoch_loss;
  } else {
    vpgnn::RngStream init_rng(tune.seed, 0x696E6974);
    const vpgnn::PromptMatrix z0 =
        tune.mode == vpgnn::TuneMode::kRandomInit
            ? vpgnn::init_random(model.params.hidden_dim(), init_rng)
            : vpgnn::init_context_tokens(model, g, labeled, tune.eta, init_rng);
    const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, tune);
    artifact.params = tuned.params;
    artifact.prompt = tuned.prompt;
    losses = tuned.epoch_loss;
  }
  vpgnn::save_tuned_artifact(artifact, flags.out_dir + "/tuned.bin");
  write_loss_csv(flags.out_dir + "/finetune_curve.csv", losses);
  std::cout << "fine-tuned mode " << vpgnn::to_string(tune.mode) << " ("
            << tune.epochs << " epochs) -> " << flags.out_dir << "/tuned.bin\n";
  return kExitOk;
}

int run_eval(const CommonFlags& flags, const std::string& model_path,
             const std::string& graph_dir, const std::string& label_path) {
  const auto cfg = load_config(flags);
  const std::uint64_t master = vpgnn::master_seed_from(cfg, flags.seed);
  vpgnn::EvalOptions options = vpgnn::eval_options_from(cfg, master);
  const auto modes = vpgnn::modes_from(cfg);
  const auto model = vpgnn::load_model(model_path);
  const auto g = load_graph_dir(graph_dir, label_path);
  const auto report = vpgnn::run_benchmark(g, model, modes, options);
  std::filesystem::create_directories(flags.out_dir);
  std::ofstream out(flags.out_dir + "/report.json", std::ios::binary);
  out << vpgnn::report_to_json(report);
  std::cout << vpgnn::report_to_table(report);
  std::cerr << "wall clock: " << report.wall_clock_seconds << " s\n";
  return kExitOk;
}

int run_bpwc(double prec, std::uint64_t tp, double prec_base,
             std::uint64_t tp_base) {
  const double pct = vpgnn::bpwc(prec, tp, prec_base, tp_base);
  std::printf("%.1f%%\n", pct);
  return kExitOk;
}

int run_pipeline_cmd(const CommonFlags& flags) {
  vpgnn::PipelineOptions options;
  options.config_path = flags.config_path;
  options.out_dir = flags.out_dir;
  options.seed_override = flags.seed;
  const auto artifacts = vpgnn::run_pipeline(options);
  std::cout << vpgnn::report_to_table(artifacts.report);
  std::cout << "report: " << artifacts.report_path << "\n";
  return kExitOk;
}

int run_sweep_eta(const CommonFlags& flags, const std::vector<std::int64_t>& etas) {
  std::vector<std::size_t> values;
  for (std::int64_t e : etas) {
    if (e < 0) {
      throw vpgnn::ConfigError("sweep-eta: eta must be >= 0");
    }
    values.push_back(static_cast<std::size_t>(e));
  }
  vpgnn::PipelineOptions options;
  options.config_path = flags.config_path;
  options.out_dir = flags.out_dir;
  options.seed_override = flags.seed;
  const auto rows = vpgnn::run_eta_sweep(options, values);
  std::cout << "eta    mean F1    95% CI\n";
  for (const auto& row : rows) {
    std::printf("%-6zu %.4f    +-%.4f\n", row.eta, row.mean, row.ci_halfwidth);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voucher-abuse detection on order graphs: pretext pre-training "
               "with prompt-based fine-tuning"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic order-graph benchmark");
  add_common_flags(gen_cmd, &gen_flags);

  CommonFlags pretrain_flags;
  std::string pretrain_graph;
  std::string pretrain_labels;
  auto* pretrain_cmd = app.add_subcommand("pretrain", "pre-train on a graph");
  add_common_flags(pretrain_cmd, &pretrain_flags);
  pretrain_cmd->add_option("--graph", pretrain_graph, "graph directory (edges.txt, features.csv)")->required();
  pretrain_cmd->add_option("--labels", pretrain_labels, "optional label CSV");

  CommonFlags finetune_flags;
  std::string ft_model;
  std::string ft_graph;
  std::string ft_labels;
  std::string ft_mode = "vpgnn";
  vpgnn::TuneConfig ft_tune;
  auto* finetune_cmd = app.add_subcommand("finetune", "fine-tune a pre-trained model");
  add_common_flags(finetune_cmd, &finetune_flags);
  finetune_cmd->add_option("--model", ft_model, "pre-trained model file")->required();
  finetune_cmd->add_option("--graph", ft_graph, "graph directory")->required();
  finetune_cmd->add_option("--labels", ft_labels, "labeled-node CSV")->required();
  finetune_cmd->add_option("--mode", ft_mode,
                           "vpgnn|no-prompt|random-init|no-constraint|prompt-only");
  finetune_cmd->add_option("--eta", ft_tune.eta, "neighbors sampled per labeled node");
  finetune_cmd->add_option("--lambda", ft_tune.lambda, "orthogonal-constraint weight");
  finetune_cmd->add_option("--epochs", ft_tune.epochs, "tuning epochs");
  finetune_cmd->add_option("--lr", ft_tune.lr, "learning rate");

  CommonFlags eval_flags;
  std::string eval_model;
  std::string eval_graph;
  std::string eval_labels;
  auto* eval_cmd = app.add_subcommand("eval", "run the split benchmark and report");
  add_common_flags(eval_cmd, &eval_flags);
  eval_cmd->add_option("--model", eval_model, "pre-trained model file")->required();
  eval_cmd->add_option("--graph", eval_graph, "graph directory")->required();
  eval_cmd->add_option("--labels", eval_labels, "ground-truth label CSV")->required();

  double bpwc_prec = 0.0;
  double bpwc_prec_base = 0.0;
  std::uint64_t bpwc_tp = 0;
  std::uint64_t bpwc_tp_base = 0;
  auto* bpwc_cmd = app.add_subcommand("bpwc", "base-normalized precision-weighted coverage");
  bpwc_cmd->add_option("--prec", bpwc_prec, "precision of the evaluated model")->required();
  bpwc_cmd->add_option("--tp", bpwc_tp, "true positives of the evaluated model")->required();
  bpwc_cmd->add_option("--prec-base", bpwc_prec_base, "precision of the base model")->required();
  bpwc_cmd->add_option("--tp-base", bpwc_tp_base, "true positives of the base model")->required();

  CommonFlags pipeline_flags;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "gen -> pretrain -> finetune -> eval -> report");
  add_common_flags(pipeline_cmd, &pipeline_flags);
  pipeline_cmd->get_option("--config")->required();

  CommonFlags sweep_flags;
  std::vector<std::int64_t> sweep_etas;
  auto* sweep_cmd = app.add_subcommand("sweep-eta", "benchmark across eta values");
  add_common_flags(sweep_cmd, &sweep_flags);
  sweep_cmd->get_option("--config")->required();
  sweep_cmd->add_option("--etas", sweep_etas, "eta values, e.g. --etas 0 1 5 10")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen_cmd->parsed()) {
      return run_gen(gen_flags);
    }
    if (pretrain_cmd->parsed()) {
      return run_pretrain(pretrain_flags, pretrain_graph, pretrain_labels);
    }
    if (finetune_cmd->parsed()) {
      return run_finetune(finetune_flags, ft_model, ft_graph, ft_labels, ft_tune,
                          ft_mode);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_flags, eval_model, eval_graph, eval_labels);
    }
    if (bpwc_cmd->parsed()) {
      return run_bpwc(bpwc_prec, bpwc_tp, bpwc_prec_base, bpwc_tp_base);
    }
    if (pipeline_cmd->parsed()) {
      return run_pipeline_cmd(pipeline_flags);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_eta(sweep_flags, sweep_etas);
    }
  } catch (const vpgnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vpgnn::StageError& e) {
    std::cerr << "stage failure " << e.what() << "\n";
    return kExitStage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitConfig;
}
