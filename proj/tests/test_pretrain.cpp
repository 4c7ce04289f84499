#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vpgnn/pretrain.hpp"
#include "vpgnn/synthgen.hpp"

using vpgnn::Dense;
using vpgnn::ModelParams;
using vpgnn::NodeId;
using vpgnn::OrderGraph;
using vpgnn::PretrainConfig;
using vpgnn::RngStream;

namespace {

OrderGraph random_graph(std::size_t n, std::size_t f, std::uint64_t seed,
                        std::size_t extra_edges) {
  RngStream rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 1; i < n; ++i) {
    edges.push_back({i - 1, i});
  }
  for (std::size_t e = 0; e < extra_edges; ++e) {
    edges.emplace_back(static_cast<NodeId>(rng.next_below(n)),
                       static_cast<NodeId>(rng.next_below(n)));
  }
  Dense x(n, f);
  for (double& v : x.values) {
    v = 2.0 * rng.next_real() - 1.0;
  }
  return vpgnn::build_graph(edges, x);
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("all-zero parameters give loss ln 2 exactly") {
  const auto g = random_graph(6, 3, 1, 4);
  ModelParams p;
  p.w1 = Dense(3, 4);
  p.w2 = Dense(4, 4);
  p.w_r = Dense(4, 4);
  RngStream rng(0);
  const auto res = vpgnn::dgi_loss(p, g, rng);
  CHECK(std::abs(res.loss - std::log(2.0)) <= 1e-12);
  CHECK(res.mean_positive_logit == doctest::Approx(0.0));
  CHECK(res.mean_negative_logit == doctest::Approx(0.0));
}

TEST_CASE("degenerate graphs are rejected") {
  RngStream rng(0);
  const auto lonely = vpgnn::build_graph({}, Dense(1, 2, 0.5));
  ModelParams p;
  p.w1 = Dense(2, 2, 0.1);
  p.w2 = Dense(2, 2, 0.1);
  p.w_r = Dense(2, 2, 0.1);
  CHECK_THROWS_AS(vpgnn::dgi_loss(p, lonely, rng), std::invalid_argument);
  const auto edgeless = vpgnn::build_graph({}, Dense(3, 2, 0.5));
  CHECK_THROWS_AS(vpgnn::dgi_loss(p, edgeless, rng), std::invalid_argument);
}

TEST_CASE("pretext gradients match finite differences") {
  // 10-node random graph, f=4, d=3; the corruption is re-drawn from a fixed
  // seed per evaluation so every probe sees the same permutation.
  const auto g = random_graph(10, 4, 3, 8);
  RngStream init(4);
  const ModelParams p = vpgnn::init_params(4, 3, init);

  auto loss_at = [&](const ModelParams& probe) {
    RngStream rng(77);
    return vpgnn::dgi_loss(probe, g, rng).loss;
  };
  RngStream rng(77);
  const auto analytic = vpgnn::dgi_loss(p, g, rng);

  const Dense fd_w1 = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = p;
        probe.w1 = w;
        return loss_at(probe);
      },
      p.w1, 1e-4);
  const Dense fd_w2 = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = p;
        probe.w2 = w;
        return loss_at(probe);
      },
      p.w2, 1e-4);
  const Dense fd_wr = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = p;
        probe.w_r = w;
        return loss_at(probe);
      },
      p.w_r, 1e-4);

  for (std::size_t i = 0; i < fd_w1.values.size(); ++i) {
    CHECK(rel_err(analytic.grads.dw1.values[i], fd_w1.values[i]) <= 1e-4);
  }
  for (std::size_t i = 0; i < fd_w2.values.size(); ++i) {
    CHECK(rel_err(analytic.grads.dw2.values[i], fd_w2.values[i]) <= 1e-4);
  }
  for (std::size_t i = 0; i < fd_wr.values.size(); ++i) {
    CHECK(rel_err(analytic.grads.dw_r.values[i], fd_wr.values[i]) <= 1e-4);
  }
}

TEST_CASE("pretrain validates its configuration") {
  const auto g = random_graph(6, 3, 1, 4);
  PretrainConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(vpgnn::pretrain(g, cfg), std::invalid_argument);
  cfg.epochs = 1;
  cfg.lr = 0.0;
  CHECK_THROWS_AS(vpgnn::pretrain(g, cfg), std::invalid_argument);
}

TEST_CASE("training reduces the pretext loss on a small benchmark") {
  vpgnn::GenConfig gen;
  gen.n_legit_users = 60;
  gen.n_abusers = 3;
  gen.embed_dim = 6;
  gen.raw_feature_dim = 4;
  gen.seed = 5;
  const auto world = vpgnn::generate_world(gen);
  const auto g = vpgnn::build_benchmark_graph(world, gen);

  PretrainConfig cfg;
  cfg.epochs = 30;
  cfg.lr = 0.01;
  cfg.hidden_dim = 16;
  cfg.seed = 0;
  vpgnn::TrainingCurve curve;
  const auto model = vpgnn::pretrain(g, cfg, &curve);
  REQUIRE(curve.epoch_loss.size() == 30);
  CHECK(model.final_loss < curve.epoch_loss.front());
  CHECK(model.epochs_run == 30);
  CHECK(model.graph_fingerprint == vpgnn::graph_fingerprint(g));
}

TEST_CASE("pretraining twice saves identical bytes") {
  namespace fs = std::filesystem;
  const auto g = random_graph(12, 3, 9, 10);
  PretrainConfig cfg;
  cfg.epochs = 5;
  cfg.lr = 0.01;
  cfg.hidden_dim = 6;
  cfg.seed = 123;
  const auto dir = fs::temp_directory_path() / "vpgnn_pretrain_det";
  fs::create_directories(dir);
  const auto path_a = (dir / "a.bin").string();
  const auto path_b = (dir / "b.bin").string();
  vpgnn::save_model(vpgnn::pretrain(g, cfg), path_a);
  vpgnn::save_model(vpgnn::pretrain(g, cfg), path_b);
  const auto bytes_a = file_bytes(path_a);
  CHECK(!bytes_a.empty());
  CHECK(bytes_a == file_bytes(path_b));
  fs::remove_all(dir);
}

TEST_CASE("model round-trips bitwise") {
  namespace fs = std::filesystem;
  const auto g = random_graph(8, 3, 2, 6);
  PretrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden_dim = 4;
  const auto model = vpgnn::pretrain(g, cfg);
  const auto dir = fs::temp_directory_path() / "vpgnn_model_io";
  fs::create_directories(dir);
  const auto path = (dir / "model.bin").string();
  vpgnn::save_model(model, path);
  const auto loaded = vpgnn::load_model(path);
  CHECK(loaded.params.w1 == model.params.w1);
  CHECK(loaded.params.w2 == model.params.w2);
  CHECK(loaded.params.w_r == model.params.w_r);
  CHECK(loaded.seed == model.seed);
  CHECK(loaded.epochs_run == model.epochs_run);
  CHECK(loaded.final_loss == model.final_loss);
  CHECK(loaded.graph_fingerprint == model.graph_fingerprint);
  fs::remove_all(dir);
}

TEST_CASE("truncated and corrupt model files are rejected") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "vpgnn_model_bad";
  fs::create_directories(dir);
  const auto g = random_graph(8, 3, 2, 6);
  PretrainConfig cfg;
  cfg.epochs = 1;
  cfg.hidden_dim = 4;
  const auto path = (dir / "model.bin").string();
  vpgnn::save_model(vpgnn::pretrain(g, cfg), path);

  const auto bytes = file_bytes(path);
  {
    std::ofstream out(dir / "truncated.bin", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(vpgnn::load_model((dir / "truncated.bin").string()),
                  std::runtime_error);
  {
    std::ofstream out(dir / "garbage.bin", std::ios::binary);
    out << "not a model";
  }
  CHECK_THROWS_AS(vpgnn::load_model((dir / "garbage.bin").string()),
                  std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("feature-width mismatch surfaces at use") {
  const auto g_narrow = random_graph(8, 3, 2, 6);
  const auto g_wide = random_graph(8, 5, 2, 6);
  PretrainConfig cfg;
  cfg.epochs = 1;
  cfg.hidden_dim = 4;
  const auto model = vpgnn::pretrain(g_narrow, cfg);
  CHECK_THROWS_AS(vpgnn::gnn_forward(model.params, g_wide, g_wide.features()),
                  std::invalid_argument);
}

TEST_CASE("fingerprint tracks structure, features and labels") {
  const auto g = random_graph(8, 3, 2, 6);
  const auto base = vpgnn::graph_fingerprint(g);
  CHECK(base == vpgnn::graph_fingerprint(g));
  Dense other = g.features();
  other.values[0] += 1.0;
  CHECK(vpgnn::graph_fingerprint(g.with_features(other)) != base);
  std::vector<std::int8_t> labels(g.n_nodes(), 0);
  labels[3] = 1;
  CHECK(vpgnn::graph_fingerprint(g.with_labels(labels)) != base);
}
