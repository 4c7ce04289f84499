#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vpgnn/prompt.hpp"
#include "vpgnn/synthgen.hpp"

using vpgnn::Dense;
using vpgnn::LabeledSet;
using vpgnn::ModelParams;
using vpgnn::NodeId;
using vpgnn::OrderGraph;
using vpgnn::PretrainedModel;
using vpgnn::PromptMatrix;
using vpgnn::RngStream;
using vpgnn::TuneConfig;
using vpgnn::TuneMode;

namespace {

Dense identity(std::size_t n) {
  Dense m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

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

PretrainedModel model_for(const OrderGraph& g, std::size_t d, std::uint64_t seed) {
  RngStream rng(seed);
  PretrainedModel m;
  m.params = vpgnn::init_params(g.feature_dim(), d, rng);
  return m;
}

PromptMatrix rows(std::vector<double> z0, std::vector<double> z1) {
  PromptMatrix p;
  p.z = Dense(2, z0.size());
  std::copy(z0.begin(), z0.end(), p.z.row_ptr(0));
  std::copy(z1.begin(), z1.end(), p.z.row_ptr(1));
  return p;
}

}  // namespace

TEST_CASE("make_prompt pairs tokens and feeds the projection head") {
  const std::vector<double> t = {0.5, -2.0};
  const std::vector<double> z = {2.0, 0.25};
  const auto pair = vpgnn::make_prompt(t, z);
  CHECK(pair.node_token == t);
  CHECK(pair.context_token == z);
  CHECK(vpgnn::proj_head(pair.node_token, pair.context_token) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(vpgnn::make_prompt({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("labeled set validation") {
  const auto g = random_graph(4, 2, 1, 2);
  LabeledSet both{{{0, 0}, {1, 1}}};
  vpgnn::validate_labeled_set(both, g);
  CHECK_THROWS_AS(vpgnn::validate_labeled_set(LabeledSet{{{0, 0}}}, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(vpgnn::validate_labeled_set(LabeledSet{{{0, 0}, {0, 1}}}, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(vpgnn::validate_labeled_set(LabeledSet{{{9, 0}, {1, 1}}}, g),
                  std::invalid_argument);
  CHECK_THROWS_AS(vpgnn::validate_labeled_set(LabeledSet{{{0, 2}, {1, 1}}}, g),
                  std::invalid_argument);
}

TEST_CASE("mode names round-trip") {
  for (const auto mode :
       {TuneMode::kVpgnnFull, TuneMode::kPromptOnly, TuneMode::kNoPrompt,
        TuneMode::kRandomInit, TuneMode::kNoConstraint}) {
    CHECK(vpgnn::parse_tune_mode(vpgnn::to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(vpgnn::parse_tune_mode("bogus"), std::invalid_argument);
}

TEST_CASE("singleton class with identity readout gives sigmoid of the token") {
  const auto g = random_graph(2, 3, 2, 1);
  PretrainedModel model = model_for(g, 3, 4);
  model.params.w_r = identity(3);
  const Dense h = vpgnn::gnn_forward(model.params, g, g.features());

  LabeledSet labeled{{{0, 0}, {1, 1}}};
  RngStream rng(5);
  const auto prompt = vpgnn::init_context_tokens(model, g, labeled, 0, rng);
  for (std::size_t cls = 0; cls < 2; ++cls) {
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(prompt.z(cls, k) ==
            doctest::Approx(vpgnn::sigmoid(h(cls, k))).epsilon(1e-12));
    }
  }
}

TEST_CASE("neighbor augmentation changes the initialization") {
  // Node 0 (class 0) has neighbor 1 with a distinct embedding. Positive
  // weights keep the first-layer activations alive.
  Dense x(3, 2);
  x.values = {1.0, 0.2, 3.0, 2.0, 0.5, 0.5};
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}}, x);
  PretrainedModel model = model_for(g, 4, 6);
  for (double& v : model.params.w1.values) {
    v = std::abs(v) + 0.05;
  }
  LabeledSet labeled{{{0, 0}, {2, 1}}};
  RngStream rng_zero(7);
  RngStream rng_some(7);
  const auto without = vpgnn::init_context_tokens(model, g, labeled, 0, rng_zero);
  const auto with = vpgnn::init_context_tokens(model, g, labeled, 2, rng_some);
  CHECK(without.z.values != with.z.values);
}

TEST_CASE("context tokens stay in the open unit interval") {
  const auto g = random_graph(10, 3, 8, 8);
  const PretrainedModel model = model_for(g, 5, 9);
  LabeledSet labeled{{{0, 0}, {3, 1}, {7, 1}, {5, 0}}};
  RngStream rng(11);
  const auto prompt = vpgnn::init_context_tokens(model, g, labeled, 3, rng);
  for (double v : prompt.z.values) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("initialization requires both classes") {
  const auto g = random_graph(4, 2, 1, 2);
  const PretrainedModel model = model_for(g, 3, 2);
  RngStream rng(0);
  CHECK_THROWS_AS(
      vpgnn::init_context_tokens(model, g, LabeledSet{{{0, 1}, {1, 1}}}, 0, rng),
      std::invalid_argument);
}

TEST_CASE("random initialization is seeded and differs from readout init") {
  RngStream rng_a(3);
  RngStream rng_b(3);
  const auto za = vpgnn::init_random(6, rng_a);
  const auto zb = vpgnn::init_random(6, rng_b);
  CHECK(za.z.values == zb.z.values);
  CHECK(za.z.rows == 2);
  CHECK(za.z.cols == 6);

  const auto g = random_graph(6, 3, 4, 4);
  const PretrainedModel model = model_for(g, 6, 5);
  LabeledSet labeled{{{0, 0}, {1, 1}}};
  RngStream rng_c(3);
  const auto readout_init = vpgnn::init_context_tokens(model, g, labeled, 0, rng_c);
  CHECK(za.z.values != readout_init.z.values);
}

TEST_CASE("orthogonal penalty fixtures") {
  CHECK(vpgnn::orthogonal_penalty(rows({1, 0}, {0, 1})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vpgnn::orthogonal_penalty(rows({1, 0}, {1, 0})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(vpgnn::orthogonal_penalty(rows({1, 0}, {0, 2})) == doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("orthogonal penalty is zero exactly on orthonormal rows") {
  // Rotated orthonormal pair stays at zero; any or scaling off it does not.
  const double c = std::cos(0.37);
  const double s = std::sin(0.37);
  CHECK(vpgnn::orthogonal_penalty(rows({c, s}, {-s, c})) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(vpgnn::orthogonal_penalty(rows({c, s}, {-1.1 * s, 1.1 * c})) > 0.0);
  RngStream rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = vpgnn::init_random(4, rng);
    CHECK(vpgnn::orthogonal_penalty(z) >= 0.0);
  }
}

TEST_CASE("orthogonal penalty gradient matches finite differences") {
  RngStream rng(17);
  PromptMatrix z = vpgnn::init_random(5, rng);
  const Dense analytic = vpgnn::orthogonal_penalty_grad(z);
  const Dense fd = vpgnn::finite_diff_grad(
      [](const Dense& m) { return vpgnn::orthogonal_penalty(PromptMatrix{m}); },
      z.z, 1e-5);
  for (std::size_t i = 0; i < fd.values.size(); ++i) {
    CHECK(rel_err(analytic.values[i], fd.values[i]) <= 1e-4);
  }
}

TEST_CASE("prediction fixtures") {
  Dense h(1, 2);
  h.values = {1.0, 0.0};
  CHECK(vpgnn::predict_from_tokens(h, rows({0, 1}, {1, 0}), {0}) ==
        std::vector<int>{1});
  // Tie resolves to legitimate.
  CHECK(vpgnn::predict_from_tokens(h, rows({0.5, 0.5}, {0.5, 0.5}), {0}) ==
        std::vector<int>{0});
}

TEST_CASE("prediction is invariant under common positive scaling") {
  const auto g = random_graph(12, 3, 21, 10);
  const PretrainedModel model = model_for(g, 4, 22);
  RngStream rng(23);
  PromptMatrix z = vpgnn::init_random(4, rng);
  std::vector<NodeId> nodes;
  for (NodeId i = 0; i < 12; ++i) {
    nodes.push_back(i);
  }
  const auto base = vpgnn::predict(model.params, z, g, nodes);
  PromptMatrix scaled = z;
  vpgnn::scale_inplace(scaled.z, 3.7);
  CHECK(vpgnn::predict(model.params, scaled, g, nodes) == base);
}

TEST_CASE("swapping the context tokens flips non-tied predictions") {
  const auto g = random_graph(12, 3, 24, 10);
  const PretrainedModel model = model_for(g, 4, 25);
  RngStream rng(26);
  PromptMatrix z = vpgnn::init_random(4, rng);
  PromptMatrix swapped = rows(z.context_token(1), z.context_token(0));
  const Dense h = vpgnn::gnn_forward(model.params, g, g.features());
  std::vector<NodeId> nodes;
  for (NodeId i = 0; i < 12; ++i) {
    nodes.push_back(i);
  }
  const auto base = vpgnn::predict_from_tokens(h, z, nodes);
  const auto flipped = vpgnn::predict_from_tokens(h, swapped, nodes);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto t = std::vector<double>(h.row_ptr(i), h.row_ptr(i) + 4);
    const double s0 = vpgnn::proj_head(t, z.context_token(0));
    const double s1 = vpgnn::proj_head(t, z.context_token(1));
    if (s0 != s1) {
      CHECK(base[i] != flipped[i]);
    }
  }
}

TEST_CASE("prompt loss at zero logits is ln 2 plus the scaled penalty") {
  const auto g = random_graph(6, 3, 31, 4);
  ModelParams params;
  params.w1 = Dense(3, 4);  // zero encoder -> zero tokens -> zero logits
  params.w2 = Dense(4, 4);
  params.w_r = identity(4);
  RngStream rng(32);
  const PromptMatrix z = vpgnn::init_random(4, rng);
  LabeledSet labeled{{{0, 0}, {2, 1}, {4, 1}}};
  const double lambda = 0.01;
  const auto res = vpgnn::prompt_loss(params, z, g, labeled, lambda);
  // (1/(2L)) * (2L ln 2 + lambda * penalty)
  const double expected =
      std::log(2.0) + lambda * vpgnn::orthogonal_penalty(z) /
                          static_cast<double>(2 * labeled.examples.size());
  CHECK(res.loss == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("prompt objective gradients match finite differences") {
  const auto g = random_graph(8, 4, 33, 6);
  RngStream rng(34);
  const ModelParams params = vpgnn::init_params(4, 3, rng);
  const PromptMatrix z = vpgnn::init_random(3, rng);
  LabeledSet labeled{{{1, 0}, {3, 1}, {6, 0}, {7, 1}}};
  const double lambda = 0.01;

  const auto analytic = vpgnn::prompt_loss(params, z, g, labeled, lambda);
  const Dense fd_z = vpgnn::finite_diff_grad(
      [&](const Dense& m) {
        return vpgnn::prompt_loss(params, PromptMatrix{m}, g, labeled, lambda).loss;
      },
      z.z, 1e-4);
  const Dense fd_w1 = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = params;
        probe.w1 = w;
        return vpgnn::prompt_loss(probe, z, g, labeled, lambda).loss;
      },
      params.w1, 1e-4);
  const Dense fd_w2 = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = params;
        probe.w2 = w;
        return vpgnn::prompt_loss(probe, z, g, labeled, lambda).loss;
      },
      params.w2, 1e-4);
  for (std::size_t i = 0; i < fd_z.values.size(); ++i) {
    CHECK(rel_err(analytic.dz.values[i], fd_z.values[i]) <= 1e-4);
  }
  for (std::size_t i = 0; i < fd_w1.values.size(); ++i) {
    CHECK(rel_err(analytic.dw1.values[i], fd_w1.values[i]) <= 1e-4);
  }
  for (std::size_t i = 0; i < fd_w2.values.size(); ++i) {
    CHECK(rel_err(analytic.dw2.values[i], fd_w2.values[i]) <= 1e-4);
  }
}

TEST_CASE("tuning saturates a two-node toy task") {
  // Two isolated nodes: a connected pair would pool to identical tokens
  // under the symmetric normalization and be unseparable by construction.
  // Positive inputs and first-layer weights keep both tokens alive.
  Dense x(2, 2);
  x.values = {1.0, 0.1, 0.1, 1.5};
  const auto g = vpgnn::build_graph({}, x);
  PretrainedModel model = model_for(g, 4, 41);
  for (double& v : model.params.w1.values) {
    v = std::abs(v) + 0.05;
  }
  LabeledSet labeled{{{0, 0}, {1, 1}}};
  RngStream rng(42);
  const auto z0 = vpgnn::init_context_tokens(model, g, labeled, 0, rng);

  TuneConfig cfg;
  cfg.mode = TuneMode::kVpgnnFull;
  cfg.lambda = 0.0;
  cfg.epochs = 300;
  cfg.lr = 0.05;
  const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, cfg);
  const auto pred = vpgnn::predict(tuned.params, tuned.prompt, g, {0, 1});
  CHECK(pred == std::vector<int>{0, 1});
}

TEST_CASE("prompt-only mode freezes the model bitwise") {
  const auto g = random_graph(10, 3, 43, 8);
  const PretrainedModel model = model_for(g, 5, 44);
  LabeledSet labeled{{{0, 0}, {4, 1}, {8, 1}, {2, 0}}};
  RngStream rng(45);
  const auto z0 = vpgnn::init_context_tokens(model, g, labeled, 2, rng);
  TuneConfig cfg;
  cfg.mode = TuneMode::kPromptOnly;
  cfg.epochs = 25;
  cfg.lr = 0.02;
  const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, cfg);
  CHECK(tuned.params.w1 == model.params.w1);
  CHECK(tuned.params.w2 == model.params.w2);
  CHECK(tuned.params.w_r == model.params.w_r);
  CHECK(tuned.prompt.z.values != z0.z.values);
}

TEST_CASE("no-constraint mode ignores lambda") {
  const auto g = random_graph(8, 3, 46, 6);
  const PretrainedModel model = model_for(g, 4, 47);
  LabeledSet labeled{{{0, 0}, {5, 1}}};
  RngStream rng(48);
  const auto z0 = vpgnn::init_context_tokens(model, g, labeled, 0, rng);
  TuneConfig cfg;
  cfg.mode = TuneMode::kNoConstraint;
  cfg.lambda = 50.0;  // would dominate the objective if applied
  cfg.epochs = 3;
  cfg.lr = 0.01;
  const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, cfg);
  LabeledSet probe = labeled;
  const auto raw = vpgnn::prompt_loss(model.params, z0, g, probe, 0.0);
  CHECK(tuned.epoch_loss.front() == doctest::Approx(raw.loss).epsilon(1e-12));
}

TEST_CASE("the objective decreases over the first epochs with the penalty on") {
  const auto g = random_graph(10, 3, 49, 8);
  const PretrainedModel model = model_for(g, 4, 50);
  LabeledSet labeled{{{1, 0}, {6, 1}, {9, 1}, {3, 0}}};
  RngStream rng(51);
  const auto z0 = vpgnn::init_context_tokens(model, g, labeled, 1, rng);
  TuneConfig cfg;
  cfg.mode = TuneMode::kVpgnnFull;
  cfg.lambda = 0.01;
  cfg.epochs = 5;
  cfg.lr = 0.01;
  const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, cfg);
  REQUIRE(tuned.epoch_loss.size() == 5);
  CHECK(tuned.epoch_loss[1] < tuned.epoch_loss[0]);
  for (double loss : tuned.epoch_loss) {
    CHECK(loss >= 0.0);
  }
}

TEST_CASE("validation selection returns the initial state when tuning never helps") {
  // With zero epochs the initial state comes back untouched.
  const auto g = random_graph(8, 3, 52, 6);
  const PretrainedModel model = model_for(g, 4, 53);
  LabeledSet labeled{{{0, 0}, {5, 1}}};
  LabeledSet validation{{{1, 0}, {6, 1}}};
  RngStream rng(54);
  const auto z0 = vpgnn::init_context_tokens(model, g, labeled, 0, rng);
  TuneConfig cfg;
  cfg.mode = TuneMode::kVpgnnFull;
  cfg.epochs = 0;
  const auto tuned = vpgnn::prompt_finetune(model, z0, g, labeled, cfg, &validation);
  CHECK(tuned.selected_epoch == 0);
  CHECK(tuned.prompt.z.values == z0.z.values);
  CHECK(tuned.params.w1 == model.params.w1);
}

TEST_CASE("prompt_finetune rejects the no-prompt mode") {
  const auto g = random_graph(4, 2, 55, 2);
  const PretrainedModel model = model_for(g, 3, 56);
  LabeledSet labeled{{{0, 0}, {1, 1}}};
  RngStream rng(57);
  const auto z0 = vpgnn::init_random(3, rng);
  TuneConfig cfg;
  cfg.mode = TuneMode::kNoPrompt;
  CHECK_THROWS_AS(vpgnn::prompt_finetune(model, z0, g, labeled, cfg),
                  std::invalid_argument);
}

TEST_CASE("zeroed encoder makes the initial classifier loss ln 2") {
  const auto g = random_graph(6, 3, 58, 4);
  ModelParams params;
  params.w1 = Dense(3, 4);
  params.w2 = Dense(4, 4);
  params.w_r = identity(4);
  RngStream rng(59);
  const Dense head = vpgnn::glorot_uniform(4, 2, rng);
  LabeledSet labeled{{{0, 0}, {3, 1}}};
  const auto res = vpgnn::classifier_loss(params, head, g, labeled);
  CHECK(res.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("classifier gradients match finite differences") {
  const auto g = random_graph(8, 3, 60, 6);
  RngStream rng(61);
  const ModelParams params = vpgnn::init_params(3, 4, rng);
  const Dense head = vpgnn::glorot_uniform(4, 2, rng);
  LabeledSet labeled{{{0, 0}, {3, 1}, {6, 1}}};

  const auto analytic = vpgnn::classifier_loss(params, head, g, labeled);
  const Dense fd_head = vpgnn::finite_diff_grad(
      [&](const Dense& h) {
        return vpgnn::classifier_loss(params, h, g, labeled).loss;
      },
      head, 1e-4);
  const Dense fd_w1 = vpgnn::finite_diff_grad(
      [&](const Dense& w) {
        ModelParams probe = params;
        probe.w1 = w;
        return vpgnn::classifier_loss(probe, head, g, labeled).loss;
      },
      params.w1, 1e-4);
  for (std::size_t i = 0; i < fd_head.values.size(); ++i) {
    CHECK(rel_err(analytic.dhead.values[i], fd_head.values[i]) <= 1e-4);
  }
  for (std::size_t i = 0; i < fd_w1.values.size(); ++i) {
    CHECK(rel_err(analytic.dw1.values[i], fd_w1.values[i]) <= 1e-4);
  }
}

TEST_CASE("traditional fine-tuning is deterministic in the seed") {
  const auto g = random_graph(10, 3, 62, 8);
  const PretrainedModel model = model_for(g, 4, 63);
  LabeledSet labeled{{{0, 0}, {4, 1}, {7, 1}, {2, 0}}};
  TuneConfig cfg;
  cfg.mode = TuneMode::kNoPrompt;
  cfg.epochs = 10;
  cfg.lr = 0.01;
  cfg.seed = 99;
  const auto a = vpgnn::traditional_finetune(model, g, labeled, cfg);
  const auto b = vpgnn::traditional_finetune(model, g, labeled, cfg);
  CHECK(a.head == b.head);
  CHECK(a.params.w1 == b.params.w1);
  CHECK(a.epoch_loss == b.epoch_loss);
}
