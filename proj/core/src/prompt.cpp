#include "vpgnn/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "vpgnn/metrics.hpp"

namespace vpgnn {
namespace {

std::vector<NodeId> node_list(const LabeledSet& labeled) {
  std::vector<NodeId> nodes;
  nodes.reserve(labeled.examples.size());
  for (const auto& ex : labeled.examples) {
    nodes.push_back(ex.node);
  }
  return nodes;
}

std::vector<int> label_list(const LabeledSet& labeled) {
  std::vector<int> labels;
  labels.reserve(labeled.examples.size());
  for (const auto& ex : labeled.examples) {
    labels.push_back(ex.label);
  }
  return labels;
}

double validation_f1_from_tokens(const Dense& h, const PromptMatrix& prompt,
                                 const LabeledSet& validation) {
  return f1_score(predict_from_tokens(h, prompt, node_list(validation)),
                  label_list(validation));
}

struct PairGrads {
  double loss = 0.0;
  Dense dz;
  Dense dh;
};

// The prompt-tuning objective scaled by 1/(2|labeled|): the BCE sum over
// all (node token, context token) pairs plus lambda times the orthogonal
// penalty. The uniform scale keeps the reported loss O(1) without changing
// the balance between the two terms.
PairGrads prompt_pair_grads(const Dense& h, const PromptMatrix& prompt,
                            const LabeledSet& labeled, double lambda) {
  const std::size_t d = h.cols;
  const double inv =
      1.0 / static_cast<double>(kNumClasses * labeled.examples.size());
  PairGrads out;
  out.dz = Dense(kNumClasses, d);
  out.dh = Dense(h.rows, d);
  for (const auto& ex : labeled.examples) {
    const double* t = h.row_ptr(ex.node);
    for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
      const double* z = prompt.z.row_ptr(cls);
      double logit = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        logit += t[k] * z[k];
      }
      const int match = ex.label == static_cast<int>(cls) ? 1 : 0;
      const auto bce = bce_with_logits(logit, match);
      out.loss += bce.loss;
      const double dlogit = bce.dlogit * inv;
      double* dz_row = out.dz.row_ptr(cls);
      double* dh_row = out.dh.row_ptr(ex.node);
      for (std::size_t k = 0; k < d; ++k) {
        dz_row[k] += dlogit * t[k];
        dh_row[k] += dlogit * z[k];
      }
    }
  }
  out.loss = (out.loss + lambda * orthogonal_penalty(prompt)) * inv;
  if (lambda != 0.0) {
    add_scaled(out.dz, orthogonal_penalty_grad(prompt), lambda * inv);
  }
  return out;
}

struct HeadGrads {
  double loss = 0.0;
  Dense dhead;
  Dense dh;
};

// Mean softmax cross-entropy of the two-way head over the labeled nodes.
HeadGrads head_pair_grads(const Dense& h, const Dense& head,
                          const LabeledSet& labeled) {
  const std::size_t d = h.cols;
  const double inv = 1.0 / static_cast<double>(labeled.examples.size());
  HeadGrads out;
  out.dhead = Dense(d, kNumClasses);
  out.dh = Dense(h.rows, d);
  for (const auto& ex : labeled.examples) {
    const double* t = h.row_ptr(ex.node);
    double logits[kNumClasses] = {0.0, 0.0};
    for (std::size_t k = 0; k < d; ++k) {
      logits[0] += t[k] * head(k, 0);
      logits[1] += t[k] * head(k, 1);
    }
    const double peak = std::max(logits[0], logits[1]);
    const double e0 = std::exp(logits[0] - peak);
    const double e1 = std::exp(logits[1] - peak);
    const double zsum = e0 + e1;
    const double p[kNumClasses] = {e0 / zsum, e1 / zsum};
    out.loss -= std::log(p[ex.label]) * inv;
    double* dh_row = out.dh.row_ptr(ex.node);
    for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
      const double dlogit =
          (p[cls] - (ex.label == static_cast<int>(cls) ? 1.0 : 0.0)) * inv;
      for (std::size_t k = 0; k < d; ++k) {
        out.dhead(k, cls) += dlogit * t[k];
        dh_row[k] += dlogit * head(k, cls);
      }
    }
  }
  return out;
}

}  // namespace

void validate_labeled_set(const LabeledSet& labeled, const OrderGraph& g) {
  bool seen_class[2] = {false, false};
  std::set<NodeId> seen_nodes;
  for (const auto& ex : labeled.examples) {
    if (ex.node >= g.n_nodes()) {
      throw std::invalid_argument("labeled set: node id out of range");
    }
    if (ex.label != 0 && ex.label != 1) {
      throw std::invalid_argument("labeled set: label must be 0 or 1");
    }
    if (!seen_nodes.insert(ex.node).second) {
      throw std::invalid_argument("labeled set: duplicate node " +
                                  std::to_string(ex.node));
    }
    seen_class[ex.label] = true;
  }
  if (!seen_class[0] || !seen_class[1]) {
    throw std::invalid_argument("labeled set: both classes must be present");
  }
}

TuneMode parse_tune_mode(const std::string& name) {
  if (name == "vpgnn") {
    return TuneMode::kVpgnnFull;
  }
  if (name == "prompt-only") {
    return TuneMode::kPromptOnly;
  }
  if (name == "no-prompt") {
    return TuneMode::kNoPrompt;
  }
  if (name == "random-init") {
    return TuneMode::kRandomInit;
  }
  if (name == "no-constraint") {
    return TuneMode::kNoConstraint;
  }
  throw std::invalid_argument(
      "unknown mode '" + name +
      "' (expected vpgnn|no-prompt|random-init|no-constraint|prompt-only)");
}

std::string to_string(TuneMode mode) {
  switch (mode) {
    case TuneMode::kVpgnnFull:
      return "vpgnn";
    case TuneMode::kPromptOnly:
      return "prompt-only";
    case TuneMode::kNoPrompt:
      return "no-prompt";
    case TuneMode::kRandomInit:
      return "random-init";
    case TuneMode::kNoConstraint:
      return "no-constraint";
  }
  throw std::invalid_argument("unknown mode value");
}

void validate_tune_config(const TuneConfig& cfg) {
  if (cfg.lambda < 0.0) {
    throw std::invalid_argument("tune config: lambda must be >= 0");
  }
  if (cfg.lr <= 0.0) {
    throw std::invalid_argument("tune config: lr must be positive");
  }
}

TokenPair make_prompt(const std::vector<double>& node_token,
                      const std::vector<double>& context_token) {
  if (node_token.size() != context_token.size()) {
    throw std::invalid_argument("make_prompt: token width mismatch");
  }
  return {node_token, context_token};
}

PromptMatrix init_context_tokens(const PretrainedModel& model,
                                 const OrderGraph& g, const LabeledSet& labeled,
                                 std::size_t eta, RngStream& rng) {
  validate_labeled_set(labeled, g);
  const Dense h = gnn_forward(model.params, g, g.features());
  const std::size_t d = model.params.hidden_dim();

  PromptMatrix prompt;
  prompt.z = Dense(kNumClasses, d);
  for (int cls = 0; cls < static_cast<int>(kNumClasses); ++cls) {
    std::set<NodeId> members;  // set: duplicates kept once, order stable
    for (const auto& ex : labeled.examples) {
      if (ex.label != cls) {
        continue;
      }
      members.insert(ex.node);
      for (NodeId nb : sample_neighbors(g, ex.node, eta, rng)) {
        members.insert(nb);
      }
    }
    Dense pooled(members.size(), d);
    std::size_t row = 0;
    for (NodeId node : members) {
      std::copy(h.row_ptr(node), h.row_ptr(node) + d, pooled.row_ptr(row));
      ++row;
    }
    const std::vector<double> token = readout(model.params.w_r, pooled);
    std::copy(token.begin(), token.end(), prompt.z.row_ptr(cls));
  }
  return prompt;
}

PromptMatrix init_random(std::size_t hidden_dim, RngStream& rng) {
  if (hidden_dim < 1) {
    throw std::invalid_argument("init_random: hidden_dim must be >= 1");
  }
  return {glorot_uniform(kNumClasses, hidden_dim, rng)};
}

double orthogonal_penalty(const PromptMatrix& prompt) {
  const Dense gram = matmul_a_bt(prompt.z, prompt.z);
  double acc = 0.0;
  for (std::size_t i = 0; i < gram.rows; ++i) {
    for (std::size_t j = 0; j < gram.cols; ++j) {
      const double m = gram(i, j) - (i == j ? 1.0 : 0.0);
      acc += m * m;
    }
  }
  return acc;
}

Dense orthogonal_penalty_grad(const PromptMatrix& prompt) {
  Dense gram = matmul_a_bt(prompt.z, prompt.z);
  for (std::size_t i = 0; i < gram.rows; ++i) {
    gram(i, i) -= 1.0;
  }
  Dense grad = matmul(gram, prompt.z);
  scale_inplace(grad, 4.0);
  return grad;
}

PromptLossResult prompt_loss(const ModelParams& params, const PromptMatrix& prompt,
                             const OrderGraph& g, const LabeledSet& labeled,
                             double lambda) {
  validate_labeled_set(labeled, g);
  if (prompt.z.rows != kNumClasses || prompt.z.cols != params.hidden_dim()) {
    throw std::invalid_argument("prompt_loss: prompt width mismatch");
  }
  if (lambda < 0.0) {
    throw std::invalid_argument("prompt_loss: lambda must be >= 0");
  }
  EncoderCache cache;
  const Dense h = gnn_forward(params, g, g.features(), &cache);
  PairGrads pair = prompt_pair_grads(h, prompt, labeled, lambda);
  const EncoderGrads enc = gnn_backward(cache, pair.dh);
  PromptLossResult out;
  out.loss = pair.loss;
  out.dz = std::move(pair.dz);
  out.dw1 = enc.dw1;
  out.dw2 = enc.dw2;
  return out;
}

ClassifierLossResult classifier_loss(const ModelParams& params, const Dense& head,
                                     const OrderGraph& g, const LabeledSet& labeled) {
  validate_labeled_set(labeled, g);
  if (head.rows != params.hidden_dim() || head.cols != kNumClasses) {
    throw std::invalid_argument("classifier_loss: head shape mismatch");
  }
  EncoderCache cache;
  const Dense h = gnn_forward(params, g, g.features(), &cache);
  HeadGrads pair = head_pair_grads(h, head, labeled);
  const EncoderGrads enc = gnn_backward(cache, pair.dh);
  ClassifierLossResult out;
  out.loss = pair.loss;
  out.dhead = std::move(pair.dhead);
  out.dw1 = enc.dw1;
  out.dw2 = enc.dw2;
  return out;
}

std::vector<int> predict_from_tokens(const Dense& h, const PromptMatrix& prompt,
                                     const std::vector<NodeId>& nodes) {
  if (h.cols != prompt.z.cols) {
    throw std::invalid_argument("predict: token width mismatch");
  }
  const std::size_t d = h.cols;
  const double* z0 = prompt.z.row_ptr(0);
  const double* z1 = prompt.z.row_ptr(1);
  std::vector<int> out;
  out.reserve(nodes.size());
  for (NodeId node : nodes) {
    if (node >= h.rows) {
      throw std::invalid_argument("predict: unknown node " + std::to_string(node));
    }
    const double* t = h.row_ptr(node);
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      s0 += t[k] * z0[k];
      s1 += t[k] * z1[k];
    }
    out.push_back(s1 > s0 ? 1 : 0);
  }
  return out;
}

std::vector<int> predict(const ModelParams& params, const PromptMatrix& prompt,
                         const OrderGraph& g, const std::vector<NodeId>& nodes) {
  if (params.hidden_dim() != prompt.z.cols) {
    throw std::invalid_argument("predict: model/prompt width mismatch");
  }
  const Dense h = gnn_forward(params, g, g.features());
  return predict_from_tokens(h, prompt, nodes);
}

TuneResult prompt_finetune(const PretrainedModel& model,
                           const PromptMatrix& initial_prompt,
                           const OrderGraph& g, const LabeledSet& labeled,
                           const TuneConfig& cfg, const LabeledSet* validation) {
  validate_tune_config(cfg);
  validate_labeled_set(labeled, g);
  if (validation != nullptr) {
    validate_labeled_set(*validation, g);
  }
  if (cfg.mode == TuneMode::kNoPrompt) {
    throw std::invalid_argument(
        "prompt_finetune: no-prompt mode is handled by traditional_finetune");
  }
  const std::size_t d = model.params.hidden_dim();
  if (initial_prompt.z.rows != kNumClasses || initial_prompt.z.cols != d) {
    throw std::invalid_argument("prompt_finetune: prompt width mismatch");
  }

  const bool frozen = cfg.mode == TuneMode::kPromptOnly;
  const double lambda = cfg.mode == TuneMode::kNoConstraint ? 0.0 : cfg.lambda;

  TuneResult result;
  result.params = model.params;
  result.prompt = initial_prompt;

  AdamState adam_z = make_adam_state(result.prompt.z);
  AdamState adam_w1 = make_adam_state(result.params.w1);
  AdamState adam_w2 = make_adam_state(result.params.w2);

  // With a frozen encoder the node tokens never change, so they are encoded
  // once and reused across epochs.
  EncoderCache cache;
  Dense h = gnn_forward(result.params, g, g.features(), frozen ? nullptr : &cache);

  ModelParams best_params = result.params;
  PromptMatrix best_prompt = result.prompt;
  double best_f1 = -1.0;
  if (validation != nullptr) {
    best_f1 = validation_f1_from_tokens(h, result.prompt, *validation);
    result.selected_epoch = 0;
  }

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    PairGrads pair = prompt_pair_grads(h, result.prompt, labeled, lambda);
    if (!std::isfinite(pair.loss)) {
      throw std::runtime_error("prompt_finetune: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    result.epoch_loss.push_back(pair.loss);

    adam_step(adam_z, result.prompt.z, pair.dz, cfg.lr);
    if (!frozen) {
      const EncoderGrads enc = gnn_backward(cache, pair.dh);
      adam_step(adam_w1, result.params.w1, enc.dw1, cfg.lr);
      adam_step(adam_w2, result.params.w2, enc.dw2, cfg.lr);
      h = gnn_forward(result.params, g, g.features(), &cache);
    }

    if (validation != nullptr) {
      const double f1 = validation_f1_from_tokens(h, result.prompt, *validation);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_params = result.params;
        best_prompt = result.prompt;
        result.selected_epoch = epoch;
      }
    }
  }

  if (validation != nullptr) {
    result.params = std::move(best_params);
    result.prompt = std::move(best_prompt);
    result.selected_validation_f1 = best_f1;
  } else {
    result.selected_epoch = cfg.epochs;
  }
  return result;
}

Classifier traditional_finetune(const PretrainedModel& model,
                                const OrderGraph& g, const LabeledSet& labeled,
                                const TuneConfig& cfg,
                                const LabeledSet* validation) {
  validate_tune_config(cfg);
  validate_labeled_set(labeled, g);
  if (validation != nullptr) {
    validate_labeled_set(*validation, g);
  }
  const std::size_t d = model.params.hidden_dim();

  Classifier clf;
  clf.params = model.params;
  RngStream head_rng(cfg.seed, 0x68656164);  // fresh head, seeded
  clf.head = glorot_uniform(d, kNumClasses, head_rng);

  AdamState adam_w1 = make_adam_state(clf.params.w1);
  AdamState adam_w2 = make_adam_state(clf.params.w2);
  AdamState adam_head = make_adam_state(clf.head);

  EncoderCache cache;
  Dense h = gnn_forward(clf.params, g, g.features(), &cache);

  auto validation_f1 = [&](const Dense& tokens) {
    std::vector<int> pred;
    pred.reserve(validation->examples.size());
    for (const auto& ex : validation->examples) {
      const double* t = tokens.row_ptr(ex.node);
      double s0 = 0.0;
      double s1 = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        s0 += t[k] * clf.head(k, 0);
        s1 += t[k] * clf.head(k, 1);
      }
      pred.push_back(s1 > s0 ? 1 : 0);
    }
    return f1_score(pred, label_list(*validation));
  };

  ModelParams best_params = clf.params;
  Dense best_head = clf.head;
  double best_f1 = -1.0;
  if (validation != nullptr) {
    best_f1 = validation_f1(h);
    clf.selected_epoch = 0;
  }

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    HeadGrads pair = head_pair_grads(h, clf.head, labeled);
    if (!std::isfinite(pair.loss)) {
      throw std::runtime_error("traditional_finetune: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    clf.epoch_loss.push_back(pair.loss);

    const EncoderGrads enc = gnn_backward(cache, pair.dh);
    adam_step(adam_head, clf.head, pair.dhead, cfg.lr);
    adam_step(adam_w1, clf.params.w1, enc.dw1, cfg.lr);
    adam_step(adam_w2, clf.params.w2, enc.dw2, cfg.lr);
    h = gnn_forward(clf.params, g, g.features(), &cache);

    if (validation != nullptr) {
      const double f1 = validation_f1(h);
      if (f1 > best_f1) {
        best_f1 = f1;
        best_params = clf.params;
        best_head = clf.head;
        clf.selected_epoch = epoch;
      }
    }
  }

  if (validation != nullptr) {
    clf.params = std::move(best_params);
    clf.head = std::move(best_head);
    clf.selected_validation_f1 = best_f1;
  } else {
    clf.selected_epoch = cfg.epochs;
  }
  return clf;
}

std::vector<int> predict_classifier(const Classifier& clf, const OrderGraph& g,
                                    const std::vector<NodeId>& nodes) {
  const Dense h = gnn_forward(clf.params, g, g.features());
  const std::size_t d = h.cols;
  std::vector<int> out;
  out.reserve(nodes.size());
  for (NodeId node : nodes) {
    if (node >= h.rows) {
      throw std::invalid_argument("predict_classifier: unknown node " +
                                  std::to_string(node));
    }
    const double* t = h.row_ptr(node);
    double s0 = 0.0;
    double s1 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      s0 += t[k] * clf.head(k, 0);
      s1 += t[k] * clf.head(k, 1);
    }
    out.push_back(s1 > s0 ? 1 : 0);
  }
  return out;
}

}  // namespace vpgnn
