#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vpgnn/graph.hpp"
#include "vpgnn/nn.hpp"
#include "vpgnn/pretrain.hpp"

namespace vpgnn {

// Binary task: class 0 = legitimate, class 1 = abusive.
inline constexpr std::size_t kNumClasses = 2;

// Learnable context tokens, one row per class, same width as node tokens.
struct PromptMatrix {
  Dense z;  // kNumClasses x d

  std::vector<double> context_token(std::size_t cls) const {
    return {z.row_ptr(cls), z.row_ptr(cls) + z.cols};
  }
};

struct LabeledExample {
  NodeId node = 0;
  int label = 0;  // 0 or 1
};

struct LabeledSet {
  std::vector<LabeledExample> examples;
};

// Checks node validity, duplicates, label range and that both classes are
// present; throws std::invalid_argument otherwise.
void validate_labeled_set(const LabeledSet& labeled, const OrderGraph& g);

enum class TuneMode {
  kVpgnnFull,    // tune W1, W2 and Z, readout-initialized tokens
  kPromptOnly,   // freeze the model, tune only Z
  kNoPrompt,     // traditional fine-tuning with a fresh classification head
  kRandomInit,   // as kVpgnnFull but with randomly initialized tokens
  kNoConstraint  // as kVpgnnFull with the orthogonal penalty disabled
};

// Mode names as they appear on the command line: vpgnn, prompt-only,
// no-prompt, random-init, no-constraint.
TuneMode parse_tune_mode(const std::string& name);
std::string to_string(TuneMode mode);

struct TuneConfig {
  TuneMode mode = TuneMode::kVpgnnFull;
  std::size_t eta = 5;      // neighbors sampled per labeled node at init
  double lambda = 0.01;     // orthogonal-constraint coefficient
  std::size_t epochs = 300; // 0 = keep the initial state
  double lr = 0.001;
  std::uint64_t seed = 0;
};

void validate_tune_config(const TuneConfig& cfg);

// A prompt: the ordered (node token, context token) pair, shaped exactly
// like the (node, graph-summary) pairs of the pretext task so the same
// projection head scores both.
struct TokenPair {
  std::vector<double> node_token;
  std::vector<double> context_token;
};

TokenPair make_prompt(const std::vector<double>& node_token,
                      const std::vector<double>& context_token);

// Context-token initialization: for each class, pool the labeled nodes of
// that class plus eta sampled neighbors of each through the pre-trained
// readout. Duplicate members are kept once.
PromptMatrix init_context_tokens(const PretrainedModel& model,
                                 const OrderGraph& g, const LabeledSet& labeled,
                                 std::size_t eta, RngStream& rng);

// Ablation initialization: seeded uniform init matching the encoder scheme.
PromptMatrix init_random(std::size_t hidden_dim, RngStream& rng);

// || Z Z^T - I ||_F^2 and its gradient 4 (Z Z^T - I) Z.
double orthogonal_penalty(const PromptMatrix& prompt);
Dense orthogonal_penalty_grad(const PromptMatrix& prompt);

// One evaluation of the prompt-tuning objective
//   (1/(2|labeled|)) * (sum of pairwise BCE + lambda * ||Z Z^T - I||^2)
// over all (labeled node, class) token pairs, with exact gradients for Z
// and the encoder weights. The 1/(2|labeled|) factor only normalizes the
// reported value; the relative weight of the two terms follows the
// unnormalized objective.
struct PromptLossResult {
  double loss = 0.0;
  Dense dz;
  Dense dw1;
  Dense dw2;
};
PromptLossResult prompt_loss(const ModelParams& params, const PromptMatrix& prompt,
                             const OrderGraph& g, const LabeledSet& labeled,
                             double lambda);

// One evaluation of the traditional fine-tuning objective: mean softmax
// cross-entropy of the d x 2 head over the labeled nodes, with gradients.
struct ClassifierLossResult {
  double loss = 0.0;
  Dense dhead;
  Dense dw1;
  Dense dw2;
};
ClassifierLossResult classifier_loss(const ModelParams& params, const Dense& head,
                                     const OrderGraph& g, const LabeledSet& labeled);

// Label 1 iff t_i . z_1 > t_i . z_0, strictly; ties resolve to legitimate.
std::vector<int> predict(const ModelParams& params, const PromptMatrix& prompt,
                         const OrderGraph& g, const std::vector<NodeId>& nodes);

// Same rule on precomputed node tokens.
std::vector<int> predict_from_tokens(const Dense& h, const PromptMatrix& prompt,
                                     const std::vector<NodeId>& nodes);

struct TuneResult {
  ModelParams params;
  PromptMatrix prompt;
  std::vector<double> epoch_loss;   // objective before each update
  std::size_t selected_epoch = 0;   // 0 = initial state; set when validating
  double selected_validation_f1 = 0.0;
};

// Prompt-based fine-tuning: minimizes the prompt_loss objective with Adam.
// kVpgnnFull / kRandomInit / kNoConstraint update {W1, W2, Z};
// kPromptOnly updates Z only and reuses node tokens computed once. The
// readout stays frozen in every mode. When a validation set is given, the
// state after the epoch with the best validation F1 is returned (earliest
// epoch wins ties; the initial state counts as epoch 0).
TuneResult prompt_finetune(const PretrainedModel& model,
                           const PromptMatrix& initial_prompt,
                           const OrderGraph& g, const LabeledSet& labeled,
                           const TuneConfig& cfg,
                           const LabeledSet* validation = nullptr);

// Traditional fine-tuning baseline: a fresh d x 2 linear head trained with
// softmax cross-entropy together with the encoder.
struct Classifier {
  ModelParams params;
  Dense head;  // d x 2
  std::vector<double> epoch_loss;
  std::size_t selected_epoch = 0;
  double selected_validation_f1 = 0.0;
};

Classifier traditional_finetune(const PretrainedModel& model,
                                const OrderGraph& g, const LabeledSet& labeled,
                                const TuneConfig& cfg,
                                const LabeledSet* validation = nullptr);

std::vector<int> predict_classifier(const Classifier& clf, const OrderGraph& g,
                                    const std::vector<NodeId>& nodes);

}  // namespace vpgnn
