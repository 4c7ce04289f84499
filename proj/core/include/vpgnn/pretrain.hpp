#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vpgnn/graph.hpp"
#include "vpgnn/nn.hpp"

namespace vpgnn {

struct PretrainConfig {
  std::size_t epochs = 50;
  double lr = 0.01;
  std::size_t hidden_dim = 128;
  std::uint64_t seed = 0;
};

struct PretrainedModel {
  ModelParams params;
  // Training metadata; all fields deterministic so identical runs save
  // identical bytes.
  std::uint32_t epochs_run = 0;
  double final_loss = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t graph_fingerprint = 0;
};

struct DgiGrads {
  Dense dw1;
  Dense dw2;
  Dense dw_r;
};

struct DgiResult {
  double loss = 0.0;
  DgiGrads grads;
  double mean_positive_logit = 0.0;
  double mean_negative_logit = 0.0;
};

// Pretext objective: encode the graph, pool a global summary, encode a
// freshly corrupted twin, and score every node against the summary with the
// inner-product head. Loss is the mean binary cross-entropy over the 2n
// (positive, negative) terms; gradients flow into W1, W2 and W_r through
// both encoder branches and through the summary.
DgiResult dgi_loss(const ModelParams& params, const OrderGraph& g,
                   RngStream& rng);

struct TrainingCurve {
  std::vector<double> epoch_loss;  // loss measured before each update
};

// Full-batch pretext training: one Adam step per epoch with a fresh
// corruption each time. Deterministic in (graph, config). Aborts with a
// diagnostic if the loss turns non-finite.
PretrainedModel pretrain(const OrderGraph& g, const PretrainConfig& cfg,
                         TrainingCurve* curve = nullptr);

// Stable structural digest of adjacency, features and labels; recorded in
// model metadata so a model can be traced to its pre-training graph.
std::uint64_t graph_fingerprint(const OrderGraph& g);

// Model persistence, little-endian binary:
//   magic "VPGM" | u32 version | u32 f | u32 d |
//   u64 seed | u32 epochs_run | f64 final_loss | u64 graph_fingerprint |
//   W1 (f*d doubles, row-major) | W2 (d*d) | W_r (d*d)
// load_model validates magic, version and exact payload size.
void save_model(const PretrainedModel& m, const std::string& path);
PretrainedModel load_model(const std::string& path);

}  // namespace vpgnn
