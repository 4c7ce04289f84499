#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "vpgnn/dense.hpp"
#include "vpgnn/graph.hpp"

namespace vpgnn {

// Encoder and readout weights.
//   w1 (f x d), w2 (d x d)  - two-layer graph encoder
//   w_r (d x d)             - linear map inside the readout
// The pretext projection head is a parameter-free inner product, so the
// trainable state is exactly these three matrices.
struct ModelParams {
  Dense w1;
  Dense w2;
  Dense w_r;

  std::size_t feature_dim() const noexcept { return w1.rows; }
  std::size_t hidden_dim() const noexcept { return w1.cols; }
};

// Seeded Glorot-uniform initialization of all three matrices.
ModelParams init_params(std::size_t feature_dim, std::size_t hidden_dim,
                        RngStream& rng);

// Intermediates retained by gnn_forward for the matching backward pass.
struct EncoderCache {
  const ModelParams* params = nullptr;
  const OrderGraph* graph = nullptr;
  Dense sx;    // A_hat * X          (n x f)
  Dense pre1;  // A_hat * X * W1     (n x d), pre-activation
  Dense s2;    // A_hat * ReLU(pre1) (n x d)
};

// out = A_hat * m with A_hat = D^{-1/2} (A + I) D^{-1/2}; self-loops are
// injected here, never stored in the graph.
Dense normalized_adjacency_multiply(const OrderGraph& g, const Dense& m);

// Two-layer encoder H = A_hat * ReLU(A_hat * X * W1) * W2. The second layer
// is linear so node tokens can take negative coordinates. Row i of H is the
// node token t_i.
Dense gnn_forward(const ModelParams& params, const OrderGraph& g,
                  const Dense& x, EncoderCache* cache = nullptr);

struct EncoderGrads {
  Dense dw1;
  Dense dw2;
};

// Exact gradients of the forward map given dL/dH. The cache must come from
// the matching gnn_forward call; shape drift is rejected.
EncoderGrads gnn_backward(const EncoderCache& cache, const Dense& dh);

// Readout: elementwise sigmoid(mean-over-rows(rows) * W_r). Rows must be a
// non-empty matrix of width hidden_dim.
std::vector<double> readout(const Dense& w_r, const Dense& rows);

struct ReadoutCache {
  Dense mean;               // 1 x d
  std::vector<double> out;  // sigmoid outputs
  std::size_t n_rows = 0;
};
std::vector<double> readout(const Dense& w_r, const Dense& rows,
                            ReadoutCache* cache);

struct ReadoutGrads {
  Dense dw_r;
  // Gradient w.r.t. the row mean; every contributing row of the pooled
  // matrix receives dmean / n_rows.
  std::vector<double> dmean;
};
ReadoutGrads readout_backward(const Dense& w_r, const ReadoutCache& cache,
                              const std::vector<double>& dout);

// Pretext projection head: plain inner product.
double proj_head(const std::vector<double>& t, const std::vector<double>& z);

struct BceResult {
  double loss;
  double dlogit;
};

// Numerically stable binary cross-entropy on a logit:
// loss = softplus(logit) - target * logit, dlogit = sigmoid(logit) - target.
BceResult bce_with_logits(double logit, int target);

// Adam with bias correction; moments match the parameter shape.
struct AdamState {
  Dense m;
  Dense v;
  std::size_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState make_adam_state(const Dense& param);
void adam_step(AdamState& state, Dense& param, const Dense& grad, double lr);

// Central finite differences (f(x+h e) - f(x-h e)) / (2h) per coordinate.
// Independent of every analytic backward pass in this module; kept in the
// library as the shared gradient oracle.
Dense finite_diff_grad(const std::function<double(const Dense&)>& f,
                       const Dense& x, double h);

}  // namespace vpgnn
