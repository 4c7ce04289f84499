#include "vpgnn/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace vpgnn {

ModelParams init_params(std::size_t feature_dim, std::size_t hidden_dim,
                        RngStream& rng) {
  if (feature_dim == 0 || hidden_dim == 0) {
    throw std::invalid_argument("init_params: zero dimension");
  }
  ModelParams p;
  p.w1 = glorot_uniform(feature_dim, hidden_dim, rng);
  p.w2 = glorot_uniform(hidden_dim, hidden_dim, rng);
  p.w_r = glorot_uniform(hidden_dim, hidden_dim, rng);
  return p;
}

Dense normalized_adjacency_multiply(const OrderGraph& g, const Dense& m) {
  if (m.rows != g.n_nodes()) {
    throw std::invalid_argument(
        "normalized_adjacency_multiply: row count does not match node count");
  }
  const std::size_t n = g.n_nodes();
  const std::size_t c = m.cols;
  std::vector<double> inv_sqrt(n);
  for (NodeId i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  }
  Dense out(n, c);
  for (NodeId i = 0; i < n; ++i) {
    double* oi = out.row_ptr(i);
    const double self = inv_sqrt[i] * inv_sqrt[i];
    const double* mi = m.row_ptr(i);
    for (std::size_t k = 0; k < c; ++k) {
      oi[k] = self * mi[k];
    }
    for (NodeId j : g.neighbors(i)) {
      const double w = inv_sqrt[i] * inv_sqrt[j];
      const double* mj = m.row_ptr(j);
      for (std::size_t k = 0; k < c; ++k) {
        oi[k] += w * mj[k];
      }
    }
  }
  return out;
}

Dense gnn_forward(const ModelParams& params, const OrderGraph& g,
                  const Dense& x, EncoderCache* cache) {
  if (x.rows != g.n_nodes()) {
    throw std::invalid_argument("gnn_forward: feature row count mismatch");
  }
  if (x.cols != params.w1.rows) {
    throw std::invalid_argument("gnn_forward: feature width " +
                                std::to_string(x.cols) +
                                " does not match W1 rows " +
                                std::to_string(params.w1.rows));
  }
  Dense sx = normalized_adjacency_multiply(g, x);
  Dense pre1 = matmul(sx, params.w1);
  Dense a1 = pre1;
  for (double& v : a1.values) {
    v = v > 0.0 ? v : 0.0;
  }
  Dense s2 = normalized_adjacency_multiply(g, a1);
  Dense h = matmul(s2, params.w2);
  if (cache != nullptr) {
    cache->params = &params;
    cache->graph = &g;
    cache->sx = std::move(sx);
    cache->pre1 = std::move(pre1);
    cache->s2 = std::move(s2);
  }
  return h;
}

EncoderGrads gnn_backward(const EncoderCache& cache, const Dense& dh) {
  if (cache.params == nullptr || cache.graph == nullptr) {
    throw std::invalid_argument("gnn_backward: empty cache");
  }
  const ModelParams& p = *cache.params;
  if (dh.rows != cache.s2.rows || dh.cols != p.w2.cols) {
    throw std::invalid_argument("gnn_backward: dH shape does not match cache");
  }
  EncoderGrads grads;
  // H = S2 * W2
  grads.dw2 = matmul_at_b(cache.s2, dh);
  Dense ds2 = matmul_a_bt(dh, p.w2);
  // S2 = A_hat * A1, A_hat symmetric
  Dense da1 = normalized_adjacency_multiply(*cache.graph, ds2);
  // A1 = ReLU(pre1)
  for (std::size_t i = 0; i < da1.values.size(); ++i) {
    if (cache.pre1.values[i] <= 0.0) {
      da1.values[i] = 0.0;
    }
  }
  // pre1 = SX * W1
  grads.dw1 = matmul_at_b(cache.sx, da1);
  return grads;
}

std::vector<double> readout(const Dense& w_r, const Dense& rows) {
  return readout(w_r, rows, nullptr);
}

std::vector<double> readout(const Dense& w_r, const Dense& rows,
                            ReadoutCache* cache) {
  if (rows.rows == 0) {
    throw std::invalid_argument("readout: empty row set");
  }
  if (rows.cols != w_r.rows) {
    throw std::invalid_argument("readout: row width does not match W_r");
  }
  Dense mean(1, rows.cols);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    const double* ri = rows.row_ptr(i);
    for (std::size_t j = 0; j < rows.cols; ++j) {
      mean.values[j] += ri[j];
    }
  }
  scale_inplace(mean, 1.0 / static_cast<double>(rows.rows));
  Dense u = matmul(mean, w_r);
  std::vector<double> out(u.cols);
  for (std::size_t j = 0; j < u.cols; ++j) {
    out[j] = sigmoid(u.values[j]);
  }
  if (cache != nullptr) {
    cache->mean = std::move(mean);
    cache->out = out;
    cache->n_rows = rows.rows;
  }
  return out;
}

ReadoutGrads readout_backward(const Dense& w_r, const ReadoutCache& cache,
                              const std::vector<double>& dout) {
  if (dout.size() != cache.out.size()) {
    throw std::invalid_argument("readout_backward: dout size mismatch");
  }
  const std::size_t d = cache.mean.cols;
  // du = dout * sigma'(u), with sigma' expressed through the cached output
  Dense du(1, dout.size());
  for (std::size_t j = 0; j < dout.size(); ++j) {
    du.values[j] = dout[j] * cache.out[j] * (1.0 - cache.out[j]);
  }
  ReadoutGrads grads;
  grads.dw_r = matmul_at_b(cache.mean, du);
  Dense dmean = matmul_a_bt(du, w_r);
  grads.dmean.assign(dmean.values.begin(), dmean.values.end());
  if (grads.dmean.size() != d) {
    throw std::invalid_argument("readout_backward: stale cache");
  }
  return grads;
}

double proj_head(const std::vector<double>& t, const std::vector<double>& z) {
  if (t.size() != z.size()) {
    throw std::invalid_argument("proj_head: token length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    acc += t[i] * z[i];
  }
  return acc;
}

BceResult bce_with_logits(double logit, int target) {
  if (!std::isfinite(logit)) {
    throw std::invalid_argument("bce_with_logits: non-finite logit");
  }
  if (target != 0 && target != 1) {
    throw std::invalid_argument("bce_with_logits: target must be 0 or 1");
  }
  // softplus(x) = max(x, 0) + log1p(exp(-|x|))
  const double softplus =
      std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return {softplus - static_cast<double>(target) * logit,
          sigmoid(logit) - static_cast<double>(target)};
}

AdamState make_adam_state(const Dense& param) {
  AdamState st;
  st.m = Dense(param.rows, param.cols);
  st.v = Dense(param.rows, param.cols);
  return st;
}

void adam_step(AdamState& state, Dense& param, const Dense& grad, double lr) {
  if (!param.same_shape(grad) || !param.same_shape(state.m)) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  if (lr <= 0.0) {
    throw std::invalid_argument("adam_step: learning rate must be positive");
  }
  state.step += 1;
  const double b1t = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double b2t = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < param.values.size(); ++i) {
    const double gi = grad.values[i];
    state.m.values[i] = state.beta1 * state.m.values[i] + (1.0 - state.beta1) * gi;
    state.v.values[i] = state.beta2 * state.v.values[i] + (1.0 - state.beta2) * gi * gi;
    const double m_hat = state.m.values[i] / b1t;
    const double v_hat = state.v.values[i] / b2t;
    param.values[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

Dense finite_diff_grad(const std::function<double(const Dense&)>& f,
                       const Dense& x, double h) {
  if (h <= 0.0) {
    throw std::invalid_argument("finite_diff_grad: h must be positive");
  }
  Dense grad(x.rows, x.cols);
  Dense probe = x;
  for (std::size_t i = 0; i < probe.values.size(); ++i) {
    const double orig = probe.values[i];
    probe.values[i] = orig + h;
    const double up = f(probe);
    probe.values[i] = orig - h;
    const double down = f(probe);
    probe.values[i] = orig;
    grad.values[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace vpgnn
