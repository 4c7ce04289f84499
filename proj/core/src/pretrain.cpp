#include "vpgnn/pretrain.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vpgnn {
namespace {

constexpr char kMagic[4] = {'V', 'P', 'G', 'M'};
constexpr std::uint32_t kVersion = 1;

void store_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
}

void store_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    buf += static_cast<char>((v >> (8 * i)) & 0xFF);
  }
}

void store_f64(std::string& buf, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  store_u64(buf, bits);
}

class Reader {
 public:
  Reader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++]))
           << (8 * i);
    }
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++]))
           << (8 * i);
    }
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  Dense dense(std::size_t rows, std::size_t cols) {
    Dense m(rows, cols);
    for (double& v : m.values) {
      v = f64();
    }
    return m;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw std::runtime_error(path_ + ": truncated model file");
    }
  }

  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

void accumulate_pair_grads(const std::vector<double>& token, double dlogit,
                           const std::vector<double>& summary, double* dtoken,
                           std::vector<double>& dsummary) {
  for (std::size_t k = 0; k < token.size(); ++k) {
    dtoken[k] += dlogit * summary[k];
    dsummary[k] += dlogit * token[k];
  }
}

}  // namespace

DgiResult dgi_loss(const ModelParams& params, const OrderGraph& g,
                   RngStream& rng) {
  const std::size_t n = g.n_nodes();
  if (n < 2 || g.n_undirected_edges() == 0) {
    throw std::invalid_argument(
        "dgi_loss: degenerate graph (needs >= 2 nodes and >= 1 edge)");
  }
  const std::size_t d = params.hidden_dim();

  EncoderCache cache_real;
  Dense h = gnn_forward(params, g, g.features(), &cache_real);
  ReadoutCache cache_readout;
  const std::vector<double> h_g = readout(params.w_r, h, &cache_readout);

  OrderGraph corrupted = corrupt(g, rng);
  EncoderCache cache_corrupt;
  Dense h_tilde = gnn_forward(params, corrupted, corrupted.features(), &cache_corrupt);

  const double inv = 1.0 / static_cast<double>(2 * n);
  double loss = 0.0;
  double sum_pos = 0.0;
  double sum_neg = 0.0;
  Dense dh(n, d);
  Dense dh_tilde(n, d);
  std::vector<double> dh_g(d, 0.0);
  std::vector<double> token(d);
  for (std::size_t i = 0; i < n; ++i) {
    token.assign(h.row_ptr(i), h.row_ptr(i) + d);
    const double pos_logit = proj_head(token, h_g);
    sum_pos += pos_logit;
    const auto pos = bce_with_logits(pos_logit, 1);
    loss += pos.loss;
    accumulate_pair_grads(token, pos.dlogit * inv, h_g, dh.row_ptr(i), dh_g);

    token.assign(h_tilde.row_ptr(i), h_tilde.row_ptr(i) + d);
    const double neg_logit = proj_head(token, h_g);
    sum_neg += neg_logit;
    const auto neg = bce_with_logits(neg_logit, 0);
    loss += neg.loss;
    accumulate_pair_grads(token, neg.dlogit * inv, h_g, dh_tilde.row_ptr(i), dh_g);
  }
  loss *= inv;

  // Summary path: h_G feeds every pair, so its gradient flows back through
  // the readout into W_r and into every row of the real branch.
  const ReadoutGrads readout_grads =
      readout_backward(params.w_r, cache_readout, dh_g);
  const double row_share = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = dh.row_ptr(i);
    for (std::size_t k = 0; k < d; ++k) {
      row[k] += readout_grads.dmean[k] * row_share;
    }
  }

  const EncoderGrads real = gnn_backward(cache_real, dh);
  const EncoderGrads fake = gnn_backward(cache_corrupt, dh_tilde);

  DgiResult res;
  res.loss = loss;
  res.grads.dw1 = real.dw1;
  add_scaled(res.grads.dw1, fake.dw1);
  res.grads.dw2 = real.dw2;
  add_scaled(res.grads.dw2, fake.dw2);
  res.grads.dw_r = readout_grads.dw_r;
  res.mean_positive_logit = sum_pos / static_cast<double>(n);
  res.mean_negative_logit = sum_neg / static_cast<double>(n);
  return res;
}

PretrainedModel pretrain(const OrderGraph& g, const PretrainConfig& cfg,
                         TrainingCurve* curve) {
  if (cfg.epochs < 1) {
    throw std::invalid_argument("pretrain: epochs must be >= 1");
  }
  if (cfg.lr <= 0.0) {
    throw std::invalid_argument("pretrain: lr must be positive");
  }
  if (cfg.hidden_dim < 1) {
    throw std::invalid_argument("pretrain: hidden_dim must be >= 1");
  }

  RngStream root(cfg.seed);
  RngStream init_rng = root.derive(1);
  RngStream corrupt_rng = root.derive(2);

  PretrainedModel model;
  model.params = init_params(g.feature_dim(), cfg.hidden_dim, init_rng);
  model.seed = cfg.seed;
  model.graph_fingerprint = graph_fingerprint(g);

  AdamState adam_w1 = make_adam_state(model.params.w1);
  AdamState adam_w2 = make_adam_state(model.params.w2);
  AdamState adam_wr = make_adam_state(model.params.w_r);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const DgiResult res = dgi_loss(model.params, g, corrupt_rng);
    if (!std::isfinite(res.loss)) {
      throw std::runtime_error("pretrain: non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    if (curve != nullptr) {
      curve->epoch_loss.push_back(res.loss);
    }
    adam_step(adam_w1, model.params.w1, res.grads.dw1, cfg.lr);
    adam_step(adam_w2, model.params.w2, res.grads.dw2, cfg.lr);
    adam_step(adam_wr, model.params.w_r, res.grads.dw_r, cfg.lr);
  }

  const DgiResult final_eval = dgi_loss(model.params, g, corrupt_rng);
  model.final_loss = final_eval.loss;
  model.epochs_run = static_cast<std::uint32_t>(cfg.epochs);
  return model;
}

std::uint64_t graph_fingerprint(const OrderGraph& g) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_u64 = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ULL;
    }
  };
  mix_u64(g.n_nodes());
  for (NodeId off : g.csr_offsets_raw()) {
    mix_u64(off);
  }
  for (NodeId nb : g.csr_neighbors_raw()) {
    mix_u64(nb);
  }
  mix_u64(g.features().cols);
  for (double v : g.features().values) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof(bits));
    mix_u64(bits);
  }
  for (std::int8_t l : g.labels()) {
    mix_u64(static_cast<std::uint64_t>(static_cast<std::uint8_t>(l)));
  }
  return h;
}

void save_model(const PretrainedModel& m, const std::string& path) {
  const std::size_t f = m.params.feature_dim();
  const std::size_t d = m.params.hidden_dim();
  std::string buf;
  buf.reserve(48 + 8 * (f * d + 2 * d * d));
  buf.append(kMagic, 4);
  store_u32(buf, kVersion);
  store_u32(buf, static_cast<std::uint32_t>(f));
  store_u32(buf, static_cast<std::uint32_t>(d));
  store_u64(buf, m.seed);
  store_u32(buf, m.epochs_run);
  store_f64(buf, m.final_loss);
  store_u64(buf, m.graph_fingerprint);
  for (const Dense* w : {&m.params.w1, &m.params.w2, &m.params.w_r}) {
    for (double v : w->values) {
      store_f64(buf, v);
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

PretrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  Reader r(data, path);
  if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw std::runtime_error(path + ": not a model file");
  }
  r.u32();  // magic, already checked
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw std::runtime_error(path + ": unsupported model version " +
                             std::to_string(version));
  }
  const std::size_t f = r.u32();
  const std::size_t d = r.u32();
  if (f == 0 || d == 0) {
    throw std::runtime_error(path + ": invalid shape header");
  }
  PretrainedModel m;
  m.seed = r.u64();
  m.epochs_run = r.u32();
  m.final_loss = r.f64();
  m.graph_fingerprint = r.u64();
  m.params.w1 = r.dense(f, d);
  m.params.w2 = r.dense(d, d);
  m.params.w_r = r.dense(d, d);
  if (r.remaining() != 0) {
    throw std::runtime_error(path + ": trailing bytes after model payload");
  }
  return m;
}

}  // namespace vpgnn
