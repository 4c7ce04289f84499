#include "vpgnn/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vpgnn {
namespace {

void check_node(const OrderGraph& g, NodeId i, const char* who) {
  if (i >= g.n_nodes()) {
    throw std::out_of_range(std::string(who) + ": node id " +
                            std::to_string(i) + " out of range (n_nodes=" +
                            std::to_string(g.n_nodes()) + ")");
  }
}

}  // namespace

std::span<const NodeId> OrderGraph::neighbors(NodeId i) const {
  check_node(*this, i, "neighbors");
  const std::size_t begin = csr_offsets_[i];
  const std::size_t end = csr_offsets_[i + 1];
  return {csr_neighbors_.data() + begin, end - begin};
}

std::size_t OrderGraph::degree(NodeId i) const {
  check_node(*this, i, "degree");
  return csr_offsets_[i + 1] - csr_offsets_[i];
}

int OrderGraph::label(NodeId i) const {
  check_node(*this, i, "label");
  if (labels_.empty()) {
    return kUnlabeled;
  }
  return labels_[i];
}

OrderGraph OrderGraph::with_features(Dense features) const {
  if (features.rows != n_nodes_) {
    throw std::invalid_argument("with_features: row count " +
                                std::to_string(features.rows) +
                                " does not match n_nodes " +
                                std::to_string(n_nodes_));
  }
  if (!features.all_finite()) {
    throw std::invalid_argument("with_features: non-finite feature entry");
  }
  OrderGraph out = *this;
  out.features_ = std::move(features);
  return out;
}

OrderGraph OrderGraph::with_labels(std::vector<std::int8_t> labels) const {
  if (!labels.empty() && labels.size() != n_nodes_) {
    throw std::invalid_argument("with_labels: label count mismatch");
  }
  for (std::int8_t l : labels) {
    if (l != kUnlabeled && l != 0 && l != 1) {
      throw std::invalid_argument("with_labels: label outside {-1, 0, 1}");
    }
  }
  OrderGraph out = *this;
  out.labels_ = std::move(labels);
  return out;
}

void OrderGraph::validate() const {
  if (csr_offsets_.size() != n_nodes_ + 1 || csr_offsets_.front() != 0 ||
      csr_offsets_.back() != csr_neighbors_.size()) {
    throw std::runtime_error("graph validate: malformed CSR offsets");
  }
  if (features_.rows != n_nodes_) {
    throw std::runtime_error("graph validate: feature row count mismatch");
  }
  if (!features_.all_finite()) {
    throw std::runtime_error("graph validate: non-finite feature entry");
  }
  if (!labels_.empty() && labels_.size() != n_nodes_) {
    throw std::runtime_error("graph validate: label count mismatch");
  }
  for (std::size_t i = 0; i < n_nodes_; ++i) {
    if (csr_offsets_[i] > csr_offsets_[i + 1]) {
      throw std::runtime_error("graph validate: offsets not monotone");
    }
    for (std::size_t k = csr_offsets_[i]; k < csr_offsets_[i + 1]; ++k) {
      const NodeId j = csr_neighbors_[k];
      if (j >= n_nodes_) {
        throw std::runtime_error("graph validate: neighbor id out of range");
      }
      if (j == i) {
        throw std::runtime_error("graph validate: stored self-loop");
      }
      if (k > csr_offsets_[i] && csr_neighbors_[k - 1] >= j) {
        throw std::runtime_error(
            "graph validate: neighbor slice unsorted or duplicated");
      }
      // Symmetry: i must appear in j's slice.
      const auto row = csr_neighbors_.begin();
      if (!std::binary_search(row + csr_offsets_[j], row + csr_offsets_[j + 1],
                              static_cast<NodeId>(i))) {
        throw std::runtime_error("graph validate: asymmetric edge");
      }
    }
  }
}

OrderGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges,
                       Dense features, std::vector<std::int8_t> labels) {
  const std::size_t n = features.rows;
  if (!labels.empty() && labels.size() != n) {
    throw std::invalid_argument("build_graph: feature/label row-count mismatch");
  }
  if (!features.all_finite()) {
    throw std::invalid_argument("build_graph: non-finite feature entry");
  }
  std::vector<std::vector<NodeId>> adj(n);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw std::invalid_argument("build_graph: endpoint out of range (" +
                                  std::to_string(u) + ", " + std::to_string(v) +
                                  ") with " + std::to_string(n) + " nodes");
    }
    if (u == v) {
      continue;  // self-loops only exist inside encoder propagation
    }
    adj[u].push_back(v);
    adj[v].push_back(u);
  }

  OrderGraph g;
  g.n_nodes_ = n;
  g.csr_offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& nb = adj[i];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    g.csr_offsets_[i + 1] = g.csr_offsets_[i] + static_cast<NodeId>(nb.size());
  }
  g.csr_neighbors_.reserve(g.csr_offsets_[n]);
  for (std::size_t i = 0; i < n; ++i) {
    g.csr_neighbors_.insert(g.csr_neighbors_.end(), adj[i].begin(),
                            adj[i].end());
  }
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  return g;
}

std::vector<NodeId> sample_neighbors(const OrderGraph& g, NodeId i,
                                     std::size_t eta, RngStream& rng) {
  const auto nb = g.neighbors(i);  // also range-checks i
  if (eta == 0 || nb.empty()) {
    return {};
  }
  const auto picks = rng.sample_without_replacement(nb.size(), eta);
  std::vector<NodeId> out;
  out.reserve(picks.size());
  for (std::size_t p : picks) {
    out.push_back(nb[p]);
  }
  return out;
}

OrderGraph permute_feature_rows(const OrderGraph& g,
                                const std::vector<std::size_t>& perm) {
  const std::size_t n = g.n_nodes();
  if (perm.size() != n) {
    throw std::invalid_argument("permute_feature_rows: permutation size mismatch");
  }
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) {
      throw std::invalid_argument("permute_feature_rows: not a permutation");
    }
    seen[p] = true;
  }
  const Dense& x = g.features();
  Dense shuffled(x.rows, x.cols);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(x.row_ptr(perm[i]), x.row_ptr(perm[i]) + x.cols,
              shuffled.row_ptr(i));
  }
  return g.with_features(std::move(shuffled));
}

OrderGraph corrupt(const OrderGraph& g, RngStream& rng) {
  if (g.n_nodes() < 2) {
    throw std::invalid_argument("corrupt: needs at least 2 nodes");
  }
  return permute_feature_rows(g, rng.permutation(g.n_nodes()));
}

}  // namespace vpgnn
