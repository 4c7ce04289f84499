#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vpgnn/dense.hpp"
#include "vpgnn/rng.hpp"

namespace vpgnn {

using NodeId = std::uint32_t;

// Value used in a per-node label array for nodes without a label.
inline constexpr std::int8_t kUnlabeled = -1;

// Undirected order graph: CSR adjacency, a node feature matrix, and an
// optional per-node label array. Immutable after construction and safe for
// concurrent reads.
//
// Invariants, enforced by build_graph and validate():
//   - adjacency is symmetric, deduplicated and free of self-loops
//   - neighbor slices are sorted ascending
//   - features has exactly n_nodes rows, all entries finite
//   - labels is empty (unlabeled graph) or has one entry per node in
//     {kUnlabeled, 0, 1}
class OrderGraph {
 public:
  OrderGraph() = default;

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_undirected_edges() const noexcept {
    return csr_neighbors_.size() / 2;
  }
  std::size_t feature_dim() const noexcept { return features_.cols; }

  // Sorted neighbor slice of node i. Throws if i is out of range.
  std::span<const NodeId> neighbors(NodeId i) const;

  std::size_t degree(NodeId i) const;

  const Dense& features() const noexcept { return features_; }
  const std::vector<NodeId>& csr_offsets_raw() const noexcept {
    return csr_offsets_;
  }
  const std::vector<NodeId>& csr_neighbors_raw() const noexcept {
    return csr_neighbors_;
  }

  bool has_labels() const noexcept { return !labels_.empty(); }
  const std::vector<std::int8_t>& labels() const noexcept { return labels_; }
  int label(NodeId i) const;

  // Graph with identical adjacency but a different feature matrix; the new
  // matrix must keep the row count.
  OrderGraph with_features(Dense features) const;

  OrderGraph with_labels(std::vector<std::int8_t> labels) const;

  // Re-checks every structural invariant; throws std::runtime_error with a
  // description of the first violation.
  void validate() const;

  friend OrderGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges,
                                Dense features, std::vector<std::int8_t> labels);

 private:
  std::size_t n_nodes_ = 0;
  std::vector<NodeId> csr_offsets_;    // length n_nodes_ + 1
  std::vector<NodeId> csr_neighbors_;  // sorted within each slice
  Dense features_;
  std::vector<std::int8_t> labels_;  // empty, or one of {-1, 0, 1} per node
};

// Builds a validated graph from an edge list. The input may contain
// duplicates, reversed pairs and self-loops; the result is symmetrized,
// deduplicated and self-loop-free. Node count is taken from the feature
// matrix row count.
OrderGraph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges,
                       Dense features, std::vector<std::int8_t> labels = {});

// min(eta, degree(i)) distinct neighbors of i, uniform without replacement.
std::vector<NodeId> sample_neighbors(const OrderGraph& g, NodeId i,
                                     std::size_t eta, RngStream& rng);

// Feature rows rearranged so row i of the result is row perm[i] of the
// input; adjacency and labels are untouched.
OrderGraph permute_feature_rows(const OrderGraph& g,
                                const std::vector<std::size_t>& perm);

// Corrupted counterpart used by the pretext task: same topology, feature
// rows shuffled by a uniformly random permutation. Requires >= 2 nodes.
OrderGraph corrupt(const OrderGraph& g, RngStream& rng);

}  // namespace vpgnn
