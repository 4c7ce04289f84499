#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vpgnn/graph.hpp"

namespace vpgnn {

// Graph-on-disk format, three files:
//   edge file    - text, one "u v" pair per line, 0-based decimal ids
//   feature file - CSV, one node per row, fixed column count
//   label file   - CSV "node_id,label", label in {0,1}; may cover a subset
//                  of nodes; an optional "node_id,label" header is skipped
// All loaders throw std::runtime_error with file and line context.

std::vector<std::pair<NodeId, NodeId>> read_edge_file(const std::string& path);
void write_edge_file(const std::string& path, const OrderGraph& g);

Dense read_feature_csv(const std::string& path);
void write_feature_csv(const std::string& path, const Dense& features);

std::vector<std::pair<NodeId, int>> read_label_csv(const std::string& path);
void write_label_csv(const std::string& path,
                     const std::vector<std::pair<NodeId, int>>& rows);

// Assembles and validates an OrderGraph from the three files. The label
// path may be empty (unlabeled graph); nodes missing from the label file
// are marked kUnlabeled.
OrderGraph load_graph(const std::string& edge_path,
                      const std::string& feature_path,
                      const std::string& label_path = "");

}  // namespace vpgnn
