#include "vpgnn/graph_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vpgnn {
namespace {

std::runtime_error parse_error(const std::string& path, std::size_t line_no,
                               const std::string& what) {
  return std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  return out;
}

bool blank(const std::string& s) {
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return true;
}

// Full-precision decimal that round-trips a double exactly.
void append_double(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

std::vector<std::pair<NodeId, NodeId>> read_edge_file(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::istringstream ss(line);
    long long u = -1;
    long long v = -1;
    if (!(ss >> u >> v) || u < 0 || v < 0) {
      throw parse_error(path, line_no, "expected two non-negative node ids");
    }
    std::string rest;
    if (ss >> rest) {
      throw parse_error(path, line_no, "trailing tokens after edge pair");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return edges;
}

void write_edge_file(const std::string& path, const OrderGraph& g) {
  auto out = open_output(path);
  std::string buf;
  for (NodeId u = 0; u < g.n_nodes(); ++u) {
    for (NodeId v : g.neighbors(u)) {
      if (u < v) {  // each undirected edge once
        buf += std::to_string(u);
        buf += ' ';
        buf += std::to_string(v);
        buf += '\n';
      }
    }
  }
  out << buf;
}

Dense read_feature_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::size_t row_cols = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p <= end) {
      const char* cell_end = p;
      while (cell_end < end && *cell_end != ',') {
        ++cell_end;
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(p, cell_end, v);
      if (ec != std::errc() || ptr != cell_end) {
        throw parse_error(path, line_no, "bad numeric cell");
      }
      values.push_back(v);
      ++row_cols;
      if (cell_end == end) {
        break;
      }
      p = cell_end + 1;
    }
    if (cols == 0) {
      cols = row_cols;
    } else if (row_cols != cols) {
      throw parse_error(path, line_no, "ragged row: expected " +
                                           std::to_string(cols) + " columns, got " +
                                           std::to_string(row_cols));
    }
    ++rows;
  }
  Dense m(rows, cols);
  m.values = std::move(values);
  if (!m.all_finite()) {
    throw std::runtime_error(path + ": non-finite feature value");
  }
  return m;
}

void write_feature_csv(const std::string& path, const Dense& features) {
  auto out = open_output(path);
  std::string buf;
  buf.reserve(features.size() * 12);
  for (std::size_t i = 0; i < features.rows; ++i) {
    for (std::size_t j = 0; j < features.cols; ++j) {
      if (j > 0) {
        buf += ',';
      }
      append_double(buf, features(i, j));
    }
    buf += '\n';
  }
  out << buf;
}

std::vector<std::pair<NodeId, int>> read_label_csv(const std::string& path) {
  auto in = open_input(path);
  std::vector<std::pair<NodeId, int>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    if (line_no == 1 && line.rfind("node_id", 0) == 0) {
      continue;  // header
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw parse_error(path, line_no, "expected node_id,label");
    }
    long long id = -1;
    long long label = -1;
    try {
      id = std::stoll(line.substr(0, comma));
      label = std::stoll(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw parse_error(path, line_no, "bad node_id,label row");
    }
    if (id < 0 || (label != 0 && label != 1)) {
      throw parse_error(path, line_no, "label must be 0 or 1");
    }
    rows.emplace_back(static_cast<NodeId>(id), static_cast<int>(label));
  }
  return rows;
}

void write_label_csv(const std::string& path,
                     const std::vector<std::pair<NodeId, int>>& rows) {
  auto out = open_output(path);
  out << "node_id,label\n";
  for (const auto& [id, label] : rows) {
    out << id << ',' << label << '\n';
  }
}

OrderGraph load_graph(const std::string& edge_path,
                      const std::string& feature_path,
                      const std::string& label_path) {
  auto features = read_feature_csv(feature_path);
  auto edges = read_edge_file(edge_path);
  std::vector<std::int8_t> labels;
  if (!label_path.empty()) {
    labels.assign(features.rows, kUnlabeled);
    for (const auto& [id, label] : read_label_csv(label_path)) {
      if (id >= features.rows) {
        throw std::runtime_error(label_path + ": node id " +
                                 std::to_string(id) + " exceeds node count");
      }
      labels[id] = static_cast<std::int8_t>(label);
    }
  }
  auto g = build_graph(edges, std::move(features), std::move(labels));
  g.validate();
  return g;
}

}  // namespace vpgnn
