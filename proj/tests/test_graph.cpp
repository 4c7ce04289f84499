#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "vpgnn/graph.hpp"
#include "vpgnn/graph_io.hpp"

using vpgnn::Dense;
using vpgnn::NodeId;
using vpgnn::OrderGraph;
using vpgnn::RngStream;

namespace {

Dense features_of(std::size_t n, std::size_t f = 1) {
  Dense x(n, f);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    x.values[i] = static_cast<double>(i + 1);
  }
  return x;
}

std::vector<NodeId> to_vector(std::span<const NodeId> s) {
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("build_graph symmetrizes a single edge") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(2));
  CHECK(to_vector(g.neighbors(0)) == std::vector<NodeId>{1});
  CHECK(to_vector(g.neighbors(1)) == std::vector<NodeId>{0});
}

TEST_CASE("build_graph deduplicates repeated and reversed pairs") {
  const auto g = vpgnn::build_graph({{0, 1}, {1, 0}, {0, 1}}, features_of(2));
  CHECK(g.degree(0) == 1);
  CHECK(g.n_undirected_edges() == 1);
}

TEST_CASE("build_graph rejects out-of-range endpoints") {
  CHECK_THROWS_WITH_AS(vpgnn::build_graph({{0, 5}}, features_of(3)),
                       doctest::Contains("endpoint out of range"),
                       std::invalid_argument);
}

TEST_CASE("build_graph rejects label count mismatch") {
  CHECK_THROWS_AS(vpgnn::build_graph({{0, 1}}, features_of(2), {0, 1, 1}),
                  std::invalid_argument);
}

TEST_CASE("build_graph drops self-loops") {
  const auto g = vpgnn::build_graph({{0, 0}, {0, 1}}, features_of(2));
  CHECK(g.degree(0) == 1);
  g.validate();
}

TEST_CASE("neighbors on a path graph") {
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}}, features_of(3));
  CHECK(to_vector(g.neighbors(1)) == std::vector<NodeId>{0, 2});
  CHECK(g.degree(1) == 2);
}

TEST_CASE("isolated node has no neighbors") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(3));
  CHECK(g.neighbors(2).empty());
  CHECK(g.degree(2) == 0);
}

TEST_CASE("node id at n_nodes is rejected") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(2));
  CHECK_THROWS_AS(g.neighbors(2), std::out_of_range);
  CHECK_THROWS_AS(g.degree(2), std::out_of_range);
}

TEST_CASE("star center degree equals the leaf count") {
  // Oracle: count incidences in the raw edge list.
  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::size_t leaves = 7;
  for (NodeId leaf = 1; leaf <= leaves; ++leaf) {
    edges.push_back({0, leaf});
  }
  std::size_t incident = 0;
  for (const auto& [u, v] : edges) {
    incident += (u == 0 || v == 0) ? 1 : 0;
  }
  const auto g = vpgnn::build_graph(edges, features_of(leaves + 1));
  CHECK(g.degree(0) == incident);
}

TEST_CASE("sample_neighbors with eta 0 is empty") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(2));
  RngStream rng(0);
  CHECK(vpgnn::sample_neighbors(g, 0, 0, rng).empty());
}

TEST_CASE("sample_neighbors clamps to the degree") {
  const auto g =
      vpgnn::build_graph({{0, 1}, {0, 2}, {0, 3}}, features_of(4));
  RngStream rng(0);
  auto sample = vpgnn::sample_neighbors(g, 0, 5, rng);
  std::sort(sample.begin(), sample.end());
  CHECK(sample == std::vector<NodeId>{1, 2, 3});
}

TEST_CASE("sample_neighbors draws distinct members deterministically") {
  const auto g = vpgnn::build_graph(
      {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}}, features_of(6));
  RngStream rng_a(1234);
  RngStream rng_b(1234);
  const auto first = vpgnn::sample_neighbors(g, 0, 2, rng_a);
  const auto second = vpgnn::sample_neighbors(g, 0, 2, rng_b);
  CHECK(first == second);
  CHECK(first.size() == 2);
  CHECK(first[0] != first[1]);
  const auto nb = to_vector(g.neighbors(0));
  for (NodeId pick : first) {
    CHECK(std::find(nb.begin(), nb.end(), pick) != nb.end());
  }
}

TEST_CASE("sample_neighbors subset property over many seeds") {
  const auto g = vpgnn::build_graph(
      {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {0, 6}}, features_of(7));
  const auto nb = to_vector(g.neighbors(0));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RngStream rng(seed);
    const auto sample = vpgnn::sample_neighbors(g, 0, 3, rng);
    CHECK(sample.size() == std::min<std::size_t>(3, g.degree(0)));
    std::set<NodeId> distinct(sample.begin(), sample.end());
    CHECK(distinct.size() == sample.size());
    for (NodeId pick : sample) {
      CHECK(std::find(nb.begin(), nb.end(), pick) != nb.end());
    }
  }
}

TEST_CASE("permute_feature_rows applies the stated semantics") {
  Dense x(3, 1);
  x.values = {1.0, 2.0, 3.0};
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}}, x);
  const auto shuffled = vpgnn::permute_feature_rows(g, {2, 0, 1});
  CHECK(shuffled.features().values == std::vector<double>{3.0, 1.0, 2.0});
  CHECK(shuffled.csr_neighbors_raw() == g.csr_neighbors_raw());
}

TEST_CASE("identity permutation keeps features") {
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}}, features_of(3));
  const auto same = vpgnn::permute_feature_rows(g, {0, 1, 2});
  CHECK(same.features().values == g.features().values);
}

TEST_CASE("permute_feature_rows rejects non-permutations") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(2));
  CHECK_THROWS_AS(vpgnn::permute_feature_rows(g, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(vpgnn::permute_feature_rows(g, {0}), std::invalid_argument);
}

TEST_CASE("corrupt preserves adjacency and the feature-row multiset") {
  // Sort-and-compare oracle over many seeds.
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}},
                                    features_of(4, 3));
  auto sorted_rows = [](const Dense& m) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < m.rows; ++i) {
      rows.emplace_back(m.row_ptr(i), m.row_ptr(i) + m.cols);
    }
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto original_rows = sorted_rows(g.features());
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    RngStream rng(seed);
    const auto twisted = vpgnn::corrupt(g, rng);
    CHECK(twisted.csr_offsets_raw() == g.csr_offsets_raw());
    CHECK(twisted.csr_neighbors_raw() == g.csr_neighbors_raw());
    CHECK(sorted_rows(twisted.features()) == original_rows);
    for (NodeId i = 0; i < g.n_nodes(); ++i) {
      CHECK(twisted.degree(i) == g.degree(i));
    }
  }
  // The source graph is untouched.
  CHECK(g.features().values == features_of(4, 3).values);
}

TEST_CASE("corrupt requires at least two nodes") {
  const auto g = vpgnn::build_graph({}, features_of(1));
  RngStream rng(0);
  CHECK_THROWS_AS(vpgnn::corrupt(g, rng), std::invalid_argument);
}

TEST_CASE("degree sum equals twice the undirected edge count") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream rng(seed);
    const std::size_t n = 20;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int e = 0; e < 40; ++e) {
      edges.emplace_back(static_cast<NodeId>(rng.next_below(n)),
                         static_cast<NodeId>(rng.next_below(n)));
    }
    const auto g = vpgnn::build_graph(edges, Dense(n, 2, 0.5));
    g.validate();
    std::size_t degree_sum = 0;
    for (NodeId i = 0; i < n; ++i) {
      degree_sum += g.degree(i);
    }
    CHECK(degree_sum == 2 * g.n_undirected_edges());
  }
}

TEST_CASE("with_features validates the row count") {
  const auto g = vpgnn::build_graph({{0, 1}}, features_of(2));
  CHECK_THROWS_AS(g.with_features(Dense(3, 1)), std::invalid_argument);
}

TEST_CASE("graph files round-trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "vpgnn_graph_io_test";
  fs::create_directories(dir);
  Dense x(4, 2);
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    x.values[i] = 0.125 * static_cast<double>(i) - 1.5;
  }
  const auto g =
      vpgnn::build_graph({{0, 1}, {1, 2}, {2, 3}}, x, {1, 0, 0, 1});
  const auto edges = (dir / "edges.txt").string();
  const auto feats = (dir / "features.csv").string();
  const auto labels = (dir / "labels.csv").string();
  vpgnn::write_edge_file(edges, g);
  vpgnn::write_feature_csv(feats, g.features());
  vpgnn::write_label_csv(labels, {{0, 1}, {3, 1}, {1, 0}, {2, 0}});

  const auto loaded = vpgnn::load_graph(edges, feats, labels);
  CHECK(loaded.n_nodes() == 4);
  CHECK(loaded.csr_neighbors_raw() == g.csr_neighbors_raw());
  CHECK(loaded.features().values == g.features().values);
  CHECK(loaded.label(0) == 1);
  CHECK(loaded.label(1) == 0);
  fs::remove_all(dir);
}

TEST_CASE("label file covering a subset leaves the rest unlabeled") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "vpgnn_graph_io_subset";
  fs::create_directories(dir);
  const auto g = vpgnn::build_graph({{0, 1}, {1, 2}}, features_of(3));
  vpgnn::write_edge_file((dir / "e.txt").string(), g);
  vpgnn::write_feature_csv((dir / "f.csv").string(), g.features());
  vpgnn::write_label_csv((dir / "l.csv").string(), {{1, 1}});
  const auto loaded = vpgnn::load_graph((dir / "e.txt").string(),
                                        (dir / "f.csv").string(),
                                        (dir / "l.csv").string());
  CHECK(loaded.label(0) == vpgnn::kUnlabeled);
  CHECK(loaded.label(1) == 1);
  CHECK(loaded.label(2) == vpgnn::kUnlabeled);
  fs::remove_all(dir);
}

TEST_CASE("loader rejects malformed files") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "vpgnn_graph_io_bad";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.txt");
    out << "0 1\n1 oops\n";
  }
  {
    std::ofstream out(dir / "features.csv");
    out << "1.0,2.0\n3.0,4.0\n";
  }
  CHECK_THROWS_AS(vpgnn::load_graph((dir / "edges.txt").string(),
                                    (dir / "features.csv").string()),
                  std::runtime_error);
  {
    std::ofstream out(dir / "edges.txt");
    out << "0 1\n";
  }
  {
    std::ofstream out(dir / "features.csv");
    out << "1.0,2.0\n3.0\n";
  }
  CHECK_THROWS_AS(vpgnn::load_graph((dir / "edges.txt").string(),
                                    (dir / "features.csv").string()),
                  std::runtime_error);
  {
    std::ofstream out(dir / "features.csv");
    out << "1.0,2.0\n3.0,4.0\n";
  }
  {
    std::ofstream out(dir / "labels.csv");
    out << "node_id,label\n0,7\n";
  }
  CHECK_THROWS_AS(vpgnn::load_graph((dir / "edges.txt").string(),
                                    (dir / "features.csv").string(),
                                    (dir / "labels.csv").string()),
                  std::runtime_error);
  fs::remove_all(dir);
}
