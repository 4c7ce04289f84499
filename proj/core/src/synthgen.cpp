#include "vpgnn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace vpgnn {
namespace {

constexpr char kNameAlphabet[] = "abcdefghijklmnopqrstuvwxyz";
constexpr std::size_t kNameAlphabetSize = sizeof(kNameAlphabet) - 1;
constexpr std::size_t kUsernameStemLen = 10;

// Class-separated centers for the raw tabular vectors; fixed across worlds
// so that models pre-trained on one world transfer to another.
constexpr double kAbusiveCenterScale = 0.75;

double raw_center(Role role, std::size_t coord) {
  if (role == Role::kLegit) {
    return 0.0;
  }
  return coord % 2 == 0 ? kAbusiveCenterScale : -kAbusiveCenterScale;
}

std::uint64_t fnv1a64(const char* data, std::size_t len,
                      std::uint64_t h = 1469598103934665603ULL) {
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t draw_range(const CountRange& r, RngStream& rng) {
  return r.min + rng.next_below(r.max - r.min + 1);
}

std::string random_name(RngStream& rng, std::size_t len) {
  std::string s;
  s.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    s += kNameAlphabet[rng.next_below(kNameAlphabetSize)];
  }
  return s;
}

// Role-conditioned action preference: legitimate journeys favor the early
// vocabulary entries (browse and buy), abusive ones the late entries
// (voucher collection shortcuts). Works for any non-empty vocabulary.
std::vector<std::string> draw_click_path(const GenConfig& cfg, Role role,
                                         RngStream& rng) {
  const std::size_t v = cfg.clickpath_vocab.size();
  std::vector<double> cumulative(v);
  double total = 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    const double w = role == Role::kLegit ? static_cast<double>(v - i)
                                          : static_cast<double>(i + 1);
    total += w;
    cumulative[i] = total;
  }
  const std::size_t len = draw_range(cfg.clickpath_len, rng);
  std::vector<std::string> path;
  path.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    const double r = rng.next_real() * total;
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t idx =
        std::min(static_cast<std::size_t>(it - cumulative.begin()), v - 1);
    path.push_back(cfg.clickpath_vocab[idx]);
  }
  return path;
}

std::vector<double> draw_raw_features(const GenConfig& cfg, Role role,
                                      RngStream& rng) {
  std::vector<double> x(cfg.raw_feature_dim);
  for (std::size_t j = 0; j < cfg.raw_feature_dim; ++j) {
    x[j] = raw_center(role, j) + cfg.feature_noise_scale * rng.next_normal();
  }
  return x;
}

// Levenshtein distance if it is <= limit, else limit + 1. Banded DP.
std::size_t levenshtein_within(const std::string& a, const std::string& b,
                               std::size_t limit) {
  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  const std::size_t diff = la > lb ? la - lb : lb - la;
  if (diff > limit) {
    return limit + 1;
  }
  std::vector<std::size_t> prev(lb + 1);
  std::vector<std::size_t> cur(lb + 1);
  for (std::size_t j = 0; j <= lb; ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= la; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= lb; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) {
      return limit + 1;
    }
    std::swap(prev, cur);
  }
  return std::min(prev[lb], limit + 1);
}

}  // namespace

void validate_config(const GenConfig& cfg) {
  auto check_range = [](const CountRange& r, const char* name) {
    if (r.max < r.min) {
      throw std::invalid_argument(std::string("GenConfig: ") + name +
                                  " has max < min");
    }
  };
  check_range(cfg.abuser_devices, "abuser_devices");
  check_range(cfg.accounts_per_device, "accounts_per_device");
  check_range(cfg.legit_devices, "legit_devices");
  check_range(cfg.clickpath_len, "clickpath_len");
  if (cfg.n_legit_users + cfg.n_abusers == 0) {
    throw std::invalid_argument("GenConfig: empty world");
  }
  if (cfg.legit_devices.min < 1 || cfg.legit_devices.max > 2) {
    throw std::invalid_argument("GenConfig: legit_devices must lie within {1,2}");
  }
  if (cfg.abuser_devices.min < 1 || cfg.accounts_per_device.min < 1) {
    throw std::invalid_argument("GenConfig: abuser ranges must start at 1");
  }
  if (cfg.address_pool_size < 1) {
    throw std::invalid_argument("GenConfig: address_pool_size must be >= 1");
  }
  if (cfg.clickpath_vocab.empty()) {
    throw std::invalid_argument("GenConfig: empty click-path vocabulary");
  }
  if (cfg.embed_dim < 1 || cfg.raw_feature_dim < 1) {
    throw std::invalid_argument("GenConfig: feature dimensions must be >= 1");
  }
  if (cfg.feature_noise_scale < 0.0) {
    throw std::invalid_argument("GenConfig: negative feature_noise_scale");
  }
}

EntityWorld generate_world(const GenConfig& cfg) {
  validate_config(cfg);
  RngStream root(cfg.seed);
  RngStream structure = root.derive(1);
  RngStream names = root.derive(2);
  RngStream clicks = root.derive(3);
  RngStream feats = root.derive(4);

  EntityWorld world;
  world.n_addresses = cfg.address_pool_size;

  auto add_order = [&](std::size_t account_id, Role role) {
    Order o;
    o.account_id = account_id;
    o.used_voucher = true;
    o.click_path = draw_click_path(cfg, role, clicks);
    o.raw_features = draw_raw_features(cfg, role, feats);
    o.true_role = role;
    world.orders.push_back(std::move(o));
  };

  for (std::size_t u = 0; u < cfg.n_legit_users; ++u) {
    Account acc;
    acc.user_id = u;
    acc.role = Role::kLegit;
    const std::size_t n_dev = draw_range(cfg.legit_devices, structure);
    for (std::size_t k = 0; k < n_dev; ++k) {
      acc.device_ids.push_back(world.n_devices++);
    }
    acc.address_id = structure.next_below(cfg.address_pool_size);
    acc.username = "u" + random_name(names, kUsernameStemLen);
    world.accounts.push_back(std::move(acc));
    add_order(world.accounts.size() - 1, Role::kLegit);
  }

  for (std::size_t a = 0; a < cfg.n_abusers; ++a) {
    const std::size_t user_id = cfg.n_legit_users + a;
    const std::size_t n_dev = draw_range(cfg.abuser_devices, structure);
    const std::size_t drop_address = structure.next_below(cfg.address_pool_size);
    const std::string stem = random_name(names, kUsernameStemLen);
    std::size_t seq = 0;
    for (std::size_t d = 0; d < n_dev; ++d) {
      const std::size_t device_id = world.n_devices++;
      const std::size_t n_acc = draw_range(cfg.accounts_per_device, structure);
      for (std::size_t k = 0; k < n_acc; ++k) {
        Account acc;
        acc.user_id = user_id;
        acc.role = Role::kAbusive;
        acc.device_ids.push_back(device_id);
        acc.address_id = drop_address;
        char suffix[8];
        std::snprintf(suffix, sizeof(suffix), "_%02zu", seq++);
        acc.username = stem + suffix;
        world.accounts.push_back(std::move(acc));
        add_order(world.accounts.size() - 1, Role::kAbusive);
      }
    }
  }
  return world;
}

double username_similarity(const std::string& a, const std::string& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) {
    return 1.0;
  }
  const std::size_t dist = levenshtein_within(a, b, longest);
  return 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
}

OrderGraph project_order_graph(const EntityWorld& world) {
  const std::size_t n = world.orders.size();
  if (n == 0) {
    throw std::invalid_argument("project_order_graph: empty order set");
  }
  const std::size_t raw_dim = world.orders.front().raw_features.size();
  Dense features(n, raw_dim);
  std::vector<std::int8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Order& o = world.orders[i];
    if (o.account_id >= world.accounts.size()) {
      throw std::invalid_argument("project_order_graph: dangling account id");
    }
    if (o.raw_features.size() != raw_dim) {
      throw std::invalid_argument("project_order_graph: ragged raw features");
    }
    std::copy(o.raw_features.begin(), o.raw_features.end(), features.row_ptr(i));
    labels[i] = o.true_role == Role::kAbusive ? 1 : 0;
  }

  std::vector<std::pair<NodeId, NodeId>> edges;
  auto add_group_cliques =
      [&edges](const std::unordered_map<std::size_t, std::vector<NodeId>>& groups) {
        for (const auto& [key, members] : groups) {
          for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
              edges.emplace_back(members[i], members[j]);
            }
          }
        }
      };

  std::unordered_map<std::size_t, std::vector<NodeId>> by_device;
  std::unordered_map<std::size_t, std::vector<NodeId>> by_address;
  for (std::size_t i = 0; i < n; ++i) {
    const Account& acc = world.accounts[world.orders[i].account_id];
    for (std::size_t dev : acc.device_ids) {
      by_device[dev].push_back(static_cast<NodeId>(i));
    }
    by_address[acc.address_id].push_back(static_cast<NodeId>(i));
  }
  add_group_cliques(by_device);
  add_group_cliques(by_address);

  // Username similarity: pairwise with a cheap length filter, then a banded
  // edit-distance bounded by the similarity threshold.
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::string& ui = world.accounts[world.orders[i].account_id].username;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::string& uj = world.accounts[world.orders[j].account_id].username;
      const std::size_t longest = std::max(ui.size(), uj.size());
      if (longest == 0) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
        continue;
      }
      const auto limit = static_cast<std::size_t>(
          (1.0 - kUsernameSimilarityThreshold) * static_cast<double>(longest));
      const std::size_t diff =
          ui.size() > uj.size() ? ui.size() - uj.size() : uj.size() - ui.size();
      if (diff > limit) {
        continue;
      }
      if (levenshtein_within(ui, uj, limit) <= limit) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }

  return build_graph(edges, std::move(features), std::move(labels));
}

std::vector<double> embed_click_path(const std::vector<std::string>& path,
                                     std::size_t dim) {
  if (dim < 1) {
    throw std::invalid_argument("embed_click_path: dim must be >= 1");
  }
  std::vector<double> vec(dim, 0.0);
  if (path.empty()) {
    return vec;
  }
  std::size_t n_tokens = 0;
  auto bump = [&](std::uint64_t hash) {
    vec[hash % dim] += 1.0;
    ++n_tokens;
  };
  for (std::size_t i = 0; i < path.size(); ++i) {
    bump(fnv1a64(path[i].data(), path[i].size()));
    if (i + 1 < path.size()) {
      std::uint64_t h = fnv1a64(path[i].data(), path[i].size());
      h = fnv1a64("\x1f", 1, h);
      h = fnv1a64(path[i + 1].data(), path[i + 1].size(), h);
      bump(h);
    }
  }
  double norm_sq = 0.0;
  for (double& v : vec) {
    v /= static_cast<double>(n_tokens);
    norm_sq += v * v;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : vec) {
      v *= inv;
    }
  }
  return vec;
}

Dense build_features(const EntityWorld& world, const OrderGraph& g,
                     const GenConfig& cfg) {
  const std::size_t n = world.orders.size();
  if (g.n_nodes() != n) {
    throw std::invalid_argument("build_features: world/graph size mismatch");
  }
  const std::size_t width = cfg.raw_feature_dim + cfg.embed_dim + 1;
  Dense out(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const Order& o = world.orders[i];
    if (o.raw_features.size() != cfg.raw_feature_dim) {
      throw std::invalid_argument("build_features: raw feature width mismatch");
    }
    double* row = out.row_ptr(i);
    std::copy(o.raw_features.begin(), o.raw_features.end(), row);
    const auto embedding = embed_click_path(o.click_path, cfg.embed_dim);
    std::copy(embedding.begin(), embedding.end(), row + cfg.raw_feature_dim);
    row[width - 1] = static_cast<double>(g.degree(static_cast<NodeId>(i)));
  }
  return out;
}

std::map<NodeId, int> apply_pseudo_label_rules(const EntityWorld& world,
                                               const OrderGraph& g,
                                               const RuleSet& rules) {
  if (rules.min_accounts_per_device < 2) {
    throw std::invalid_argument("RuleSet: min_accounts_per_device must be >= 2");
  }
  if (g.n_nodes() != world.orders.size()) {
    throw std::invalid_argument("apply_pseudo_label_rules: world/graph mismatch");
  }
  std::unordered_map<std::size_t, std::vector<std::size_t>> accounts_on_device;
  for (std::size_t a = 0; a < world.accounts.size(); ++a) {
    for (std::size_t dev : world.accounts[a].device_ids) {
      accounts_on_device[dev].push_back(a);
    }
  }
  std::vector<std::size_t> voucher_orders_of_account(world.accounts.size(), 0);
  std::unordered_map<std::size_t, std::vector<NodeId>> voucher_nodes_of_account;
  for (std::size_t i = 0; i < world.orders.size(); ++i) {
    const Order& o = world.orders[i];
    if (o.used_voucher) {
      voucher_orders_of_account[o.account_id] += 1;
      voucher_nodes_of_account[o.account_id].push_back(static_cast<NodeId>(i));
    }
  }

  std::map<NodeId, int> flagged;
  for (const auto& [device, accounts] : accounts_on_device) {
    if (accounts.size() < rules.min_accounts_per_device) {
      continue;
    }
    if (rules.require_single_voucher_order) {
      bool all_single = true;
      for (std::size_t a : accounts) {
        if (voucher_orders_of_account[a] != 1) {
          all_single = false;
          break;
        }
      }
      if (!all_single) {
        continue;
      }
    }
    for (std::size_t a : accounts) {
      const auto it = voucher_nodes_of_account.find(a);
      if (it != voucher_nodes_of_account.end()) {
        for (NodeId node : it->second) {
          flagged[node] = 1;
        }
      }
    }
  }
  return flagged;
}

OrderGraph build_benchmark_graph(const EntityWorld& world, const GenConfig& cfg) {
  OrderGraph projected = project_order_graph(world);
  Dense features = build_features(world, projected, cfg);
  return projected.with_features(std::move(features));
}

}  // namespace vpgnn
