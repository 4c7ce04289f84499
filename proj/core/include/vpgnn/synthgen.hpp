#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vpgnn/graph.hpp"

namespace vpgnn {

// Inclusive count range used by the generator configuration.
struct CountRange {
  std::size_t min = 1;
  std::size_t max = 1;
};

// Configuration of a synthetic entity world. The defaults describe the
// standard desk-scale benchmark: ~2,000 orders with roughly 5% abusive,
// spread over many small device farms so that a handful of labeled shots
// never covers every abuse pattern.
struct GenConfig {
  std::size_t n_legit_users = 1900;
  std::size_t n_abusers = 20;
  CountRange abuser_devices{2, 3};       // devices per abuser
  CountRange accounts_per_device{1, 3};  // accounts per abuser device
  CountRange legit_devices{1, 2};        // devices per legitimate user
  std::size_t address_pool_size = 400;
  std::vector<std::string> clickpath_vocab = {
      "home",      "search",   "product", "cart",     "checkout",
      "voucher_center", "personal_page", "my_orders", "payment", "logout"};
  CountRange clickpath_len{3, 8};
  std::size_t embed_dim = 16;
  std::size_t raw_feature_dim = 8;
  double feature_noise_scale = 1.0;
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument on a degenerate configuration (empty
// vocabulary, max < min in any range, zero dims, legit devices outside
// {1,2}).
void validate_config(const GenConfig& cfg);

enum class Role : std::uint8_t { kLegit = 0, kAbusive = 1 };

struct Account {
  std::size_t user_id = 0;  // owning user; legit users and abusers share an id space
  Role role = Role::kLegit;
  std::vector<std::size_t> device_ids;  // devices this account is used from
  std::size_t address_id = 0;
  std::string username;
};

struct Order {
  std::size_t account_id = 0;
  bool used_voucher = true;
  std::vector<std::string> click_path;
  std::vector<double> raw_features;
  Role true_role = Role::kLegit;
};

// A generated population of devices, addresses, accounts and orders.
// Orders are the graph nodes downstream; order index == node id.
struct EntityWorld {
  std::size_t n_devices = 0;
  std::size_t n_addresses = 0;
  std::vector<Account> accounts;
  std::vector<Order> orders;
};

// Deterministic world generation. Every legitimate user owns one account on
// one or two personal devices and places a single voucher order; every
// abuser runs a device farm where each device hosts several accounts, one
// voucher order each, all shipping to one drop address and registered under
// usernames sharing a stem.
EntityWorld generate_world(const GenConfig& cfg);

// One node per order; undirected edge between two orders iff their accounts
// share a device, share an address, or have username edit-similarity of at
// least kUsernameSimilarityThreshold. Node features are the raw tabular
// vectors; labels are the true roles.
OrderGraph project_order_graph(const EntityWorld& world);

inline constexpr double kUsernameSimilarityThreshold = 0.8;

// 1 - levenshtein(a, b) / max(|a|, |b|); 1.0 for two empty strings.
double username_similarity(const std::string& a, const std::string& b);

// Hashed unigram+bigram click-path embedding: mean of one-hot bucket
// vectors, L2-normalized when nonzero. Deterministic and order-sensitive
// through the bigrams.
std::vector<double> embed_click_path(const std::vector<std::string>& path,
                                     std::size_t dim);

// Node feature assembly: raw tabular vector, then click-path embedding,
// then node degree. Column count is raw_feature_dim + embed_dim + 1.
Dense build_features(const EntityWorld& world, const OrderGraph& g,
                     const GenConfig& cfg);

// Conservative pseudo-labeling rules: a device is conspicuous when it hosts
// at least min_accounts_per_device accounts and (when required) each of
// them placed exactly one voucher order.
struct RuleSet {
  std::size_t min_accounts_per_device = 3;  // threshold K, must be >= 2
  bool require_single_voucher_order = true;
};

// Sparse map node-id -> 1 over the voucher orders of conspicuous devices.
std::map<NodeId, int> apply_pseudo_label_rules(const EntityWorld& world,
                                               const OrderGraph& g,
                                               const RuleSet& rules);

// world -> final benchmark graph: projected topology, assembled features,
// ground-truth labels.
OrderGraph build_benchmark_graph(const EntityWorld& world, const GenConfig& cfg);

}  // namespace vpgnn
