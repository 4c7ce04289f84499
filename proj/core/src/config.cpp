#include "vpgnn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace vpgnn {
namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      // gen
      "gen.n_legit_users", "gen.n_abusers", "gen.abuser_devices_min",
      "gen.abuser_devices_max", "gen.accounts_per_device_min",
      "gen.accounts_per_device_max", "gen.legit_devices_min",
      "gen.legit_devices_max", "gen.address_pool_size", "gen.clickpath_vocab",
      "gen.clickpath_len_min", "gen.clickpath_len_max", "gen.embed_dim",
      "gen.raw_feature_dim", "gen.feature_noise_scale", "gen.seed",
      // pretrain
      "pretrain.epochs", "pretrain.lr", "pretrain.hidden_dim", "pretrain.seed",
      // tune
      "tune.mode", "tune.eta", "tune.lambda", "tune.epochs", "tune.lr",
      "tune.seed",
      // eval
      "eval.setting", "eval.n_splits", "eval.modes", "eval.semi_budget",
  };
  return keys;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] == '-') {
      throw ConfigError(key + ": must be non-negative, got " + value);
    }
    const std::uint64_t v = std::stoull(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) {
      throw std::invalid_argument("trailing characters");
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    if (cfg.entries_.count(key) != 0) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_u64(key, it->second);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(key, it->second);
}

void KeyValueConfig::reject_unknown_keys() const {
  std::string unknown;
  for (const auto& [key, value] : entries_) {
    if (known_keys().count(key) == 0) {
      if (!unknown.empty()) {
        unknown += ", ";
      }
      unknown += key;
    }
  }
  if (!unknown.empty()) {
    throw ConfigError(origin_ + ": unknown configuration keys: " + unknown);
  }
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

GenConfig gen_config_from(const KeyValueConfig& cfg, std::uint64_t master_seed) {
  GenConfig gen;
  gen.n_legit_users = cfg.get_u64("gen.n_legit_users", gen.n_legit_users);
  gen.n_abusers = cfg.get_u64("gen.n_abusers", gen.n_abusers);
  gen.abuser_devices.min =
      cfg.get_u64("gen.abuser_devices_min", gen.abuser_devices.min);
  gen.abuser_devices.max =
      cfg.get_u64("gen.abuser_devices_max", gen.abuser_devices.max);
  gen.accounts_per_device.min =
      cfg.get_u64("gen.accounts_per_device_min", gen.accounts_per_device.min);
  gen.accounts_per_device.max =
      cfg.get_u64("gen.accounts_per_device_max", gen.accounts_per_device.max);
  gen.legit_devices.min = cfg.get_u64("gen.legit_devices_min", gen.legit_devices.min);
  gen.legit_devices.max = cfg.get_u64("gen.legit_devices_max", gen.legit_devices.max);
  gen.address_pool_size = cfg.get_u64("gen.address_pool_size", gen.address_pool_size);
  if (cfg.has("gen.clickpath_vocab")) {
    gen.clickpath_vocab = split_list(cfg.get_string("gen.clickpath_vocab", ""));
  }
  gen.clickpath_len.min = cfg.get_u64("gen.clickpath_len_min", gen.clickpath_len.min);
  gen.clickpath_len.max = cfg.get_u64("gen.clickpath_len_max", gen.clickpath_len.max);
  gen.embed_dim = cfg.get_u64("gen.embed_dim", gen.embed_dim);
  gen.raw_feature_dim = cfg.get_u64("gen.raw_feature_dim", gen.raw_feature_dim);
  gen.feature_noise_scale =
      cfg.get_double("gen.feature_noise_scale", gen.feature_noise_scale);
  gen.seed = cfg.get_u64("gen.seed", derive_seed(master_seed, 0x67656E));
  try {
    validate_config(gen);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return gen;
}

PretrainConfig pretrain_config_from(const KeyValueConfig& cfg,
                                    std::uint64_t master_seed) {
  PretrainConfig pre;
  pre.epochs = cfg.get_u64("pretrain.epochs", pre.epochs);
  pre.lr = cfg.get_double("pretrain.lr", pre.lr);
  pre.hidden_dim = cfg.get_u64("pretrain.hidden_dim", pre.hidden_dim);
  pre.seed = cfg.get_u64("pretrain.seed", derive_seed(master_seed, 0x707265));
  if (pre.epochs < 1) {
    throw ConfigError("pretrain.epochs: must be >= 1");
  }
  if (pre.lr <= 0.0) {
    throw ConfigError("pretrain.lr: must be positive");
  }
  if (pre.hidden_dim < 1) {
    throw ConfigError("pretrain.hidden_dim: must be >= 1");
  }
  return pre;
}

TuneConfig tune_config_from(const KeyValueConfig& cfg, std::uint64_t master_seed) {
  TuneConfig tune;
  try {
    tune.mode = parse_tune_mode(cfg.get_string("tune.mode", "vpgnn"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  tune.eta = cfg.get_u64("tune.eta", tune.eta);
  tune.lambda = cfg.get_double("tune.lambda", tune.lambda);
  tune.epochs = cfg.get_u64("tune.epochs", tune.epochs);
  tune.lr = cfg.get_double("tune.lr", tune.lr);
  tune.seed = cfg.get_u64("tune.seed", derive_seed(master_seed, 0x74756E));
  if (tune.lambda < 0.0) {
    throw ConfigError("tune.lambda: must be >= 0");
  }
  if (tune.lr <= 0.0) {
    throw ConfigError("tune.lr: must be positive");
  }
  return tune;
}

EvalOptions eval_options_from(const KeyValueConfig& cfg, std::uint64_t master_seed) {
  EvalOptions options;
  try {
    options.setting = TaskSetting::parse(cfg.get_string("eval.setting", "10-shot"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (options.setting.kind == TaskSetting::Kind::kSemi) {
    options.setting.semi_budget = cfg.get_u64("eval.semi_budget", 0);
  }
  options.n_splits = cfg.get_u64("eval.n_splits", options.n_splits);
  if (options.n_splits == 0) {
    throw ConfigError("eval.n_splits: must be >= 1");
  }
  options.master_seed = master_seed;
  options.tune = tune_config_from(cfg, master_seed);
  return options;
}

std::vector<TuneMode> modes_from(const KeyValueConfig& cfg) {
  const std::string value = cfg.get_string(
      "eval.modes", "vpgnn,no-prompt,random-init,no-constraint");
  std::vector<TuneMode> modes;
  for (const std::string& name : split_list(value)) {
    try {
      modes.push_back(parse_tune_mode(name));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("eval.modes: ") + e.what());
    }
  }
  if (modes.empty()) {
    throw ConfigError("eval.modes: empty mode list");
  }
  return modes;
}

std::uint64_t master_seed_from(const KeyValueConfig& cfg,
                               std::optional<std::uint64_t> override_seed) {
  if (override_seed.has_value()) {
    return *override_seed;
  }
  return cfg.get_u64("seed", 0);
}

std::map<std::string, std::string> resolved_entries(const GenConfig& gen) {
  std::map<std::string, std::string> out;
  out["gen.n_legit_users"] = std::to_string(gen.n_legit_users);
  out["gen.n_abusers"] = std::to_string(gen.n_abusers);
  out["gen.abuser_devices_min"] = std::to_string(gen.abuser_devices.min);
  out["gen.abuser_devices_max"] = std::to_string(gen.abuser_devices.max);
  out["gen.accounts_per_device_min"] = std::to_string(gen.accounts_per_device.min);
  out["gen.accounts_per_device_max"] = std::to_string(gen.accounts_per_device.max);
  out["gen.legit_devices_min"] = std::to_string(gen.legit_devices.min);
  out["gen.legit_devices_max"] = std::to_string(gen.legit_devices.max);
  out["gen.address_pool_size"] = std::to_string(gen.address_pool_size);
  std::string vocab;
  for (const std::string& action : gen.clickpath_vocab) {
    if (!vocab.empty()) {
      vocab += ",";
    }
    vocab += action;
  }
  out["gen.clickpath_vocab"] = vocab;
  out["gen.clickpath_len_min"] = std::to_string(gen.clickpath_len.min);
  out["gen.clickpath_len_max"] = std::to_string(gen.clickpath_len.max);
  out["gen.embed_dim"] = std::to_string(gen.embed_dim);
  out["gen.raw_feature_dim"] = std::to_string(gen.raw_feature_dim);
  out["gen.feature_noise_scale"] = format_double(gen.feature_noise_scale);
  out["gen.seed"] = std::to_string(gen.seed);
  return out;
}

}  // namespace vpgnn
