#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpgnn/eval.hpp"
#include "vpgnn/pretrain.hpp"
#include "vpgnn/prompt.hpp"
#include "vpgnn/synthgen.hpp"

namespace vpgnn {

// A bad configuration file, flag value or key; maps to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pipeline stage that failed at runtime; maps to exit code 2.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_name(stage) {}
  std::string stage_name;
};

// Flat key=value configuration with section-prefixed keys (gen., pretrain.,
// tune., eval.) plus the master "seed". '#' starts a comment; blank lines
// are skipped. Unknown keys are rejected.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text,
                                     const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;

  // Throws ConfigError listing every key outside the known set.
  void reject_unknown_keys() const;

  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::string> entries_;
  std::string origin_;
};

// Typed section builders. Each consumes its "<section>." keys and applies
// documented defaults for the rest. The master seed seeds any section whose
// own seed key is absent.
GenConfig gen_config_from(const KeyValueConfig& cfg, std::uint64_t master_seed);
PretrainConfig pretrain_config_from(const KeyValueConfig& cfg,
                                    std::uint64_t master_seed);
TuneConfig tune_config_from(const KeyValueConfig& cfg, std::uint64_t master_seed);
EvalOptions eval_options_from(const KeyValueConfig& cfg, std::uint64_t master_seed);

std::vector<TuneMode> modes_from(const KeyValueConfig& cfg);

// Master seed: --seed flag beats the "seed" key beats 0.
std::uint64_t master_seed_from(const KeyValueConfig& cfg,
                               std::optional<std::uint64_t> override_seed);

// Effective key=value view of the resolved settings, for audit echoes.
std::map<std::string, std::string> resolved_entries(const GenConfig& gen);

}  // namespace vpgnn
