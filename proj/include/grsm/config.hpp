#pragma once

// Run configuration files: a YAML document with sections mirroring SimConfig.
// Unknown keys and bad values are reported with line and column.

#include <stdexcept>
#include <string>
#include <vector>

#include "grsm/sim.hpp"

namespace grsm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string path;          // "section.key"
  std::string default_value; // rendered default, "(required)" when none
  std::string help;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Parses `text`; `origin` prefixes diagnostics (usually the file path).
SimConfig parse_config(const std::string& text, const std::string& origin = "<config>");
SimConfig load_config(const std::string& path);

/// Stable one-line-per-field rendering of every field that affects results.
std::string canonical_config(const SimConfig& cfg);

/// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const SimConfig& cfg);

}  // namespace grsm
