#include "grsm/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace grsm {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"system.modulation", "(required)", "MQAM order M: 4 or 16"},
      {"system.mapping_mode", "(required)", "classical | epn"},
      {"system.spectral_efficiency", "8", "bits per slot; N_a = SE - log2(M)"},
      {"channel.n_tx", "32", "base-station antennas (one RF chain each)"},
      {"channel.n_rx", "8", "user antennas available for selection"},
      {"channel.model", "saleh_valenzuela", "saleh_valenzuela | rayleigh_iid"},
      {"channel.n_clusters", "5", "clusters of the clustered model"},
      {"channel.n_rays_per_cluster", "10", "rays per cluster"},
      {"channel.angular_spread_deg", "7.5", "per-ray Laplacian angular spread (std, degrees)"},
      {"channel.cluster_angle_range_deg", "60", "cluster centers uniform in [-range, range]"},
      {"channel.los_present", "true", "first cluster is a single specular path"},
      {"channel.alpha_realizations", "10000", "channel draws averaged for alpha"},
      {"phase_noise.mode", "clo", "off | clo | independent | general"},
      {"phase_noise.variance", "0.1", "per-symbol phase variance, rad^2"},
      {"phase_noise.correlation", "1.0", "inter-chain correlation (general mode only)"},
      {"detector.compensation", "none", "none | single | double (single/double need epn)"},
      {"detector.prior_active", "0.5", "P(branch active) used to design the energy threshold"},
      {"sweep.snr_db", "[0, 5, 10, 15, 20, 25, 30, 35, 40]", "SNR grid in dB; .inf gives a noiseless point"},
      {"sweep.trials_per_point", "100000", "trial cap per SNR point"},
      {"sweep.target_errors", "100", "stop a point once this many bit errors accrue (0: never)"},
      {"sweep.channel_redraw_period", "100", "trials sharing one channel realization"},
      {"sweep.master_seed", "1", "root of every random stream"},
  };
  return keys;
}

namespace {

std::string where(const std::string& origin, const YAML::Mark& mark) {
  if (mark.is_null()) return origin;
  return fmt::format("{}:{}:{}", origin, mark.line + 1, mark.column + 1);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, const std::string& origin) {
  if (!node.IsScalar()) {
    throw ConfigError(fmt::format("{}: '{}' must be a scalar", where(origin, node.Mark()), key));
  }
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("{}: invalid value '{}' for '{}'", where(origin, node.Mark()),
                                  node.Scalar(), key));
  }
}

template <typename Enum>
Enum enum_value(const YAML::Node& node, const std::string& key, const std::string& origin,
                Enum (*parse)(std::string_view)) {
  const auto text = scalar<std::string>(node, key, origin);
  try {
    return parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: '{}': {}", where(origin, node.Mark()), key, e.what()));
  }
}

}  // namespace

SimConfig parse_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("{}: {}", where(origin, e.mark), e.msg));
  }
  if (!root.IsMap()) {
    throw ConfigError(fmt::format("{}: top level must be a mapping of sections", origin));
  }

  SimConfig cfg;
  bool has_modulation = false;
  bool has_mapping = false;

  using Handler = std::function<void(const YAML::Node&, const std::string&)>;
  const std::map<std::string, Handler> handlers{
      {"system.modulation",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.modulation = scalar<unsigned>(n, k, origin);
         has_modulation = true;
       }},
      {"system.mapping_mode",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.mapping_mode = enum_value(n, k, origin, &parse_mapping_mode);
         has_mapping = true;
       }},
      {"system.spectral_efficiency",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.spectral_efficiency = scalar<unsigned>(n, k, origin);
       }},
      {"channel.n_tx",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.n_tx = scalar<std::size_t>(n, k, origin);
       }},
      {"channel.n_rx",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.n_rx = scalar<std::size_t>(n, k, origin);
       }},
      {"channel.model",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.model = enum_value(n, k, origin, &parse_channel_model);
       }},
      {"channel.n_clusters",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.n_clusters = scalar<std::size_t>(n, k, origin);
       }},
      {"channel.n_rays_per_cluster",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.n_rays_per_cluster = scalar<std::size_t>(n, k, origin);
       }},
      {"channel.angular_spread_deg",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.angular_spread_deg = scalar<double>(n, k, origin);
       }},
      {"channel.cluster_angle_range_deg",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.cluster_angle_range_deg = scalar<double>(n, k, origin);
       }},
      {"channel.los_present",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel.los_present = scalar<bool>(n, k, origin);
       }},
      {"channel.alpha_realizations",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.alpha_realizations = scalar<std::uint64_t>(n, k, origin);
       }},
      {"phase_noise.mode",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.pn.mode = enum_value(n, k, origin, &parse_pn_mode);
       }},
      {"phase_noise.variance",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.pn.variance = scalar<double>(n, k, origin);
       }},
      {"phase_noise.correlation",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.pn.correlation = scalar<double>(n, k, origin);
       }},
      {"detector.compensation",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.compensation = enum_value(n, k, origin, &parse_compensation);
       }},
      {"detector.prior_active",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.prior_active = scalar<double>(n, k, origin);
       }},
      {"sweep.snr_db",
       [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence()) {
           throw ConfigError(fmt::format("{}: '{}' must be a list", where(origin, n.Mark()), k));
         }
         cfg.snr_db.clear();
         for (const auto& v : n) cfg.snr_db.push_back(scalar<double>(v, k, origin));
       }},
      {"sweep.trials_per_point",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.trials_per_point = scalar<std::uint64_t>(n, k, origin);
       }},
      {"sweep.target_errors",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.target_errors = scalar<std::uint64_t>(n, k, origin);
       }},
      {"sweep.channel_redraw_period",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.channel_redraw_period = scalar<std::uint64_t>(n, k, origin);
       }},
      {"sweep.master_seed",
       [&](const YAML::Node& n, const std::string& k) {
         cfg.master_seed = scalar<std::uint64_t>(n, k, origin);
       }},
  };

  for (const auto& section : root) {
    const auto sname = section.first.as<std::string>();
    if (!section.second.IsMap()) {
      throw ConfigError(fmt::format("{}: section '{}' must be a mapping",
                                    where(origin, section.first.Mark()), sname));
    }
    for (const auto& entry : section.second) {
      const auto key = sname + "." + entry.first.as<std::string>();
      const auto it = handlers.find(key);
      if (it == handlers.end()) {
        throw ConfigError(
            fmt::format("{}: unknown key '{}'", where(origin, entry.first.Mark()), key));
      }
      it->second(entry.second, key);
    }
  }
  if (!has_modulation) {
    throw ConfigError(fmt::format("{}: missing required key 'system.modulation'", origin));
  }
  if (!has_mapping) {
    throw ConfigError(fmt::format("{}: missing required key 'system.mapping_mode'", origin));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("{}: {}", origin, e.what()));
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("{}: cannot open config file", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string canonical_config(const SimConfig& cfg) {
  std::string out;
  const auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{}={}\n", key, value);
  };
  line("system.modulation", cfg.modulation);
  line("system.mapping_mode", to_string(cfg.mapping_mode));
  line("system.spectral_efficiency", cfg.spectral_efficiency);
  line("channel.n_tx", cfg.channel.n_tx);
  line("channel.n_rx", cfg.channel.n_rx);
  line("channel.model", to_string(cfg.channel.model));
  line("channel.n_clusters", cfg.channel.n_clusters);
  line("channel.n_rays_per_cluster", cfg.channel.n_rays_per_cluster);
  line("channel.angular_spread_deg", cfg.channel.angular_spread_deg);
  line("channel.cluster_angle_range_deg", cfg.channel.cluster_angle_range_deg);
  line("channel.los_present", cfg.channel.los_present);
  line("channel.alpha_realizations", cfg.alpha_realizations);
  line("channel.alpha_override", cfg.alpha_override ? fmt::format("{}", *cfg.alpha_override) : "none");
  line("phase_noise.mode", to_string(cfg.pn.mode));
  line("phase_noise.variance", cfg.pn.variance);
  line("phase_noise.correlation", cfg.pn.correlation);
  line("detector.compensation", to_string(cfg.compensation));
  line("detector.prior_active", cfg.prior_active);
  std::string grid;
  for (const double s : cfg.snr_db) grid += fmt::format("{}{}", grid.empty() ? "" : ",", s);
  line("sweep.snr_db", grid);
  line("sweep.trials_per_point", cfg.trials_per_point);
  line("sweep.target_errors", cfg.target_errors);
  line("sweep.channel_redraw_period", cfg.channel_redraw_period);
  line("sweep.master_seed", cfg.master_seed);
  return out;
}

std::string config_hash(const SimConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace grsm
