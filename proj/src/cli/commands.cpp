#include "grsm/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "grsm/config.hpp"
#include "grsm/constellation.hpp"
#include "grsm/mapping.hpp"
#include "grsm/pn_model.hpp"
#include "grsm/random.hpp"
#include "grsm/report.hpp"
#include "grsm/sim.hpp"

namespace grsm::cli {
namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

class SigintGuard {
 public:
  SigintGuard() {
    g_interrupted.store(false);
    previous_ = std::signal(SIGINT, on_sigint);
  }
  ~SigintGuard() { std::signal(SIGINT, previous_); }
  SigintGuard(const SigintGuard&) = delete;
  SigintGuard& operator=(const SigintGuard&) = delete;

 private:
  void (*previous_)(int) = SIG_DFL;
};

// "-" or empty means the given stream.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

std::string config_key_help() {
  std::string s = "Config keys (section.key = default):\n";
  for (const auto& k : config_keys()) {
    s += fmt::format("  {:<34} {:<38} {}\n", k.path, k.default_value, k.help);
  }
  return s;
}

struct SweepArgs {
  std::string config;
  std::string out;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  bool plot = false;
};

int cmd_ber_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  SimConfig cfg;
  try {
    cfg = load_config(a.config);
    if (a.seed) cfg.master_seed = *a.seed;
    if (a.trials) cfg.trials_per_point = *a.trials;
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::string dir = a.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutputDirEnv);
    dir = env != nullptr && *env != '\0' ? env : ".";
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << fmt::format("error: {}: cannot create output directory: {}\n", dir, ec.message());
    return kExitRuntime;
  }

  const auto t0 = std::chrono::steady_clock::now();
  SweepResult result;
  {
    SigintGuard guard;
    SweepOptions opts;
    opts.threads = std::max(1u, a.threads);
    opts.cancel = &g_interrupted;
    result = run_sweep(cfg, opts);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto hash = config_hash(cfg);
  const auto csv_path = (fs::path(dir) / "ber.csv").string();
  const auto csv = format_csv(result.records, hash);
  write_text_file(csv_path, csv);
  ManifestInfo info{csv_path, csv, a.threads, wall};
  write_text_file((fs::path(dir) / "manifest.json").string(), format_manifest(cfg, result, info));
  if (a.plot) {
    const auto title = fmt::format("{}QAM {} mapping, PN {} (var {}), compensation {}",
                                   cfg.modulation, to_string(cfg.mapping_mode),
                                   to_string(cfg.pn.mode), cfg.pn.variance,
                                   to_string(cfg.compensation));
    write_text_file((fs::path(dir) / "ber.svg").string(),
                    format_svg_plot(sweep_series(result.records, "sim"), title));
  }
  for (const auto& r : result.records) {
    out << fmt::format("snr {:>5} dB  ber {:<12.4e} spatial {:<12.4e} mqam {:<12.4e} trials {}\n",
                       r.snr_db, r.ber_overall(), r.ber_spatial(), r.ber_mqam(), r.counts.trials);
  }
  out << fmt::format("alpha {:.6e}, wrote {}\n", result.alpha, csv_path);
  if (result.interrupted) {
    err << "interrupted: partial results written\n";
    return kExitRuntime;
  }
  return kExitOk;
}

std::string pool_design_csv(unsigned order, unsigned n_active) {
  const auto c = build_mqam(order);
  const auto pools = build_pools(c);
  const auto table = build_mapping_table(c, n_active, pools);
  const unsigned prefix_bits = c.bits_per_symbol - 1;
  std::string s = "pool_index,bit_prefix,symbol_1,symbol_2,sensitivity,allowed_J_list\n";
  for (std::size_t i = 0; i < table.pools.size(); ++i) {
    const auto& pm = table.pools[i];
    std::string prefix;
    for (unsigned b = prefix_bits; b-- > 0;) prefix += ((pm.bit_prefix >> b) & 1u) ? '1' : '0';
    std::string allowed;
    if (table.weight_rule_form) {
      allowed = fmt::format("w_h:{}", fmt::join(pm.weights, ";"));
    } else {
      allowed = fmt::format("{}", fmt::join(pm.allowed, ";"));
    }
    s += fmt::format("{},{},{},{},{},{}\n", i, prefix, format_symbol(pm.pool.first),
                     format_symbol(pm.pool.second), sensitivity_code(pm.pool.sensitivity),
                     allowed);
  }
  return s;
}

constexpr unsigned kMaxPatternWidth = 20;

int cmd_pool_design(unsigned order, unsigned n_active, const std::string& path, std::ostream& out,
                    std::ostream& err) {
  if (order != 4 && order != 16) {
    err << fmt::format("error: pool design supports M = 4 or 16, got {}\n", order);
    return kExitConfig;
  }
  if (n_active == 0 || n_active > kMaxPatternWidth) {
    err << fmt::format("error: N_a must lie in [1, {}], got {}\n", kMaxPatternWidth, n_active);
    return kExitConfig;
  }
  std::string csv;
  try {
    csv = pool_design_csv(order, n_active);
  } catch (const std::invalid_argument& e) {
    err << "error: unsupported (M, N_a): " << e.what() << '\n';
    return kExitConfig;
  }
  emit(path, csv, out);
  return kExitOk;
}

int cmd_overlap_table(unsigned order, double variance, const std::string& path,
                      std::ostream& out, std::ostream& err) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    err << "error: sigma2 must be positive and finite\n";
    return kExitConfig;
  }
  if (order != 4 && order != 16) {
    err << fmt::format("error: pools exist for M = 4 or 16, got {}\n", order);
    return kExitConfig;
  }
  const auto pools = build_pools(build_mqam(order));
  std::string s =
      "pool_index,delta_theta,euclidean_distance,overlap_closed_form,overlap_quadrature\n";
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const double t1 = std::arg(pools[i].first);
    const double t2 = std::arg(pools[i].second);
    s += fmt::format("{},{},{},{},{}\n", i, format_number(angular_separation(t1, t2)),
                     format_number(std::abs(pools[i].first - pools[i].second)),
                     format_number(overlap_probability(t1, t2, variance)),
                     format_number(overlap_probability_numeric(t1, t2, variance)));
  }
  emit(path, s, out);
  return kExitOk;
}

int cmd_pn_variance(double variance, unsigned max_branches, std::uint64_t trials,
                    std::uint64_t seed, const std::string& path, std::ostream& out,
                    std::ostream& err) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    err << "error: sigma2 must be finite and >= 0\n";
    return kExitConfig;
  }
  if (max_branches == 0) {
    err << "error: max-branches must be >= 1\n";
    return kExitConfig;
  }
  if (trials < 2) {
    err << "error: trials must be >= 2\n";
    return kExitConfig;
  }
  PnConfig pn;
  pn.mode = PnMode::Independent;
  pn.variance = variance;
  std::string s = "n,analytic,monte_carlo,relative_gap\n";
  for (unsigned n = 1; n <= max_branches; ++n) {
    auto rng = make_rng({seed, tag(StreamTag::PnVariance), n});
    const auto active = std::make_unique<bool[]>(n);
    std::fill_n(active.get(), n, true);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto r = sample_pn(pn, n, rng);
      const double a = std::arg(combined_pn_term(
          r.rx_phase, r.tx_phases, {active.get(), n}));
      const double d = a - mean;
      mean += d / static_cast<double>(t + 1);
      m2 += d * (a - mean);
    }
    const double mc = m2 / static_cast<double>(trials - 1);
    const double analytic = combined_pn_variance(n, variance);
    const double gap = analytic > 0.0 ? std::abs(mc - analytic) / analytic : std::abs(mc);
    s += fmt::format("{},{},{},{}\n", n, format_number(analytic), format_number(mc),
                     format_number(gap));
  }
  emit(path, s, out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GRSM link-level simulator and design tables"};
  app.require_subcommand(1);

  SweepArgs sweep;
  auto* ber = app.add_subcommand("ber-sweep", "Monte Carlo BER sweep from a YAML config");
  ber->add_option("--config", sweep.config, "YAML run configuration")->required();
  ber->add_option("--out", sweep.out,
                  fmt::format("output directory (default: ${} or .)", kOutputDirEnv));
  ber->add_option("--threads", sweep.threads, "worker threads")->check(CLI::PositiveNumber);
  ber->add_option("--seed", sweep.seed, "override sweep.master_seed");
  ber->add_option("--trials-override", sweep.trials, "override sweep.trials_per_point");
  ber->add_flag("--plot", sweep.plot, "also write ber.svg");
  ber->footer(config_key_help());

  unsigned pd_order = 16, pd_na = 4;
  std::string pd_out = "-";
  auto* pd = app.add_subcommand("pool-design", "Pool and spatial-index mapping table as CSV");
  pd->add_option("-M,--modulation", pd_order, "MQAM order")->capture_default_str();
  pd->add_option("--na", pd_na, "active receive branches N_a")->capture_default_str();
  pd->add_option("--out", pd_out, "output file, - for stdout")->capture_default_str();

  unsigned ov_order = 16;
  double ov_var = 0.1;
  std::string ov_out = "-";
  auto* ov = app.add_subcommand("overlap-table", "Per-pool distance and phase overlap as CSV");
  ov->add_option("-M,--modulation", ov_order, "MQAM order")->capture_default_str();
  ov->add_option("--sigma2", ov_var, "phase-noise variance")->capture_default_str();
  ov->add_option("--out", ov_out, "output file, - for stdout")->capture_default_str();

  double pv_var = 0.1;
  unsigned pv_n = 4;
  std::uint64_t pv_trials = 1000000, pv_seed = 1;
  std::string pv_out = "-";
  auto* pv = app.add_subcommand("pn-variance", "Combined phase-noise variance versus branches");
  pv->add_option("--sigma2", pv_var, "phase-noise variance")->capture_default_str();
  pv->add_option("--max-branches", pv_n, "largest branch count")->capture_default_str();
  pv->add_option("--trials", pv_trials, "Monte Carlo samples per row")->capture_default_str();
  pv->add_option("--seed", pv_seed, "random seed")->capture_default_str();
  pv->add_option("--out", pv_out, "output file, - for stdout")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ber) return cmd_ber_sweep(sweep, out, err);
    if (*pd) return cmd_pool_design(pd_order, pd_na, pd_out, out, err);
    if (*ov) return cmd_overlap_table(ov_order, ov_var, ov_out, out, err);
    if (*pv) return cmd_pn_variance(pv_var, pv_n, pv_trials, pv_seed, pv_out, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace grsm::cli
