#include "grsm/pn_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace grsm {

std::string_view to_string(PnMode mode) noexcept {
  switch (mode) {
    case PnMode::Off:
      return "off";
    case PnMode::Clo:
      return "clo";
    case PnMode::Independent:
      return "independent";
    case PnMode::General:
      return "general";
  }
  return "?";
}

PnMode parse_pn_mode(std::string_view text) {
  if (text == "off") return PnMode::Off;
  if (text == "clo") return PnMode::Clo;
  if (text == "independent") return PnMode::Independent;
  if (text == "general") return PnMode::General;
  throw std::invalid_argument("unknown phase-noise mode '" + std::string(text) +
                              "' (expected off|clo|independent|general)");
}

double PnConfig::rho() const noexcept {
  switch (mode) {
    case PnMode::Clo:
      return 1.0;
    case PnMode::Off:
    case PnMode::Independent:
      return 0.0;
    case PnMode::General:
      break;
  }
  return correlation;
}

void PnConfig::validate() const {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("phase-noise variance must be finite and >= 0");
  }
  const double r = rho();
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::invalid_argument("phase-noise correlation must lie in [0, 1]");
  }
}

Eigen::MatrixXd build_covariance(std::size_t n_chains, const PnConfig& cfg) {
  if (n_chains == 0) {
    throw std::invalid_argument("covariance needs at least one chain");
  }
  cfg.validate();
  const double var = cfg.mode == PnMode::Off ? 0.0 : cfg.variance;
  const auto n = static_cast<Eigen::Index>(n_chains);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(n, n, cfg.rho() * var);
  sigma.diagonal().setConstant(var);
  return sigma;
}

PnRealization sample_pn(const PnConfig& cfg, std::size_t n_chains, Rng& rng) {
  PnRealization pn;
  pn.tx_phases.assign(n_chains, 0.0);
  if (cfg.mode == PnMode::Off || cfg.variance == 0.0) {
    return pn;
  }
  const double sd = std::sqrt(cfg.variance);
  std::normal_distribution<double> gauss(0.0, 1.0);
  switch (cfg.mode) {
    case PnMode::Clo: {
      const double phi = sd * gauss(rng);
      pn.tx_phases.assign(n_chains, phi);
      break;
    }
    case PnMode::Independent:
      for (auto& p : pn.tx_phases) p = sd * gauss(rng);
      break;
    case PnMode::General: {
      // Equicorrelated Gaussian: shared factor plus idiosyncratic part.
      const double r = cfg.rho();
      const double common = gauss(rng);
      const double a = std::sqrt(r);
      const double b = std::sqrt(1.0 - r);
      for (auto& p : pn.tx_phases) p = sd * (a * common + b * gauss(rng));
      break;
    }
    case PnMode::Off:
      break;
  }
  pn.rx_phase = sd * gauss(rng);
  return pn;
}

std::complex<double> combined_pn_term(double rx_phase, std::span<const double> branch_phases,
                                      std::span<const bool> active) {
  if (branch_phases.size() != active.size()) {
    throw std::invalid_argument("combined_pn_term: phase/flag length mismatch");
  }
  std::complex<double> sum{0.0, 0.0};
  std::size_t count = 0;
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k]) {
      sum += std::polar(1.0, branch_phases[k]);
      ++count;
    }
  }
  return std::polar(1.0, rx_phase) * sum / static_cast<double>(std::max<std::size_t>(count, 1));
}

double combined_pn_variance(std::size_t n_active, double variance) {
  if (n_active == 0) {
    throw std::invalid_argument("combined_pn_variance: n_active must be >= 1");
  }
  return (1.0 + 1.0 / static_cast<double>(n_active)) * variance;
}

}  // namespace grsm
