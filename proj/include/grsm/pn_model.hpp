#pragma once

// Oscillator phase noise: per-symbol Gaussian phase samples for the transmit
// RF chains (equicorrelated across chains) and a single receive-chain sample.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "grsm/random.hpp"

namespace grsm {

enum class PnMode { Off, Clo, Independent, General };

std::string_view to_string(PnMode mode) noexcept;
PnMode parse_pn_mode(std::string_view text);

struct PnConfig {
  double variance = 0.1;     // rad^2
  double correlation = 1.0;  // only read in General mode
  PnMode mode = PnMode::Clo;

  /// Effective correlation coefficient implied by the mode.
  double rho() const noexcept;
  /// Throws std::invalid_argument on negative variance or rho outside [0, 1].
  void validate() const;
};

struct PnRealization {
  std::vector<double> tx_phases;  // one per transmit chain
  double rx_phase = 0.0;
};

/// Sigma with sigma^2 on the diagonal and rho * sigma^2 elsewhere.
Eigen::MatrixXd build_covariance(std::size_t n_chains, const PnConfig& cfg);

/// Draws one realization. Off and zero-variance configs return all-zero phases
/// without consuming random numbers; Clo replicates one draw across chains.
PnRealization sample_pn(const PnConfig& cfg, std::size_t n_chains, Rng& rng);

/// Combined phase term seen after averaging the active branches:
///   e^{j rx} * sum_k active_k e^{j phi_k} / max(sum_k active_k, 1)
/// `branch_phases[k]` is the transmit phase seen on receive branch k.
std::complex<double> combined_pn_term(double rx_phase, std::span<const double> branch_phases,
                                      std::span<const bool> active);

/// First-order variance of arg(combined_pn_term) with n independent branch
/// phases and an independent receive phase: (1 + 1/n) * variance.
double combined_pn_variance(std::size_t n_active, double variance);

}  // namespace grsm
