#pragma once

// One symbol slot through the downlink: precoded transmission with phase
// noise, per-branch energy detection of the spatial pattern, branch combining
// and symbol detection with optional symbol-assisted phase compensation.

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "grsm/channel.hpp"
#include "grsm/constellation.hpp"
#include "grsm/mapping.hpp"
#include "grsm/pn_model.hpp"
#include "grsm/random.hpp"

namespace grsm {

struct ReceivedVector {
  std::vector<cd> y;
  double noise_variance = 0.0;  // total complex variance per branch
};

enum class Compensation { None, SingleStage, DoubleStage };
enum class DetectionDomain { FullConstellation, Pool };

std::string_view to_string(Compensation c) noexcept;
Compensation parse_compensation(std::string_view text);

struct DetectorConfig {
  double threshold = 1.0;  // on z_k = 2|y_k|^2 / sigma^2
  Compensation compensation = Compensation::None;
  DetectionDomain domain = DetectionDomain::Pool;
};

/// y = sqrt(alpha) H_a Phi_tx B s x + n with the exact per-antenna rotation.
/// Noise draws are skipped when noise_variance is zero.
ReceivedVector transmit(const SpatialPattern& pattern, cd symbol, const ChannelRealization& ch,
                        const PnRealization& pn, double noise_variance, Rng& rng);

/// Normalized branch energies z_k = 2|y_k|^2 / sigma^2.
std::vector<double> branch_energies(const ReceivedVector& rx);

/// Threshold minimizing the prior-weighted spatial-bit error
///   (1-p) P(z > g | chi2_2) + p E_x[P(z < g | chi2_2(lambda_x))],
/// lambda_x = 2 alpha |x|^2 / sigma^2, by golden-section search on log g.
double energy_threshold(double noise_variance, const Constellation& c, double alpha,
                        double prior_active = 0.5);

/// Same objective, exposed for diagnostics: log of the weighted error at g.
double log_spatial_error(double threshold, double noise_variance, const Constellation& c,
                         double alpha, double prior_active);

/// One-bit decision per branch; an all-zero decision activates the branch with
/// the largest energy (first branch on ties).
SpatialPattern detect_spatial(const ReceivedVector& rx, double threshold);

/// e^{j rx_phase} * sum_k s_k y_k / (w_h * sqrt(alpha))
cd combine(std::span<const cd> y, const SpatialPattern& pattern, double rx_phase, double alpha);

/// Nearest candidate (lowest index on ties).
std::size_t ml_detect(cd y_c, std::span<const cd> candidates);

/// mod(delta + pi/2, pi) - pi/2 with mod in [0, pi).
double wrap_phase(double delta);

struct CompensatedDecision {
  unsigned selector = 0;     // index within the pool pair
  double phase_estimate = 0; // wrapped phase removed before the final decision
};

/// Tentative pool decision, wrapped phase error, derotation, re-decision.
CompensatedDecision single_stage_compensate(cd y_c, const Pool& pool);

/// Per-branch compensation before combining, then single-stage on the
/// combined signal (which picks up the receive-chain phase).
CompensatedDecision double_stage_compensate(const ReceivedVector& rx,
                                            const SpatialPattern& pattern, const Pool& pool,
                                            double rx_phase, double alpha);

/// Within-pool decision for the configured compensation mode.
unsigned detect_in_pool(const ReceivedVector& rx, const SpatialPattern& pattern, const Pool& pool,
                        Compensation mode, double rx_phase, double alpha);

}  // namespace grsm
