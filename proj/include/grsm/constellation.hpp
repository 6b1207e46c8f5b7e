#pragma once

// Square MQAM constellations on the odd-integer lattice, their phase-noise
// sensitivity and the pi-separated two-symbol pools used by pool detection.

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace grsm {

using cd = std::complex<double>;

struct Constellation {
  unsigned order = 0;            // M
  unsigned bits_per_symbol = 0;  // m = log2(M)
  std::vector<cd> points;
  std::vector<std::uint32_t> labels;  // Gray label of points[i], MSB = first bit
  double symbol_energy = 0.0;

  /// Index of the point carrying `label`.
  std::size_t index_of_label(std::uint32_t label) const;
  /// Index of `point` (exact lattice match); throws if absent.
  std::size_t index_of_point(cd point) const;
};

/// M in {4, 16, 64, ...}: points {+-1, +-3, ...}^2 with per-axis Gray labels.
Constellation build_mqam(unsigned order);

struct SensitivityReport {
  double eps_re = 0.0;  // percent
  double eps_im = 0.0;  // percent
};

/// Relative first-order distortion of the real/imaginary parts of `x` under a
/// phase error `phi`, reported as magnitudes in percent.
SensitivityReport pn_sensitivity(cd x, double phi);

/// First-order rotation model |x|(cos t - phi sin t) + j|x|(sin t + phi cos t).
cd first_order_rotation(cd x, double phi);

enum class Sensitivity { Robust, Sensitive, Uniform };

char sensitivity_code(Sensitivity s) noexcept;  // 'R', 'S', 'U'

/// Per-point class. Every point of 4QAM is Uniform; otherwise a point is
/// Robust iff |Re| == |Im|.
std::vector<Sensitivity> classify_symbols(const Constellation& c);

/// |a - b| folded into [0, pi].
double angular_separation(double theta1, double theta2);

/// Closed-form overlap of two N(theta_i, variance) phase densities.
double overlap_probability(double theta1, double theta2, double variance);

/// Same quantity by adaptive Gauss-Kronrod quadrature of the density product
/// over +-12 sigma around the midpoint. `tol` is the relative error target;
/// throws std::runtime_error when the estimate does not meet it.
double overlap_probability_numeric(double theta1, double theta2, double variance,
                                   double tol = 1e-12);

struct Pool {
  unsigned index = 0;
  cd first;
  cd second;
  Sensitivity sensitivity = Sensitivity::Uniform;

  cd symbol(unsigned selector) const { return selector == 0 ? first : second; }
};

/// Two-symbol pools, pi apart and within one sensitivity class. 4QAM and
/// 16QAM follow the reference pool order (bit prefix = pool index); larger
/// orders list robust pools first, then by magnitude and angle. Throws
/// std::invalid_argument when no such pairing exists.
std::vector<Pool> build_pools(const Constellation& c);

std::string format_symbol(cd x);

}  // namespace grsm
