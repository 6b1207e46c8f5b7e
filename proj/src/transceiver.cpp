#include "grsm/transceiver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/non_central_chi_squared.hpp>

#include "grsm/kernels.hpp"

namespace grsm {
namespace {

constexpr double kPi = std::numbers::pi;

double log_sum_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// log Q(x) for the standard normal upper tail, stable for large x.
double log_normal_tail(double x) {
  if (x < 5.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
  const double x2 = x * x;
  return -0.5 * x2 - std::log(x * std::sqrt(2.0 * kPi)) + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

// log P(z < g) for z ~ noncentral chi2 with 2 dof and noncentrality lambda.
double log_miss(double g, double lambda) {
  if (lambda <= 0.0) return std::log1p(-std::exp(-0.5 * g));
  const boost::math::non_central_chi_squared_distribution<double> dist(2.0, lambda);
  const double p = boost::math::cdf(dist, g);
  if (p > 1e-290) return std::log(p);
  // Rician lower tail: P(|u| < t) ~ sqrt(t/nu) Q(nu - t) for nu - t >> 1.
  const double t = std::sqrt(g);
  const double nu = std::sqrt(lambda);
  return 0.5 * std::log(t / nu) + log_normal_tail(nu - t);
}

}  // namespace

std::string_view to_string(Compensation c) noexcept {
  switch (c) {
    case Compensation::None:
      return "none";
    case Compensation::SingleStage:
      return "single";
    case Compensation::DoubleStage:
      return "double";
  }
  return "?";
}

Compensation parse_compensation(std::string_view text) {
  if (text == "none") return Compensation::None;
  if (text == "single") return Compensation::SingleStage;
  if (text == "double") return Compensation::DoubleStage;
  throw std::invalid_argument("unknown compensation '" + std::string(text) +
                              "' (expected none|single|double)");
}

ReceivedVector transmit(const SpatialPattern& pattern, cd symbol, const ChannelRealization& ch,
                        const PnRealization& pn, double noise_variance, Rng& rng) {
  const auto n_tx = static_cast<std::size_t>(ch.precoder.rows());
  const auto n_active = static_cast<std::size_t>(ch.precoder.cols());
  if (pattern.width() != n_active || pn.tx_phases.size() != n_tx) {
    throw std::invalid_argument("transmit: inconsistent dimensions");
  }

  std::vector<cd> precoded(n_tx, cd{0.0, 0.0});
  for (unsigned k = 0; k < n_active; ++k) {
    if (!pattern.active(k)) continue;
    const cd* col = ch.precoder.col(static_cast<Eigen::Index>(k)).data();
    for (std::size_t t = 0; t < n_tx; ++t) precoded[t] += col[t] * symbol;
  }
  std::vector<cd> rotation(n_tx);
  for (std::size_t t = 0; t < n_tx; ++t) rotation[t] = std::polar(1.0, pn.tx_phases[t]);
  kernels::complex_multiply(rotation, precoded, precoded);

  ReceivedVector rx;
  rx.noise_variance = noise_variance;
  rx.y.resize(n_active);
  const double amp = std::sqrt(ch.alpha);
  const cd* rows = ch.h_active.data();
  for (std::size_t k = 0; k < n_active; ++k) {
    rx.y[k] = amp * kernels::complex_dot({rows + k * n_tx, n_tx}, precoded);
  }
  if (noise_variance > 0.0) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5 * noise_variance));
    for (auto& v : rx.y) {
      const double re = g(rng);
      const double im = g(rng);
      v += cd{re, im};
    }
  }
  return rx;
}

std::vector<double> branch_energies(const ReceivedVector& rx) {
  if (!(rx.noise_variance > 0.0)) {
    throw std::domain_error("branch energies need a positive noise variance");
  }
  std::vector<double> z(rx.y.size());
  kernels::scaled_energy(rx.y, 2.0 / rx.noise_variance, z);
  return z;
}

double log_spatial_error(double threshold, double noise_variance, const Constellation& c,
                         double alpha, double prior_active) {
  const double log_fa = std::log1p(-prior_active) - 0.5 * threshold;
  // Points sharing a magnitude share lambda; average over points.
  std::vector<std::pair<double, std::size_t>> mags;
  for (const auto& x : c.points) {
    const double e = std::norm(x);
    auto it = std::find_if(mags.begin(), mags.end(), [&](const auto& m) { return m.first == e; });
    if (it == mags.end()) {
      mags.emplace_back(e, 1);
    } else {
      ++it->second;
    }
  }
  double log_md = -INFINITY;
  for (const auto& [energy, count] : mags) {
    const double lambda = 2.0 * alpha * energy / noise_variance;
    log_md = log_sum_exp(log_md, std::log(static_cast<double>(count)) + log_miss(threshold, lambda));
  }
  log_md += std::log(prior_active) - std::log(static_cast<double>(c.points.size()));
  return log_sum_exp(log_fa, log_md);
}

double energy_threshold(double noise_variance, const Constellation& c, double alpha,
                        double prior_active) {
  if (!(noise_variance > 0.0) || !std::isfinite(noise_variance)) {
    throw std::domain_error("energy_threshold: noise variance must be positive and finite");
  }
  if (!(prior_active > 0.0 && prior_active < 1.0)) {
    throw std::domain_error("energy_threshold: prior must lie in (0, 1)");
  }
  double lambda_max = 0.0;
  for (const auto& x : c.points) lambda_max = std::max(lambda_max, 2.0 * alpha * std::norm(x) / noise_variance);

  const auto objective = [&](double log_g) {
    return log_spatial_error(std::exp(log_g), noise_variance, c, alpha, prior_active);
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(1e-6);
  double hi = std::log(2.0 * lambda_max + 100.0);
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  // 1e-6 relative on g is 1e-6 absolute on log g.
  while (hi - lo > 1e-6) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = objective(x2);
    }
  }
  return std::exp(0.5 * (lo + hi));
}

SpatialPattern detect_spatial(const ReceivedVector& rx, double threshold) {
  const auto z = branch_energies(rx);
  const auto width = static_cast<unsigned>(z.size());
  std::uint32_t decimal = 0;
  for (unsigned k = 0; k < width; ++k) {
    if (z[k] >= threshold) decimal |= 1u << (width - 1 - k);
  }
  if (decimal == 0) {
    const auto k = static_cast<unsigned>(std::max_element(z.begin(), z.end()) - z.begin());
    decimal = 1u << (width - 1 - k);
  }
  return SpatialPattern(decimal, width);
}

cd combine(std::span<const cd> y, const SpatialPattern& pattern, double rx_phase, double alpha) {
  cd sum{0.0, 0.0};
  unsigned count = 0;
  for (unsigned k = 0; k < pattern.width(); ++k) {
    if (pattern.active(k)) {
      sum += y[k];
      ++count;
    }
  }
  const double denom = static_cast<double>(std::max(count, 1u)) * std::sqrt(alpha);
  return std::polar(1.0, rx_phase) * sum / denom;
}

std::size_t ml_detect(cd y_c, std::span<const cd> candidates) {
  if (candidates.empty()) throw std::invalid_argument("ml_detect: no candidates");
  return kernels::nearest_point(y_c, candidates);
}

double wrap_phase(double delta) {
  const double shifted = delta + kPi / 2.0;
  double m = shifted - kPi * std::floor(shifted / kPi);
  if (m >= kPi || m < 0.0) m = 0.0;
  return m - kPi / 2.0;
}

CompensatedDecision single_stage_compensate(cd y_c, const Pool& pool) {
  const std::array<cd, 2> pair{pool.first, pool.second};
  const auto tentative = ml_detect(y_c, pair);
  const double dphi = wrap_phase(std::arg(y_c) - std::arg(pair[tentative]));
  const cd derotated = y_c * std::polar(1.0, -dphi);
  return {static_cast<unsigned>(ml_detect(derotated, pair)), dphi};
}

CompensatedDecision double_stage_compensate(const ReceivedVector& rx,
                                            const SpatialPattern& pattern, const Pool& pool,
                                            double rx_phase, double alpha) {
  const std::array<cd, 2> pair{pool.first, pool.second};
  const double inv_amp = 1.0 / std::sqrt(alpha);
  std::vector<cd> aligned = rx.y;
  for (unsigned k = 0; k < pattern.width(); ++k) {
    if (!pattern.active(k)) continue;
    const cd u = aligned[k] * inv_amp;
    const auto tentative = ml_detect(u, pair);
    const double dphi = wrap_phase(std::arg(u) - std::arg(pair[tentative]));
    aligned[k] *= std::polar(1.0, -dphi);
  }
  return single_stage_compensate(combine(aligned, pattern, rx_phase, alpha), pool);
}

unsigned detect_in_pool(const ReceivedVector& rx, const SpatialPattern& pattern, const Pool& pool,
                        Compensation mode, double rx_phase, double alpha) {
  switch (mode) {
    case Compensation::None: {
      const std::array<cd, 2> pair{pool.first, pool.second};
      return static_cast<unsigned>(ml_detect(combine(rx.y, pattern, rx_phase, alpha), pair));
    }
    case Compensation::SingleStage:
      return single_stage_compensate(combine(rx.y, pattern, rx_phase, alpha), pool).selector;
    case Compensation::DoubleStage:
      return double_stage_compensate(rx, pattern, pool, rx_phase, alpha).selector;
  }
  return 0;
}

}  // namespace grsm
