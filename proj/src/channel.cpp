#include "grsm/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>

namespace grsm {
namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kMaxCondition = 1e12;
constexpr int kMaxRedraws = 1000;
constexpr double kMaxZfResidual = 1e-10;

double deg2rad(double d) { return d * kPi / 180.0; }

// Half-wavelength ULA response, unit norm.
Eigen::VectorXcd steering(std::size_t n, double angle) {
  Eigen::VectorXcd a(static_cast<Eigen::Index>(n));
  const double k = kPi * std::sin(angle);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i)) = std::polar(norm, k * i);
  return a;
}

double laplacian(Rng& rng, double scale) {
  if (scale <= 0.0) return 0.0;
  std::exponential_distribution<double> ex(1.0 / scale);
  std::bernoulli_distribution sign(0.5);
  const double v = ex(rng);
  return sign(rng) ? v : -v;
}

cd complex_gaussian(Rng& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s;
  }
  const auto half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

std::string_view to_string(ChannelModel m) noexcept {
  return m == ChannelModel::RayleighIid ? "rayleigh_iid" : "saleh_valenzuela";
}

ChannelModel parse_channel_model(std::string_view text) {
  if (text == "saleh_valenzuela") return ChannelModel::SalehValenzuela;
  if (text == "rayleigh_iid") return ChannelModel::RayleighIid;
  throw std::invalid_argument("unknown channel model '" + std::string(text) +
                              "' (expected saleh_valenzuela|rayleigh_iid)");
}

void ChannelConfig::validate(std::size_t n_active) const {
  if (!(n_tx >= n_rx && n_rx >= n_active && n_active >= 1)) {
    throw std::invalid_argument(
        fmt::format("channel dimensions need n_tx >= n_rx >= N_a >= 1 (got {}, {}, {})", n_tx,
                    n_rx, n_active));
  }
  if (model == ChannelModel::SalehValenzuela && (n_clusters == 0 || n_rays_per_cluster == 0)) {
    throw std::invalid_argument("clustered channel needs at least one cluster and one ray");
  }
  if (!(angular_spread_deg >= 0.0) || !(cluster_angle_range_deg >= 0.0)) {
    throw std::invalid_argument("channel angles must be non-negative");
  }
}

Eigen::MatrixXcd sample_channel(const ChannelConfig& cfg, Rng& rng) {
  const auto nr = static_cast<Eigen::Index>(cfg.n_rx);
  const auto nt = static_cast<Eigen::Index>(cfg.n_tx);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nr, nt);

  if (cfg.model == ChannelModel::RayleighIid) {
    for (Eigen::Index c = 0; c < nt; ++c) {
      for (Eigen::Index r = 0; r < nr; ++r) h(r, c) = complex_gaussian(rng);
    }
    return h;
  }

  const double range = deg2rad(cfg.cluster_angle_range_deg);
  const double scale = deg2rad(cfg.angular_spread_deg) / std::sqrt(2.0);
  std::uniform_real_distribution<double> center(-range, range);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  const double n_paths = static_cast<double>(cfg.n_clusters * cfg.n_rays_per_cluster);
  const double gain = std::sqrt(static_cast<double>(cfg.n_tx * cfg.n_rx) / n_paths);

  for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
    const double aoa = center(rng);
    const double aod = center(rng);
    if (c == 0 && cfg.los_present) {
      // Specular path carrying the whole cluster's average power.
      const cd g = std::polar(std::sqrt(static_cast<double>(cfg.n_rays_per_cluster)), phase(rng));
      h.noalias() += g * steering(cfg.n_rx, aoa) * steering(cfg.n_tx, aod).adjoint();
      continue;
    }
    for (std::size_t r = 0; r < cfg.n_rays_per_cluster; ++r) {
      const double ra = aoa + laplacian(rng, scale);
      const double rd = aod + laplacian(rng, scale);
      const cd g = complex_gaussian(rng);
      h.noalias() += g * steering(cfg.n_rx, ra) * steering(cfg.n_tx, rd).adjoint();
    }
  }
  return gain * h;
}

std::vector<std::size_t> select_antennas(const Eigen::MatrixXcd& h, std::size_t n_active) {
  const auto nr = static_cast<std::size_t>(h.rows());
  if (n_active == 0 || n_active > nr) {
    throw std::invalid_argument("select_antennas: need 1 <= N_a <= N_r");
  }
  std::vector<double> norms(nr);
  for (std::size_t i = 0; i < nr; ++i) norms[i] = h.row(static_cast<Eigen::Index>(i)).norm();

  std::vector<std::size_t> chosen;
  std::vector<bool> taken(nr, false);
  std::size_t seed = 0;
  for (std::size_t i = 1; i < nr; ++i) {
    if (norms[i] > norms[seed]) seed = i;
  }
  chosen.push_back(seed);
  taken[seed] = true;

  const auto corr = [&](std::size_t a, std::size_t b) {
    const double denom = norms[a] * norms[b];
    if (denom == 0.0) return 1.0;
    const cd ip = h.row(static_cast<Eigen::Index>(a)).dot(h.row(static_cast<Eigen::Index>(b)));
    return std::abs(ip) / denom;
  };

  while (chosen.size() < n_active) {
    std::size_t best = nr;
    double best_score = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nr; ++i) {
      if (taken[i]) continue;
      double worst = 0.0;
      for (const auto s : chosen) worst = std::max(worst, corr(i, s));
      if (worst < best_score) {
        best_score = worst;
        best = i;
      }
    }
    chosen.push_back(best);
    taken[best] = true;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_active) {
  const Eigen::MatrixXcd gram = h_active * h_active.adjoint();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || smax / smin > kMaxCondition) {
    throw SingularChannel(fmt::format("H_a H_a^H is near-singular (condition {:.3g})",
                                      smin > 0.0 ? smax / smin : INFINITY));
  }
  // One refinement step keeps H_a B close to I for moderately conditioned H_a.
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(gram);
  const auto n = gram.rows();
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd x = lu.solve(eye);
  x += lu.solve(eye - gram * x);
  Eigen::MatrixXcd b = h_active.adjoint() * x;
  const double residual = (h_active * b - eye).cwiseAbs().maxCoeff();
  if (!(residual <= kMaxZfResidual)) {
    throw SingularChannel(fmt::format("zero-forcing residual {:.3g} too large", residual));
  }
  return b;
}

double inverse_trace_gain(const Eigen::MatrixXcd& h_active) {
  const Eigen::MatrixXcd gram = h_active * h_active.adjoint();
  return 1.0 / gram.inverse().trace().real();
}

namespace {

Eigen::MatrixXcd gather_rows(const Eigen::MatrixXcd& h, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(rows.size()), h.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = h.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

}  // namespace

ChannelRealization realize_channel(const ChannelConfig& cfg, std::size_t n_active, double alpha,
                                   Rng& rng, std::uint64_t& rejections) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    ChannelRealization ch;
    ch.h = sample_channel(cfg, rng);
    ch.selected = select_antennas(ch.h, n_active);
    const Eigen::MatrixXcd ha = gather_rows(ch.h, ch.selected);
    try {
      ch.precoder = zf_precoder(ha);
    } catch (const SingularChannel&) {
      ++rejections;
      continue;
    }
    ch.h_active = ha;
    ch.alpha = alpha;
    return ch;
  }
  throw SingularChannel("no well-conditioned channel after repeated redraws");
}

AlphaEstimate estimate_alpha(const ChannelConfig& cfg, std::size_t n_active,
                             std::size_t n_realizations, std::uint64_t seed) {
  if (n_realizations == 0) throw std::invalid_argument("estimate_alpha: need >= 1 realization");
  cfg.validate(n_active);
  AlphaEstimate est;
  std::vector<double> contrib(n_realizations);
  for (std::size_t i = 0; i < n_realizations; ++i) {
    auto rng = make_rng({seed, tag(StreamTag::Alpha), i});
    const auto ch = realize_channel(cfg, n_active, 1.0, rng, est.rejections);
    contrib[i] = inverse_trace_gain(ch.h_active);
  }
  est.alpha = pairwise_sum(contrib) / static_cast<double>(n_realizations);
  est.realizations = n_realizations;
  return est;
}

}  // namespace grsm
