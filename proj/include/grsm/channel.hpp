#pragma once

// Narrowband downlink channel: clustered (Saleh-Valenzuela style) ULA model or
// i.i.d. Rayleigh, receive-antenna selection, zero-forcing precoding and the
// ensemble power-normalization constant alpha.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "grsm/random.hpp"

namespace grsm {

enum class ChannelModel { SalehValenzuela, RayleighIid };

std::string_view to_string(ChannelModel m) noexcept;
ChannelModel parse_channel_model(std::string_view text);

struct ChannelConfig {
  std::size_t n_tx = 32;
  std::size_t n_rx = 8;
  ChannelModel model = ChannelModel::SalehValenzuela;
  std::size_t n_clusters = 5;
  std::size_t n_rays_per_cluster = 10;
  double angular_spread_deg = 7.5;
  double cluster_angle_range_deg = 60.0;  // cluster centers ~ U[-range, range]
  bool los_present = true;

  void validate(std::size_t n_active) const;
};

using MatrixXcdRowMajor = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>;

struct ChannelRealization {
  Eigen::MatrixXcd h;                 // N_r x N_t
  std::vector<std::size_t> selected;  // N_a ascending row indices of h
  MatrixXcdRowMajor h_active;         // N_a x N_t, rows contiguous
  Eigen::MatrixXcd precoder;          // N_t x N_a, columns contiguous
  double alpha = 1.0;
};

/// Thrown when H_a H_a^H is too ill-conditioned for zero forcing.
class SingularChannel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Eigen::MatrixXcd sample_channel(const ChannelConfig& cfg, Rng& rng);

/// Greedy selection of `n_active` weakly correlated rows: seed with the
/// largest-norm row, then add the row whose worst normalized correlation with
/// the selected set is smallest (lowest index on ties). Returned ascending.
std::vector<std::size_t> select_antennas(const Eigen::MatrixXcd& h, std::size_t n_active);

/// B = H_a^H (H_a H_a^H)^{-1}; throws SingularChannel above condition 1e12 or
/// when the computed max abs(H_a B - I) exceeds 1e-10.
Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_active);

/// [tr((H_a H_a^H)^{-1})]^{-1}
double inverse_trace_gain(const Eigen::MatrixXcd& h_active);

/// Samples channels until one passes ZF; `rejections` counts discarded draws.
ChannelRealization realize_channel(const ChannelConfig& cfg, std::size_t n_active, double alpha,
                                   Rng& rng, std::uint64_t& rejections);

struct AlphaEstimate {
  double alpha = 0.0;
  std::size_t realizations = 0;
  std::uint64_t rejections = 0;
};

/// Monte Carlo mean of inverse_trace_gain over independent (channel,
/// selection) draws; realization i uses its own stream derived from `seed`.
AlphaEstimate estimate_alpha(const ChannelConfig& cfg, std::size_t n_active,
                             std::size_t n_realizations, std::uint64_t seed);

}  // namespace grsm
