#pragma once

// Monte Carlo BER harness. Trials are grouped in blocks that share one channel
// realization; every random stream is derived from (master seed, indices) so
// the counts do not depend on thread count or scheduling.

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grsm/channel.hpp"
#include "grsm/constellation.hpp"
#include "grsm/mapping.hpp"
#include "grsm/pn_model.hpp"
#include "grsm/transceiver.hpp"

namespace grsm {

enum class MappingMode { Classical, Epn };

std::string_view to_string(MappingMode m) noexcept;
MappingMode parse_mapping_mode(std::string_view text);

struct SimConfig {
  unsigned modulation = 16;
  MappingMode mapping_mode = MappingMode::Classical;
  unsigned spectral_efficiency = 8;
  ChannelConfig channel;
  PnConfig pn;
  Compensation compensation = Compensation::None;
  double prior_active = 0.5;
  std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30, 35, 40};
  std::uint64_t trials_per_point = 100000;  // cap
  std::uint64_t target_errors = 100;        // early stop once reached; 0 runs the cap
  std::uint64_t channel_redraw_period = 100;
  std::uint64_t master_seed = 1;
  std::uint64_t alpha_realizations = 10000;
  std::optional<double> alpha_override;  // skip estimation (tests)

  unsigned bits_per_symbol() const;
  unsigned n_active() const;  // spectral_efficiency - log2(M)
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// sigma^2 = Es / (SNR_linear * log2 M)
double noise_variance_for(double snr_db, double symbol_energy, unsigned bits_per_symbol);

struct ErrorCounts {
  std::uint64_t trials = 0;
  std::uint64_t spatial_bits = 0;
  std::uint64_t spatial_errors = 0;
  std::uint64_t mqam_bits = 0;
  std::uint64_t mqam_errors = 0;

  ErrorCounts& operator+=(const ErrorCounts& o);
  std::uint64_t bits() const { return spatial_bits + mqam_bits; }
  std::uint64_t errors() const { return spatial_errors + mqam_errors; }
  friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

struct BerRecord {
  double snr_db = 0.0;
  ErrorCounts counts;
  std::uint64_t channel_rejections = 0;
  double wall_time_s = 0.0;

  std::uint64_t bits_total() const { return counts.bits(); }
  std::uint64_t bit_errors() const { return counts.errors(); }
  double ber_overall() const;
  double ber_spatial() const;
  double ber_mqam() const;
};

/// Per-SNR-point state shared by every trial of that point.
struct PointContext {
  const SimConfig* cfg = nullptr;
  Constellation constellation;
  std::vector<Pool> pools;
  std::optional<MappingTable> table;
  std::size_t snr_index = 0;
  double noise_variance = 0.0;      // 0 at snr_db = +inf
  double detection_variance = 0.0;  // normalizes z_k; equals noise_variance unless noiseless
  double threshold = 0.0;
  double alpha = 1.0;
};

/// `alpha` is the ensemble normalization for cfg's channel.
PointContext make_point_context(const SimConfig& cfg, std::size_t snr_index, double alpha);

/// One symbol slot: fresh bits, mapping, phase noise, noise, detection, demapping.
ErrorCounts run_trial(const PointContext& ctx, const ChannelRealization& ch,
                      std::uint64_t trial_index);

/// Channel realization used by block `block_index` (shared by all SNR points).
ChannelRealization block_channel(const SimConfig& cfg, double alpha, std::uint64_t block_index,
                                 std::uint64_t& rejections);

struct SweepResult {
  std::vector<BerRecord> records;
  double alpha = 0.0;
  std::uint64_t alpha_rejections = 0;
  bool interrupted = false;
};

struct SweepOptions {
  unsigned threads = 1;
  const std::atomic<bool>* cancel = nullptr;  // checked between rounds
};

SweepResult run_sweep(const SimConfig& cfg, const SweepOptions& opts = {});

/// Alpha used by a sweep (override, or a seeded Monte Carlo estimate).
AlphaEstimate sweep_alpha(const SimConfig& cfg);

}  // namespace grsm
