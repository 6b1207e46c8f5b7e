#include "grsm/sim.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

namespace grsm {

std::string_view to_string(MappingMode m) noexcept {
  return m == MappingMode::Epn ? "epn" : "classical";
}

MappingMode parse_mapping_mode(std::string_view text) {
  if (text == "classical") return MappingMode::Classical;
  if (text == "epn") return MappingMode::Epn;
  throw std::invalid_argument("unknown mapping mode '" + std::string(text) +
                              "' (expected classical|epn)");
}

unsigned SimConfig::bits_per_symbol() const {
  return static_cast<unsigned>(std::countr_zero(modulation));
}

unsigned SimConfig::n_active() const { return spectral_efficiency - bits_per_symbol(); }

void SimConfig::validate() const {
  if (modulation < 4 || !std::has_single_bit(modulation) ||
      std::countr_zero(modulation) % 2 != 0) {
    throw std::invalid_argument(fmt::format("system.modulation: unsupported order {}", modulation));
  }
  if (spectral_efficiency <= bits_per_symbol()) {
    throw std::invalid_argument(
        "system.spectral_efficiency: must exceed log2(M) so that N_a >= 1");
  }
  if (mapping_mode == MappingMode::Classical && compensation != Compensation::None) {
    throw std::invalid_argument(
        "detector.compensation: pool-based compensation requires mapping_mode 'epn'");
  }
  if (mapping_mode == MappingMode::Epn && modulation != 4 && modulation != 16) {
    throw std::invalid_argument("system.modulation: pool mapping supports M = 4 or 16");
  }
  channel.validate(n_active());
  pn.validate();
  if (!(prior_active > 0.0 && prior_active < 1.0)) {
    throw std::invalid_argument("detector.prior_active: must lie in (0, 1)");
  }
  if (snr_db.empty()) throw std::invalid_argument("sweep.snr_db: needs at least one point");
  for (const double s : snr_db) {
    if (std::isnan(s) || s == -INFINITY) {
      throw std::invalid_argument("sweep.snr_db: values must be finite or +inf (noiseless)");
    }
  }
  if (channel_redraw_period == 0) {
    throw std::invalid_argument("sweep.channel_redraw_period: must be >= 1");
  }
  if (alpha_realizations == 0 && !alpha_override) {
    throw std::invalid_argument("channel.alpha_realizations: must be >= 1");
  }
  if (alpha_override && !(*alpha_override > 0.0)) {
    throw std::invalid_argument("alpha override must be positive");
  }
}

double noise_variance_for(double snr_db, double symbol_energy, unsigned bits_per_symbol) {
  const double snr = std::pow(10.0, snr_db / 10.0);
  return symbol_energy / (snr * static_cast<double>(bits_per_symbol));
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  trials += o.trials;
  spatial_bits += o.spatial_bits;
  spatial_errors += o.spatial_errors;
  mqam_bits += o.mqam_bits;
  mqam_errors += o.mqam_errors;
  return *this;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(num) / static_cast<double>(den);
}

// Trial-local streams, one per purpose, so that runs differing only in the
// phase-noise setting see identical bits and thermal noise.
enum class TrialStream : std::uint64_t { Bits = 1, PhaseNoise = 2, Noise = 3 };

Rng trial_rng(const PointContext& ctx, std::uint64_t trial, TrialStream s) {
  return make_rng({ctx.cfg->master_seed, tag(StreamTag::Trial), ctx.snr_index, trial,
                   static_cast<std::uint64_t>(s)});
}

}  // namespace

double BerRecord::ber_overall() const { return ratio(counts.errors(), counts.bits()); }
double BerRecord::ber_spatial() const { return ratio(counts.spatial_errors, counts.spatial_bits); }
double BerRecord::ber_mqam() const { return ratio(counts.mqam_errors, counts.mqam_bits); }

PointContext make_point_context(const SimConfig& cfg, std::size_t snr_index, double alpha) {
  PointContext ctx;
  ctx.cfg = &cfg;
  ctx.constellation = build_mqam(cfg.modulation);
  if (cfg.mapping_mode == MappingMode::Epn) {
    ctx.pools = build_pools(ctx.constellation);
    ctx.table = build_mapping_table(ctx.constellation, cfg.n_active(), ctx.pools);
  }
  ctx.snr_index = snr_index;
  ctx.alpha = alpha;
  ctx.noise_variance = noise_variance_for(cfg.snr_db.at(snr_index), ctx.constellation.symbol_energy,
                                          ctx.constellation.bits_per_symbol);
  // A noiseless point still needs a scale for z_k; borrow the 60 dB one.
  ctx.detection_variance = ctx.noise_variance > 0.0
                               ? ctx.noise_variance
                               : noise_variance_for(60.0, ctx.constellation.symbol_energy,
                                                    ctx.constellation.bits_per_symbol);
  ctx.threshold =
      energy_threshold(ctx.detection_variance, ctx.constellation, alpha, cfg.prior_active);
  return ctx;
}

ErrorCounts run_trial(const PointContext& ctx, const ChannelRealization& ch,
                      std::uint64_t trial_index) {
  const SimConfig& cfg = *ctx.cfg;
  const auto& c = ctx.constellation;
  const unsigned na = cfg.n_active();
  const unsigned m = c.bits_per_symbol;

  auto bits_rng = trial_rng(ctx, trial_index, TrialStream::Bits);
  auto pn_rng = trial_rng(ctx, trial_index, TrialStream::PhaseNoise);
  auto noise_rng = trial_rng(ctx, trial_index, TrialStream::Noise);

  std::uniform_int_distribution<std::uint32_t> mqam_word(0, (1u << m) - 1);
  const std::uint32_t mqam_bits = mqam_word(bits_rng);

  MappedSymbol sent;
  if (cfg.mapping_mode == MappingMode::Classical) {
    std::uniform_int_distribution<std::uint32_t> spatial_word(0, (1u << na) - 1);
    std::uint32_t spatial = 0;
    while (spatial == 0) spatial = spatial_word(bits_rng);
    auto bits = to_bits(spatial, na);
    const auto sym = to_bits(mqam_bits, m);
    bits.insert(bits.end(), sym.begin(), sym.end());
    sent = classical_map(bits, na, c);
  } else {
    sent = epn_map(to_bits(mqam_bits, m), *ctx.table, bits_rng);
  }

  const auto pn = sample_pn(cfg.pn, ch.h_active.cols(), pn_rng);
  auto rx = transmit(sent.pattern, sent.symbol, ch, pn, ctx.noise_variance, noise_rng);
  rx.noise_variance = ctx.detection_variance;
  const auto detected = detect_spatial(rx, ctx.threshold);

  std::uint32_t mqam_hat = 0;
  if (cfg.mapping_mode == MappingMode::Classical) {
    const cd yc = combine(rx.y, detected, pn.rx_phase, ctx.alpha);
    mqam_hat = c.labels[ml_detect(yc, c.points)];
  } else {
    const auto pool = epn_pool_for(detected, *ctx.table);
    const auto& pm = ctx.table->pools[pool];
    const unsigned sel =
        detect_in_pool(rx, detected, pm.pool, cfg.compensation, pn.rx_phase, ctx.alpha);
    mqam_hat = (pm.bit_prefix << 1) | sel;
  }

  ErrorCounts out;
  out.trials = 1;
  out.spatial_bits = na;
  out.spatial_errors = spatial_bit_error_count(sent.pattern, detected);
  out.mqam_bits = m;
  out.mqam_errors = static_cast<unsigned>(std::popcount(mqam_bits ^ mqam_hat));
  return out;
}

ChannelRealization block_channel(const SimConfig& cfg, double alpha, std::uint64_t block_index,
                                 std::uint64_t& rejections) {
  auto rng = make_rng({cfg.master_seed, tag(StreamTag::Channel), block_index});
  return realize_channel(cfg.channel, cfg.n_active(), alpha, rng, rejections);
}

AlphaEstimate sweep_alpha(const SimConfig& cfg) {
  if (cfg.alpha_override) return {*cfg.alpha_override, 0, 0};
  return estimate_alpha(cfg.channel, cfg.n_active(), cfg.alpha_realizations,
                        derive_seed({cfg.master_seed, tag(StreamTag::Alpha)}));
}

namespace {

struct BlockResult {
  ErrorCounts counts;
  std::uint64_t rejections = 0;
};

BlockResult run_block(const PointContext& ctx, std::uint64_t block, std::uint64_t trial_cap) {
  const auto& cfg = *ctx.cfg;
  BlockResult r;
  const auto ch = block_channel(cfg, ctx.alpha, block, r.rejections);
  const std::uint64_t first = block * cfg.channel_redraw_period;
  const std::uint64_t last = std::min(first + cfg.channel_redraw_period, trial_cap);
  for (std::uint64_t t = first; t < last; ++t) r.counts += run_trial(ctx, ch, t);
  return r;
}

// Runs blocks [begin, end) on `threads` workers; results land in block order.
std::vector<BlockResult> run_blocks(const PointContext& ctx, std::uint64_t begin,
                                    std::uint64_t end, std::uint64_t trial_cap,
                                    unsigned threads) {
  std::vector<BlockResult> results(end - begin);
  std::atomic<std::uint64_t> next{begin};
  const auto worker = [&] {
    for (;;) {
      const auto b = next.fetch_add(1);
      if (b >= end) break;
      results[b - begin] = run_block(ctx, b, trial_cap);
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(end - begin)));
  if (n == 1) {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  pool.clear();
  return results;
}

}  // namespace

SweepResult run_sweep(const SimConfig& cfg, const SweepOptions& opts) {
  cfg.validate();
  SweepResult result;
  const auto alpha = sweep_alpha(cfg);
  result.alpha = alpha.alpha;
  result.alpha_rejections = alpha.rejections;

  const std::uint64_t period = cfg.channel_redraw_period;
  const std::uint64_t cap = cfg.trials_per_point;
  const std::uint64_t total_blocks = (cap + period - 1) / period;
  // Early-stop checks happen on fixed round boundaries so that the stopping
  // point does not depend on the number of threads.
  const std::uint64_t round_blocks = std::max<std::uint64_t>(1, 1000 / period);

  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto ctx = make_point_context(cfg, i, alpha.alpha);
    BerRecord rec;
    rec.snr_db = cfg.snr_db[i];
    for (std::uint64_t b = 0; b < total_blocks; b += round_blocks) {
      if (opts.cancel != nullptr && opts.cancel->load()) {
        result.interrupted = true;
        break;
      }
      const auto end = std::min(total_blocks, b + round_blocks);
      for (const auto& r : run_blocks(ctx, b, end, cap, opts.threads)) {
        rec.counts += r.counts;
        rec.channel_rejections += r.rejections;
      }
      if (cfg.target_errors > 0 && rec.counts.errors() >= cfg.target_errors) break;
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rec.counts.trials > 0 || !result.interrupted) result.records.push_back(rec);
    if (result.interrupted) break;
  }
  return result;
}

}  // namespace grsm
