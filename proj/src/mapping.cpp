#include "grsm/mapping.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace grsm {

SpatialPattern::SpatialPattern(std::uint32_t decimal, unsigned width)
    : decimal_(decimal), width_(width) {
  if (width == 0 || width > 31 || decimal >= (1u << width)) {
    throw std::invalid_argument(fmt::format("pattern {} does not fit in {} bits", decimal, width));
  }
}

SpatialPattern SpatialPattern::from_bits(const std::vector<bool>& bits) {
  return SpatialPattern(grsm::from_bits(bits), static_cast<unsigned>(bits.size()));
}

unsigned SpatialPattern::weight() const noexcept { return std::popcount(decimal_); }

std::vector<bool> SpatialPattern::bits() const { return to_bits(decimal_, width_); }

std::vector<bool> to_bits(std::uint32_t value, unsigned width) {
  std::vector<bool> out(width);
  for (unsigned k = 0; k < width; ++k) out[k] = (value >> (width - 1 - k)) & 1u;
  return out;
}

std::uint32_t from_bits(const std::vector<bool>& bits) {
  std::uint32_t v = 0;
  for (const bool b : bits) v = (v << 1) | (b ? 1u : 0u);
  return v;
}

namespace {

std::uint32_t bit_range(const std::vector<bool>& bits, std::size_t begin, std::size_t end) {
  std::uint32_t v = 0;
  for (std::size_t i = begin; i < end; ++i) v = (v << 1) | (bits[i] ? 1u : 0u);
  return v;
}

}  // namespace

unsigned hamming_weight(std::uint32_t decimal, unsigned width) {
  if (width < 32 && decimal >= (1u << width)) {
    throw std::invalid_argument("hamming_weight: index exceeds width");
  }
  return std::popcount(decimal);
}

unsigned spatial_bit_error_count(const SpatialPattern& sent, const SpatialPattern& detected) {
  if (sent.width() != detected.width()) {
    throw std::invalid_argument("spatial_bit_error_count: width mismatch");
  }
  return std::popcount(sent.decimal() ^ detected.decimal());
}

std::optional<std::size_t> MappingTable::pool_for(std::uint32_t decimal) const {
  if (decimal >= pool_of_index.size() || pool_of_index[decimal] < 0) return std::nullopt;
  return static_cast<std::size_t>(pool_of_index[decimal]);
}

namespace {

std::vector<std::uint32_t> indices_with_weights(unsigned width, const std::vector<unsigned>& w) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t j = 1; j < (1u << width); ++j) {
    if (std::find(w.begin(), w.end(), static_cast<unsigned>(std::popcount(j))) != w.end()) {
      out.push_back(j);
    }
  }
  return out;
}

std::vector<unsigned> weights_of(const std::vector<std::uint32_t>& js) {
  std::vector<unsigned> w;
  for (const auto j : js) w.push_back(std::popcount(j));
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());
  return w;
}

// Splits `items` into `parts` contiguous, nonempty, near-equal chunks.
std::vector<std::vector<std::uint32_t>> chunk(const std::vector<std::uint32_t>& items,
                                              std::size_t parts) {
  std::vector<std::vector<std::uint32_t>> out(parts);
  const std::size_t base = items.size() / parts;
  const std::size_t extra = items.size() % parts;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    out[p].assign(items.begin() + static_cast<long>(pos), items.begin() + static_cast<long>(pos + len));
    pos += len;
  }
  return out;
}

}  // namespace

MappingTable build_mapping_table(const Constellation& c, unsigned n_active,
                                 const std::vector<Pool>& pools) {
  if (n_active == 0 || n_active > 20) {
    throw std::invalid_argument("mapping table: N_a must be in [1, 20]");
  }
  const std::size_t n_indices = (std::size_t{1} << n_active) - 1;
  if (pools.size() != c.order / 2) {
    throw std::invalid_argument("mapping table: expected M/2 pools");
  }
  if (n_indices < pools.size()) {
    throw std::invalid_argument(fmt::format(
        "mapping table infeasible: {} nonzero patterns for {} pools (M={}, N_a={})", n_indices,
        pools.size(), c.order, n_active));
  }

  MappingTable t;
  t.order = c.order;
  t.bits_per_symbol = c.bits_per_symbol;
  t.n_active = n_active;
  std::vector<std::vector<std::uint32_t>> sets;

  if (c.order == 16 && n_active == 4) {
    sets = {{1, 2}, {4, 8}, {3, 5, 6}, {9, 10, 12}, {7, 13}, {11}, {14}, {15}};
  } else if (c.order == 4 && n_active == 6) {
    t.weight_rule_form = true;
    sets = {indices_with_weights(6, {1, 2, 3}), indices_with_weights(6, {4, 5, 6})};
  } else {
    std::vector<std::uint32_t> all;
    for (std::uint32_t j = 1; j <= n_indices; ++j) all.push_back(j);
    std::stable_sort(all.begin(), all.end(), [](auto a, auto b) {
      return std::popcount(a) < std::popcount(b);
    });
    std::size_t n_low = 0;
    for (const auto& p : pools) n_low += p.sensitivity == Sensitivity::Robust ? 1 : 0;
    if (n_low == 0) n_low = (pools.size() + 1) / 2;
    const std::size_t n_high = pools.size() - n_low;
    std::size_t boundary = std::clamp(all.size() / 2, n_low, all.size() - n_high);
    if (n_high == 0) boundary = all.size();
    const std::vector<std::uint32_t> low(all.begin(), all.begin() + static_cast<long>(boundary));
    const std::vector<std::uint32_t> high(all.begin() + static_cast<long>(boundary), all.end());
    // Robust pools come first in every pool ordering we build.
    for (auto& s : chunk(low, n_low)) sets.push_back(std::move(s));
    if (n_high > 0) {
      for (auto& s : chunk(high, n_high)) sets.push_back(std::move(s));
    }
  }

  t.pool_of_index.assign(n_indices + 1, -1);
  for (std::size_t p = 0; p < pools.size(); ++p) {
    auto allowed = sets[p];
    std::sort(allowed.begin(), allowed.end());
    for (const auto j : allowed) {
      if (t.pool_of_index[j] != -1) throw std::logic_error("mapping table: overlapping sets");
      t.pool_of_index[j] = static_cast<int>(p);
    }
    t.pools.push_back({pools[p], static_cast<std::uint32_t>(p), allowed, weights_of(allowed)});
  }
  return t;
}

MappedSymbol classical_map(const std::vector<bool>& bits, unsigned n_active, const Constellation& c) {
  if (bits.size() != n_active + c.bits_per_symbol) {
    throw std::invalid_argument("classical_map: expected N_a + m bits");
  }
  const auto spatial = bit_range(bits, 0, n_active);
  if (spatial == 0) {
    throw std::invalid_argument("classical_map: the all-zero spatial pattern is excluded");
  }
  const auto label = bit_range(bits, n_active, bits.size());
  const auto idx = c.index_of_label(label);
  return {SpatialPattern(spatial, n_active), c.points[idx], 0, 0};
}

std::vector<bool> classical_demap(const SpatialPattern& pattern, std::size_t symbol_index,
                                  const Constellation& c) {
  auto out = pattern.bits();
  const auto sym = to_bits(c.labels.at(symbol_index), c.bits_per_symbol);
  out.insert(out.end(), sym.begin(), sym.end());
  return out;
}

MappedSymbol epn_map(const std::vector<bool>& bits, const MappingTable& table, Rng& rng) {
  if (bits.size() != table.bits_per_symbol) {
    throw std::invalid_argument("epn_map: expected m bits");
  }
  const auto prefix = bit_range(bits, 0, bits.size() - 1);
  const unsigned selector = bits.back() ? 1u : 0u;
  const auto& pm = table.pools.at(prefix);
  std::uniform_int_distribution<std::size_t> pick(0, pm.allowed.size() - 1);
  const auto j = pm.allowed[pick(rng)];
  return {SpatialPattern(j, table.n_active), pm.pool.symbol(selector), prefix, selector};
}

std::size_t epn_pool_for(const SpatialPattern& detected, const MappingTable& table) {
  if (const auto p = table.pool_for(detected.decimal())) return *p;
  std::size_t best_pool = 0;
  unsigned best_dist = std::numeric_limits<unsigned>::max();
  for (std::uint32_t j = 1; j < table.pool_of_index.size(); ++j) {
    if (table.pool_of_index[j] < 0) continue;
    const auto d = static_cast<unsigned>(std::popcount(j ^ detected.decimal()));
    if (d < best_dist) {
      best_dist = d;
      best_pool = static_cast<std::size_t>(table.pool_of_index[j]);
    }
  }
  return best_pool;
}

std::vector<bool> epn_demap(const SpatialPattern& detected, unsigned selector,
                            const MappingTable& table) {
  const auto pool = epn_pool_for(detected, table);
  auto out = to_bits(table.pools[pool].bit_prefix, table.bits_per_symbol - 1);
  out.push_back(selector != 0);
  return out;
}

}  // namespace grsm
