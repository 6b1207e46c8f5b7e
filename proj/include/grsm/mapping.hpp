#pragma once

// Bit-to-signal mappings: the classical split (spatial bits | Gray MQAM bits)
// and the pool-driven mapping in which the MQAM bit prefix picks a pool and
// the spatial pattern is drawn from a Hamming-weight class tied to that pool.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grsm/constellation.hpp"
#include "grsm/random.hpp"

namespace grsm {

/// Receive-antenna activation pattern. Bit k of the pattern (branch k,
/// k = 0 is the first branch) is the (width-1-k)-th bit of the decimal index,
/// i.e. the first branch is the most significant bit.
class SpatialPattern {
 public:
  SpatialPattern() = default;
  SpatialPattern(std::uint32_t decimal, unsigned width);
  static SpatialPattern from_bits(const std::vector<bool>& bits);

  std::uint32_t decimal() const noexcept { return decimal_; }
  unsigned width() const noexcept { return width_; }
  unsigned weight() const noexcept;
  bool active(unsigned branch) const noexcept { return (decimal_ >> (width_ - 1 - branch)) & 1u; }
  std::vector<bool> bits() const;

  friend bool operator==(const SpatialPattern&, const SpatialPattern&) = default;

 private:
  std::uint32_t decimal_ = 0;
  unsigned width_ = 0;
};

unsigned hamming_weight(std::uint32_t decimal, unsigned width);

/// Hamming distance between two patterns of equal width.
unsigned spatial_bit_error_count(const SpatialPattern& sent, const SpatialPattern& detected);

struct PoolMapping {
  Pool pool;
  std::uint32_t bit_prefix = 0;       // first m-1 MQAM bits
  std::vector<std::uint32_t> allowed; // sorted decimal indices J
  std::vector<unsigned> weights;      // weight rule the allowed set was derived from
};

struct MappingTable {
  unsigned order = 0;
  unsigned bits_per_symbol = 0;
  unsigned n_active = 0;  // N_a, pattern width
  // True when the table is specified by Hamming-weight classes rather than an
  // explicit per-pool list (the 4QAM table).
  bool weight_rule_form = false;
  std::vector<PoolMapping> pools;
  std::vector<int> pool_of_index;  // J -> pool position, -1 when unassigned

  /// Pool position owning `decimal`, or nullopt.
  std::optional<std::size_t> pool_for(std::uint32_t decimal) const;
};

/// (4, 6) and (16, 4) reproduce the reference tables; other (M, N_a) split the
/// nonzero indices by weight into a low-weight half for robust pools and a
/// high-weight half for sensitive pools. Throws std::invalid_argument when
/// 2^N_a - 1 is smaller than the number of pools.
MappingTable build_mapping_table(const Constellation& c, unsigned n_active,
                                 const std::vector<Pool>& pools);

struct MappedSymbol {
  SpatialPattern pattern;
  cd symbol;
  std::size_t pool = 0;     // pool position (E-PN mode)
  unsigned selector = 0;    // within-pool index (E-PN mode)
};

/// First N_a bits form the pattern verbatim, the remaining m bits a Gray label.
/// Throws std::invalid_argument on wrong length or an all-zero spatial word.
MappedSymbol classical_map(const std::vector<bool>& bits, unsigned n_active, const Constellation& c);

/// Inverse of classical_map for a detected pattern and constellation index.
std::vector<bool> classical_demap(const SpatialPattern& pattern, std::size_t symbol_index,
                                  const Constellation& c);

/// m MQAM bits: prefix selects the pool, last bit the symbol in it, and J is
/// drawn uniformly from the pool's allowed set.
MappedSymbol epn_map(const std::vector<bool>& bits, const MappingTable& table, Rng& rng);

/// Recovers the m MQAM bits from the detected pattern (pool prefix) and the
/// within-pool decision. Falls back to the pool whose allowed set holds the
/// index nearest in Hamming distance when the pattern is unassigned.
std::vector<bool> epn_demap(const SpatialPattern& detected, unsigned selector,
                            const MappingTable& table);

/// Pool position used by epn_demap for a detected pattern.
std::size_t epn_pool_for(const SpatialPattern& detected, const MappingTable& table);

std::vector<bool> to_bits(std::uint32_t value, unsigned width);
std::uint32_t from_bits(const std::vector<bool>& bits);

}  // namespace grsm
