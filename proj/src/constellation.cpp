#include "grsm/constellation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace grsm {
namespace {

constexpr double kPi = std::numbers::pi;

bool same_point(cd a, cd b) { return a.real() == b.real() && a.imag() == b.imag(); }

// Presentation order of the mapping tables: first-listed symbol of each pool.
const std::vector<cd>& canonical_firsts(unsigned order) {
  static const std::vector<cd> qam4{{-1, 1}, {1, 1}};
  static const std::vector<cd> qam16{{3, 3},  {-3, -3}, {-3, 3}, {-1, 1},
                                     {-1, 3}, {1, 3},   {3, 1},  {-3, 1}};
  static const std::vector<cd> none;
  if (order == 4) return qam4;
  if (order == 16) return qam16;
  return none;
}

// Reduced direction of a lattice point's line through the origin, as a pair of
// coprime integers with a fixed sign convention (identifies the line, not the ray).
std::pair<long, long> line_key(cd x) {
  long a = std::lround(x.real());
  long b = std::lround(x.imag());
  const long g = std::gcd(std::labs(a), std::labs(b));
  a /= g;
  b /= g;
  if (a < 0 || (a == 0 && b < 0)) {
    a = -a;
    b = -b;
  }
  return {a, b};
}

}  // namespace

std::size_t Constellation::index_of_label(std::uint32_t label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::out_of_range("label not in constellation");
  return static_cast<std::size_t>(it - labels.begin());
}

std::size_t Constellation::index_of_point(cd point) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (same_point(points[i], point)) return i;
  }
  throw std::out_of_range("point not in constellation: " + format_symbol(point));
}

Constellation build_mqam(unsigned order) {
  if (order < 4 || !std::has_single_bit(order) || std::countr_zero(order) % 2 != 0) {
    throw std::invalid_argument(fmt::format("unsupported MQAM order {} (need a power of 4)", order));
  }
  Constellation c;
  c.order = order;
  c.bits_per_symbol = static_cast<unsigned>(std::countr_zero(order));
  const unsigned axis_bits = c.bits_per_symbol / 2;
  const unsigned levels = 1u << axis_bits;
  double energy = 0.0;
  for (unsigned i = 0; i < levels; ++i) {
    for (unsigned q = 0; q < levels; ++q) {
      const double re = 2.0 * i - (levels - 1.0);
      const double im = 2.0 * q - (levels - 1.0);
      const std::uint32_t gi = i ^ (i >> 1);
      const std::uint32_t gq = q ^ (q >> 1);
      c.points.emplace_back(re, im);
      c.labels.push_back((gi << axis_bits) | gq);
      energy += re * re + im * im;
    }
  }
  c.symbol_energy = energy / order;
  return c;
}

cd first_order_rotation(cd x, double phi) {
  const double mag = std::abs(x);
  const double t = std::arg(x);
  return {mag * (std::cos(t) - phi * std::sin(t)), mag * (std::sin(t) + phi * std::cos(t))};
}

SensitivityReport pn_sensitivity(cd x, double phi) {
  if (x.real() == 0.0 || x.imag() == 0.0) {
    throw std::domain_error("pn_sensitivity: symbol has a zero component");
  }
  // Under the first-order model Re gains -phi*Im(x) and Im gains +phi*Re(x).
  return {std::abs(-phi * x.imag() / x.real()) * 100.0,
          std::abs(phi * x.real() / x.imag()) * 100.0};
}

char sensitivity_code(Sensitivity s) noexcept {
  switch (s) {
    case Sensitivity::Robust:
      return 'R';
    case Sensitivity::Sensitive:
      return 'S';
    case Sensitivity::Uniform:
      break;
  }
  return 'U';
}

std::vector<Sensitivity> classify_symbols(const Constellation& c) {
  std::vector<Sensitivity> out;
  out.reserve(c.points.size());
  for (const auto& x : c.points) {
    if (c.order == 4) {
      out.push_back(Sensitivity::Uniform);
    } else {
      out.push_back(std::abs(x.real()) == std::abs(x.imag()) ? Sensitivity::Robust
                                                             : Sensitivity::Sensitive);
    }
  }
  return out;
}

double angular_separation(double theta1, double theta2) {
  double d = std::fmod(std::abs(theta1 - theta2), 2.0 * kPi);
  if (d > kPi) d = 2.0 * kPi - d;
  return d;
}

double overlap_probability(double theta1, double theta2, double variance) {
  if (!(variance > 0.0)) {
    throw std::domain_error("overlap_probability: variance must be > 0");
  }
  const double dtheta = angular_separation(theta1, theta2);
  const double sigma = std::sqrt(variance);
  return std::exp(-dtheta * dtheta / (4.0 * variance)) / (2.0 * std::sqrt(kPi) * sigma);
}

double overlap_probability_numeric(double theta1, double theta2, double variance, double tol) {
  if (!(variance > 0.0)) {
    throw std::domain_error("overlap_probability_numeric: variance must be > 0");
  }
  if (!(tol > 0.0)) {
    throw std::domain_error("overlap_probability_numeric: tol must be > 0");
  }
  const double mean1 = 0.0;
  const double mean2 = angular_separation(theta1, theta2);
  const double sigma = std::sqrt(variance);
  const double norm = 1.0 / (2.0 * kPi * variance);
  const auto integrand = [&](double phi) {
    const double a = phi - mean1;
    const double b = phi - mean2;
    return norm * std::exp(-(a * a + b * b) / (2.0 * variance));
  };
  const double mid = 0.5 * (mean1 + mean2);
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, mid - 12.0 * sigma, mid + 12.0 * sigma, 20, tol, &error, &l1);
  if (!(error <= tol * std::abs(value)) && error > 0.0) {
    throw std::runtime_error(
        fmt::format("overlap quadrature did not converge (error {:.3g} vs value {:.3g})", error,
                    value));
  }
  return value;
}

std::vector<Pool> build_pools(const Constellation& c) {
  const auto classes = classify_symbols(c);
  const auto n = c.points.size();

  // Group points by line through the origin; pool partners must share a line
  // on opposite sides of the origin to be pi apart.
  std::vector<std::pair<std::pair<long, long>, std::vector<std::size_t>>> lines;
  for (std::size_t i = 0; i < n; ++i) {
    const auto key = line_key(c.points[i]);
    auto it = std::find_if(lines.begin(), lines.end(), [&](const auto& l) { return l.first == key; });
    if (it == lines.end()) {
      lines.push_back({key, {i}});
    } else {
      it->second.push_back(i);
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [key, members] : lines) {
    const cd dir(static_cast<double>(key.first), static_cast<double>(key.second));
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (const auto i : members) {
      const double proj = (c.points[i] * std::conj(dir)).real();
      (proj > 0 ? pos : neg).push_back(i);
    }
    if (pos.size() != neg.size()) {
      throw std::invalid_argument("pool construction: unbalanced line through origin");
    }
    // Perfect matching between the two sides that keeps each pair inside one
    // sensitivity class and maximizes the smallest within-pool distance.
    std::vector<std::size_t> perm(neg.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::optional<std::vector<std::size_t>> best;
    double best_min = -1.0;
    do {
      double min_d = std::numeric_limits<double>::infinity();
      bool ok = true;
      for (std::size_t k = 0; k < pos.size() && ok; ++k) {
        const auto a = pos[k];
        const auto b = neg[perm[k]];
        if (classes[a] != classes[b]) ok = false;
        min_d = std::min(min_d, std::abs(c.points[a] - c.points[b]));
      }
      if (ok && min_d > best_min + 1e-12) {
        best_min = min_d;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (!best) {
      throw std::invalid_argument(
          "pool construction: no pi-separated pairing with homogeneous sensitivity");
    }
    for (std::size_t k = 0; k < pos.size(); ++k) pairs.emplace_back(pos[k], neg[(*best)[k]]);
  }

  std::vector<Pool> pools;
  const auto& firsts = canonical_firsts(c.order);
  if (!firsts.empty()) {
    for (const auto& f : firsts) {
      const auto fi = c.index_of_point(f);
      const auto it = std::find_if(pairs.begin(), pairs.end(), [&](const auto& p) {
        return p.first == fi || p.second == fi;
      });
      if (it == pairs.end()) throw std::logic_error("pool construction: missing pair");
      const auto partner = it->first == fi ? it->second : it->first;
      pools.push_back({static_cast<unsigned>(pools.size()), c.points[fi], c.points[partner],
                       classes[fi]});
    }
    if (pools.size() != pairs.size()) throw std::logic_error("pool construction: pair count");
    return pools;
  }

  // Orders without a fixed reference table: robust pools first, then by angle.
  for (auto& [a, b] : pairs) {
    if (std::arg(c.points[b]) > std::arg(c.points[a])) std::swap(a, b);
  }
  std::sort(pairs.begin(), pairs.end(), [&](const auto& l, const auto& r) {
    const bool lr = classes[l.first] == Sensitivity::Robust;
    const bool rr = classes[r.first] == Sensitivity::Robust;
    if (lr != rr) return lr;
    const double la = std::abs(c.points[l.first]);
    const double ra = std::abs(c.points[r.first]);
    if (la != ra) return la < ra;
    return std::arg(c.points[l.first]) < std::arg(c.points[r.first]);
  });
  for (const auto& [a, b] : pairs) {
    pools.push_back({static_cast<unsigned>(pools.size()), c.points[a], c.points[b], classes[a]});
  }
  return pools;
}

std::string format_symbol(cd x) {
  const auto fmt_num = [](double v) {
    if (v == std::round(v)) return fmt::format("{}", static_cast<long>(v));
    return fmt::format("{:g}", v);
  };
  const double im = x.imag();
  return fmt_num(x.real()) + (im < 0 ? "-" : "+") + fmt_num(std::abs(im)) + "i";
}

}  // namespace grsm
