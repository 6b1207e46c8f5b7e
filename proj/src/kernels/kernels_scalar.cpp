#include "grsm/kernels.hpp"

#include <cassert>
#include <limits>

namespace grsm::kernels::scalar {

void complex_multiply(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
  assert(a.size() == b.size() && out.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double re = a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    const double im = a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    out[i] = {re, im};
  }
}

cd complex_dot(std::span<const cd> a, std::span<const cd> b) {
  assert(a.size() == b.size());
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    re += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
    im += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
  }
  return {re, im};
}

void scaled_energy(std::span<const cd> y, double scale, std::span<double> out) {
  assert(out.size() == y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = scale * (y[i].real() * y[i].real() + y[i].imag() * y[i].imag());
  }
}

std::size_t nearest_point(cd y, std::span<const cd> points) {
  assert(!points.empty());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double dr = y.real() - points[i].real();
    const double di = y.imag() - points[i].imag();
    const double d = dr * dr + di * di;
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace grsm::kernels::scalar
