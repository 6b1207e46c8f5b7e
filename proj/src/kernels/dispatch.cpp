#include "grsm/kernels.hpp"

#include <atomic>

namespace grsm::kernels {
namespace {

Isa probe() noexcept {
#if defined(GRSM_HAVE_AVX2_KERNELS)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return Isa::Avx2;
  }
#endif
  return Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{probe()};
  return isa;
}

}  // namespace

Isa detect_isa() noexcept { return probe(); }

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && probe() != Isa::Avx2) {
    current().store(Isa::Scalar, std::memory_order_relaxed);
    return false;
  }
  current().store(isa, std::memory_order_relaxed);
  return true;
}

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Scalar:
      break;
  }
  return "scalar";
}

#if defined(GRSM_HAVE_AVX2_KERNELS)
#define GRSM_DISPATCH(fn, ...)                                   \
  (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define GRSM_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

void complex_multiply(std::span<const cd> a, std::span<const cd> b, std::span<cd> out) {
  GRSM_DISPATCH(complex_multiply, a, b, out);
}

cd complex_dot(std::span<const cd> a, std::span<const cd> b) {
  return GRSM_DISPATCH(complex_dot, a, b);
}

void scaled_energy(std::span<const cd> y, double scale, std::span<double> out) {
  GRSM_DISPATCH(scaled_energy, y, scale, out);
}

std::size_t nearest_point(cd y, std::span<const cd> points) {
  return GRSM_DISPATCH(nearest_point, y, points);
}

}  // namespace grsm::kernels
