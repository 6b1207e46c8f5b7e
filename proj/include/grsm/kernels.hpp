#pragma once

// Data-parallel inner loops of the link simulator. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant chosen at runtime.
// Complex buffers use the interleaved std::complex<double> layout.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace grsm::kernels {

using cd = std::complex<double>;

enum class Isa { Scalar, Avx2 };

/// Best ISA supported by the running CPU.
Isa detect_isa() noexcept;

/// ISA currently used by the dispatching entry points below.
Isa active_isa() noexcept;

/// Forces a specific ISA (tests use this to compare variants). Requesting an
/// ISA the CPU cannot execute falls back to Scalar and returns false.
bool set_isa(Isa isa) noexcept;

std::string_view isa_name(Isa isa) noexcept;

// out[i] = a[i] * b[i]
void complex_multiply(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);

// sum_i a[i] * b[i] (no conjugation)
cd complex_dot(std::span<const cd> a, std::span<const cd> b);

// out[i] = scale * |y[i]|^2
void scaled_energy(std::span<const cd> y, double scale, std::span<double> out);

// Index of the point closest to y in Euclidean distance; lowest index wins ties.
std::size_t nearest_point(cd y, std::span<const cd> points);

namespace scalar {
void complex_multiply(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);
cd complex_dot(std::span<const cd> a, std::span<const cd> b);
void scaled_energy(std::span<const cd> y, double scale, std::span<double> out);
std::size_t nearest_point(cd y, std::span<const cd> points);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define GRSM_HAVE_AVX2_KERNELS 1
namespace avx2 {
void complex_multiply(std::span<const cd> a, std::span<const cd> b, std::span<cd> out);
cd complex_dot(std::span<const cd> a, std::span<const cd> b);
void scaled_energy(std::span<const cd> y, double scale, std::span<double> out);
std::size_t nearest_point(cd y, std::span<const cd> points);
}  // namespace avx2
#endif

}  // namespace grsm::kernels
