#pragma once

// Data-parallel inner loops of the solvers. Every kernel has a scalar
// reference implementation and an AVX2/FMA variant; the public entry points
// dispatch to the best level the CPU supports (override with
// THERMO_SIMD=scalar|avx2 or set_level()).

#include <cstdint>
#include <span>
#include <string_view>

namespace thermo::simd {

enum class Level { Scalar, Avx2 };

/// Compressed sparse row matrix, borrowed.
struct CsrView {
  std::span<const std::int64_t> row_ptr;  // rows + 1 entries
  std::span<const std::int32_t> cols;
  std::span<const double> vals;
};

double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// out = a .* b
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
/// y = A x
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);

Level active_level();
void set_level(Level level);
bool level_supported(Level level);
std::string_view level_name(Level level);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

#if defined(THERMO_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);
}  // namespace avx2
#endif

}  // namespace thermo::simd
