#include <atomic>
#include <cstdlib>
#include <string>

#include "thermo/simd/kernels.hpp"

namespace thermo::simd {
namespace {

struct KernelTable {
  double (*dot)(std::span<const double>, std::span<const double>);
  void (*axpy)(double, std::span<const double>, std::span<double>);
  void (*xpby)(std::span<const double>, double, std::span<double>);
  void (*multiply)(std::span<const double>, std::span<const double>, std::span<double>);
  void (*spmv)(const CsrView&, std::span<const double>, std::span<double>);
  double (*squared_distance)(std::span<const double>, std::span<const double>);
};

constexpr KernelTable kScalar{scalar::dot,      scalar::axpy, scalar::xpby,
                              scalar::multiply, scalar::spmv, scalar::squared_distance};
#if defined(THERMO_HAVE_AVX2)
constexpr KernelTable kAvx2{avx2::dot,      avx2::axpy, avx2::xpby,
                            avx2::multiply, avx2::spmv, avx2::squared_distance};
#endif

bool cpu_has_avx2() {
#if defined(THERMO_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level detect_level() {
  if (const char* env = std::getenv("THERMO_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Level::Scalar;
    if (v == "avx2" && cpu_has_avx2()) return Level::Avx2;
  }
  return cpu_has_avx2() ? Level::Avx2 : Level::Scalar;
}

const KernelTable* table_for(Level level) {
#if defined(THERMO_HAVE_AVX2)
  if (level == Level::Avx2) return &kAvx2;
#endif
  (void)level;
  return &kScalar;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{detect_level()};
  return level;
}

const KernelTable& active() { return *table_for(current().load(std::memory_order_relaxed)); }

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) { return active().dot(a, b); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { active().axpy(alpha, x, y); }
void xpby(std::span<const double> x, double beta, std::span<double> y) { active().xpby(x, beta, y); }
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  active().multiply(a, b, out);
}
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) { active().spmv(a, x, y); }
double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a, b);
}

Level active_level() { return current().load(std::memory_order_relaxed); }

bool level_supported(Level level) { return level == Level::Scalar || cpu_has_avx2(); }

void set_level(Level level) {
  current().store(level_supported(level) ? level : Level::Scalar, std::memory_order_relaxed);
}

std::string_view level_name(Level level) { return level == Level::Avx2 ? "avx2" : "scalar"; }

}  // namespace thermo::simd
