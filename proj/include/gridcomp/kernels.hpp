#pragma once

// Dense arithmetic kernels used by the conic solver and the channel model.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is chosen once at startup from CPUID; the
// environment variable GRIDCOMP_KERNELS=scalar forces the reference path.
// The two variants agree to rounding (they sum in a different order), so
// results are reproducible per machine but not bitwise across backends.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace gridcomp::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // sum_i conj(a_i) * b_i over interleaved (re, im) storage
  std::complex<double> (*dot_conj)(const std::complex<double>* a,
                                   const std::complex<double>* b,
                                   std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the binary was not built for x86-64
const KernelTable* avx2_table();

bool backend_supported(Backend b);
Backend active_backend();
// Returns false (and leaves the active backend unchanged) when unsupported.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

inline std::complex<double> dot_conj(std::span<const std::complex<double>> a,
                                     std::span<const std::complex<double>> b) {
  return active().dot_conj(a.data(), b.data(), a.size());
}

// RAII override of the active backend, used by equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend b) : previous_(active_backend()) {
    engaged_ = set_backend(b);
  }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;
  bool engaged() const { return engaged_; }

 private:
  Backend previous_;
  bool engaged_;
};

}  // namespace gridcomp::kernels
