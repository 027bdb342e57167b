#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gridcomp/kernels.hpp"

using namespace gridcomp::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

std::vector<std::complex<double>> random_cvec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  std::vector<std::complex<double>> v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

double abs_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] * b[i]);
  return s;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar table matches naive loops") {
  std::mt19937_64 rng(3);
  const KernelTable& s = scalar_table();
  for (std::size_t n : {0u, 1u, 7u, 33u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double dot = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dot += a[i] * b[i];
      ss += a[i] * a[i];
    }
    CHECK(s.dot(a.data(), b.data(), n) == doctest::Approx(dot).epsilon(1e-14));
    CHECK(s.sum_squares(a.data(), n) == doctest::Approx(ss).epsilon(1e-14));
  }
}

TEST_CASE("avx2 agrees with scalar on every length up to 67") {
  if (!backend_supported(Backend::avx2)) {
    MESSAGE("avx2 not available; skipped");
    return;
  }
  const KernelTable& s = scalar_table();
  const KernelTable& v = *avx2_table();
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    const double scale = abs_sum(a, b) + 1e-300;
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v.dot(a.data(), b.data(), n)) <= 1e-14 * scale);
    CHECK(std::abs(s.sum_squares(a.data(), n) - v.sum_squares(a.data(), n)) <= 1e-14 * (abs_sum(a, a) + 1e-300));

    auto y1 = b, y2 = b;
    s.axpy(0.37, a.data(), y1.data(), n);
    v.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));

    const auto ca = random_cvec(rng, n), cb = random_cvec(rng, n);
    const auto zs = s.dot_conj(ca.data(), cb.data(), n), zv = v.dot_conj(ca.data(), cb.data(), n);
    double cscale = 1e-300;
    for (std::size_t i = 0; i < n; ++i) cscale += std::abs(ca[i]) * std::abs(cb[i]);
    CHECK(std::abs(zs - zv) <= 1e-14 * cscale);
  }
}

TEST_CASE("dot_conj conjugates the first argument") {
  const std::vector<std::complex<double>> a{{0.0, 1.0}}, b{{0.0, 1.0}};
  const auto z = scalar_table().dot_conj(a.data(), b.data(), 1);
  CHECK(z.real() == doctest::Approx(1.0));
  CHECK(z.imag() == doctest::Approx(0.0));
}

TEST_CASE("scoped backend restores the previous selection") {
  const Backend before = active_backend();
  {
    ScopedBackend guard(Backend::scalar);
    CHECK(guard.engaged());
    CHECK(active_backend() == Backend::scalar);
    const std::vector<double> x{1.0, 2.0, 2.0};
    CHECK(sum_squares(x) == 9.0);
  }
  CHECK(active_backend() == before);
  CHECK(backend_name(Backend::scalar) == "scalar");
}

}
