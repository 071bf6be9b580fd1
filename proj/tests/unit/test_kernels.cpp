#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "offload/kernels.hpp"

using namespace offload;

#ifdef OFFLOAD_HAVE_AVX2_KERNELS

namespace {

bool have_avx2() { return simd::detected_isa() == simd::Isa::avx2; }

}  // namespace

TEST_CASE("power_moments: AVX2 matches scalar") {
  if (!have_avx2()) return;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 17u, 64u, 1023u}) {
    std::vector<double> w(n), y(n);
    double wsum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = u(gen) * (k % 3 == 0 ? -1.0 : 1.0);
      y[k] = 0.05 + 0.9 * u(gen);
      wsum += std::abs(w[k]);
    }
    for (std::size_t m : {0u, 1u, 2u, 40u}) {
      std::vector<double> a(m), b(m);
      simd::scalar::power_moments(w, y, a);
      simd::avx2::power_moments(w, y, b);
      for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-14 * (1.0 + wsum));
    }
  }
}

TEST_CASE("exp_weighted_sum: AVX2 matches scalar") {
  if (!have_avx2()) return;
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {1u, 2u, 7u, 8u, 33u, 500u}) {
    std::vector<double> c(n), rate(n);
    double csum = 0;
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = u(gen);
      rate[k] = 0.01 + 5.0 * u(gen);
      csum += c[k];
    }
    for (double t : {0.0, 1e-3, 0.5, 3.0, 40.0, 400.0}) {
      const double a = simd::scalar::exp_weighted_sum(c, rate, t);
      const double b = simd::avx2::exp_weighted_sum(c, rate, t);
      CHECK(std::abs(a - b) <= 1e-14 * csum);
    }
  }
}

TEST_CASE("exp_batch: AVX2 matches std::exp") {
  if (!have_avx2()) return;
  std::vector<double> x;
  for (double v = -760.0; v <= 720.0; v += 0.37) x.push_back(v);
  x.push_back(0.0);
  x.push_back(-0.0);
  std::vector<double> a(x.size()), b(x.size());
  simd::scalar::exp_batch(x, a);
  simd::avx2::exp_batch(x, b);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 709.78) {
      CHECK(std::isinf(b[i]));
    } else if (x[i] < -708.0) {
      CHECK(std::abs(a[i] - b[i]) <= 1e-300);
    } else {
      CHECK(std::abs(a[i] - b[i]) <= 4e-16 * a[i]);
    }
  }
}

TEST_CASE("dispatch follows the active ISA") {
  if (!have_avx2()) return;
  const std::vector<double> c{0.3, 0.2, 0.5, 0.1, 0.7};
  const std::vector<double> rate{1.0, 2.0, 0.5, 3.0, 0.25};
  simd::set_active_isa(simd::Isa::scalar);
  const double a = simd::exp_weighted_sum(c, rate, 1.7);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  simd::set_active_isa(simd::Isa::avx2);
  const double b = simd::exp_weighted_sum(c, rate, 1.7);
  CHECK(a == doctest::Approx(b).epsilon(1e-15));
}

#endif

TEST_CASE("scalar kernels") {
  const std::vector<double> w{1.0, 2.0}, y{0.5, 0.25};
  std::vector<double> out(3);
  simd::scalar::power_moments(w, y, out);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 1.0);
  CHECK(out[2] == doctest::Approx(0.375));
  CHECK(simd::scalar::exp_weighted_sum(w, y, 0.0) == 3.0);
  CHECK_THROWS(simd::scalar::power_moments(w, std::vector<double>{1.0}, out));
  CHECK(simd::isa_name(simd::Isa::scalar) == "scalar");
}
