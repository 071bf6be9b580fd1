#include "offload/kernels.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace offload::simd {

namespace scalar {

void power_moments(std::span<const double> weights, std::span<const double> ratios, std::span<double> out) {
  if (weights.size() != ratios.size()) throw std::invalid_argument("power_moments: size mismatch");
  for (double& o : out) o = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double term = weights[k];
    const double y = ratios[k];
    for (double& o : out) {
      o += term;
      term *= y;
    }
  }
}

double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t) {
  if (coef.size() != rate.size()) throw std::invalid_argument("exp_weighted_sum: size mismatch");
  double acc = 0.0;
  for (std::size_t k = 0; k < coef.size(); ++k) acc += coef[k] * std::exp(-rate[k] * t);
  return acc;
}

void exp_batch(std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size()) throw std::invalid_argument("exp_batch: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::exp(x[i]);
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(OFFLOAD_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
  static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
  return isa;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detected_isa() != Isa::avx2) {
    throw std::invalid_argument("AVX2 kernels requested but the CPU does not support AVX2+FMA");
  }
  active().store(isa, std::memory_order_relaxed);
}

void power_moments(std::span<const double> weights, std::span<const double> ratios, std::span<double> out) {
#ifdef OFFLOAD_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return avx2::power_moments(weights, ratios, out);
#endif
  scalar::power_moments(weights, ratios, out);
}

double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t) {
#ifdef OFFLOAD_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return avx2::exp_weighted_sum(coef, rate, t);
#endif
  return scalar::exp_weighted_sum(coef, rate, t);
}

void exp_batch(std::span<const double> x, std::span<double> out) {
#ifdef OFFLOAD_HAVE_AVX2_KERNELS
  if (active_isa() == Isa::avx2) return avx2::exp_batch(x, out);
#endif
  scalar::exp_batch(x, out);
}

}  // namespace offload::simd
