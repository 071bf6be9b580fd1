#pragma once

// Data-parallel inner loops shared by the quadrature code. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant; the active variant is
// picked once at startup from the CPU feature bits and can be overridden for testing.

#include <span>
#include <string_view>

namespace offload::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();

/// Variant used by the dispatching entry points below.
Isa active_isa();

/// Overrides dispatch; throws std::invalid_argument when the CPU lacks the requested ISA.
/// Not synchronized with concurrent kernel calls.
void set_active_isa(Isa isa);

/// out[m] = sum_k weights[k] * ratios[k]^m for m = 0 .. out.size()-1.
void power_moments(std::span<const double> weights, std::span<const double> ratios, std::span<double> out);

/// sum_k coef[k] * exp(-rate[k] * t).
double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t);

/// out[i] = exp(x[i]).
void exp_batch(std::span<const double> x, std::span<double> out);

namespace scalar {
void power_moments(std::span<const double> weights, std::span<const double> ratios, std::span<double> out);
double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t);
void exp_batch(std::span<const double> x, std::span<double> out);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define OFFLOAD_HAVE_AVX2_KERNELS 1
namespace avx2 {
void power_moments(std::span<const double> weights, std::span<const double> ratios, std::span<double> out);
double exp_weighted_sum(std::span<const double> coef, std::span<const double> rate, double t);
void exp_batch(std::span<const double> x, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace offload::simd
