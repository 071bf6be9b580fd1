#pragma once

// Regenerative (cycle-resampling) bootstrap, and the two goodness-of-fit tests that compare the
// exact and approximate vehicle-wait laws against simulated waits.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "offload/sim.hpp"
#include "offload/wtime.hpp"

namespace offload::stats {

inline constexpr int kDefaultResamples = 10000;
inline constexpr double kDefaultAlpha = 0.01;

struct BootstrapCI {
  double lo = 0;
  double hi = 0;
  double level = 0;  ///< 1 - alpha
  int B = 0;
  double point = 0;
  std::vector<double> sampling_dist;

  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Percentile interval of `statistic` over B resamples of cycle indices drawn with replacement.
/// Resample b uses its own generator derived from (seed, b), so results do not depend on the
/// order in which resamples are evaluated.
BootstrapCI bootstrap_ci(std::size_t n_cycles, const std::function<double(std::span<const std::size_t>)>& statistic,
                         int B = kDefaultResamples, double alpha = kDefaultAlpha, std::uint64_t seed = 1);

/// Per-cycle numerator and denominator of a ratio-of-sums estimator sum(num) / sum(den).
struct RatioSamples {
  std::vector<double> num;
  std::vector<double> den;

  double point() const;
};

BootstrapCI bootstrap_ratio_ci(const RatioSamples& samples, int B = kDefaultResamples, double alpha = kDefaultAlpha,
                               std::uint64_t seed = 1);

/// Several ratio statistics over the same cycles, sharing each resample. All entries must have
/// the same cycle count.
std::vector<BootstrapCI> bootstrap_ratio_cis(const std::vector<RatioSamples>& samples, int B = kDefaultResamples,
                                             double alpha = kDefaultAlpha, std::uint64_t seed = 1,
                                             bool keep_sampling_dist = false);

/// Per cycle: time the queue spent above n, and cycle length. The ratio is the time-average SF at n.
RatioSamples qlen_sf_samples(const sim::CycleSet& cycles, sim::QueueTarget target, std::size_t n);

/// Per cycle: waits above t, and waits in total. The ratio is the empirical SF at t.
RatioSamples wait_sf_samples(const std::vector<std::vector<double>>& waits, double t);

/// Normal-approximation interval for a regenerative ratio estimator.
struct ClTInterval {
  double lo;
  double hi;
  double point;
};

ClTInterval regenerative_clt_ci(const RatioSamples& samples, double alpha = kDefaultAlpha);

/// Exact (Clopper-Pearson) interval for a binomial proportion k / n.
std::pair<double, double> binomial_ci(int k, int n, double alpha);

struct T0Result {
  double t0 = 0;
  double sf_gap = 0;  ///< |SF_ex(t0) - SF_apx(t0)|
  bool no_root = false;
  std::string diagnostic;
};

/// Crossing of the two conditional PDFs where the SF gap is largest.
T0Result find_t0(const WaitDist& exact, const WaitDist& approx, int grid_points = 400);

/// Per-cycle conditional vehicle waits in solver time units.
using CycleWaits = std::vector<std::vector<double>>;

struct NullTestOutcome {
  bool h_ex = false;
  bool h_apx = false;
  double t0 = 0;
  double sf_exact = 0;
  double sf_approx = 0;
  BootstrapCI ci;
  ClTInterval clt{};
};

/// Bootstrap CI for the empirical conditional SF at t0 and whether each model value falls
/// outside it. t0 defaults to find_t0(exact, approx).
NullTestOutcome null_hypothesis_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx,
                                     int B = kDefaultResamples, double alpha = kDefaultAlpha, std::uint64_t seed = 1,
                                     std::optional<double> t0 = std::nullopt);

struct LrTestOutcome {
  bool h_fa = false;
  bool h_md = false;
  bool k_fa = false;
  bool k_md = false;
  double lambda = 0;  ///< mean log likelihood ratio
  double d1 = 0;      ///< KL(exact || approx)
  double d2 = 0;      ///< KL(approx || exact)
  BootstrapCI ci;
};

struct KlPair {
  double d1;
  double d2;
};

/// Both Kullback-Leibler divergences of the conditional densities, by adaptive Gauss-Kronrod.
KlPair kl_divergences(const WaitDist& exact, const WaitDist& approx, double tol = 1e-9);

LrTestOutcome lr_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx,
                      int B = kDefaultResamples, double alpha = kDefaultAlpha, std::uint64_t seed = 1);

/// Same test with divergences supplied, for repeated runs against one pair of laws.
LrTestOutcome lr_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx, const KlPair& kl,
                      int B = kDefaultResamples, double alpha = kDefaultAlpha, std::uint64_t seed = 1);

struct FarMdr {
  double far = 0;
  double mdr = 0;
  double far_kl = 0;
  double mdr_kl = 0;
  int runs = 0;
};

/// Null test: FAR = mean h_ex, MDR = 1 - mean h_apx.
FarMdr far_mdr(std::span<const NullTestOutcome> outcomes);
/// LR test: FAR = mean h_fa, MDR = mean h_md, and the KL variants from k_fa, k_md.
FarMdr far_mdr(std::span<const LrTestOutcome> outcomes);

}  // namespace offload::stats
