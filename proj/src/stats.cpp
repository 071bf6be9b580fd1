#include "offload/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace offload::stats {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 resample_generator(std::uint64_t seed, int b) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(b)));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (h - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

void check_args(std::size_t n_cycles, int B, double alpha) {
  if (n_cycles < 2) throw SampleError("bootstrap needs at least 2 complete regeneration cycles");
  if (B < 1) throw ValidationError("bootstrap: B must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("bootstrap: alpha must lie in (0, 1)");
}

BootstrapCI finish(std::vector<double> dist, double point, int B, double alpha, bool keep) {
  std::erase_if(dist, [](double v) { return std::isnan(v); });
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  BootstrapCI ci;
  ci.lo = quantile_sorted(sorted, 0.5 * alpha);
  ci.hi = quantile_sorted(sorted, 1.0 - 0.5 * alpha);
  ci.level = 1.0 - alpha;
  ci.B = B;
  ci.point = point;
  if (keep) ci.sampling_dist = std::move(dist);
  return ci;
}

}  // namespace

BootstrapCI bootstrap_ci(std::size_t n_cycles, const std::function<double(std::span<const std::size_t>)>& statistic,
                         int B, double alpha, std::uint64_t seed) {
  check_args(n_cycles, B, alpha);
  std::vector<std::size_t> idx(n_cycles);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const double point = statistic(idx);

  std::vector<double> dist(static_cast<std::size_t>(B));
  std::uniform_int_distribution<std::size_t> pick(0, n_cycles - 1);
  for (int b = 0; b < B; ++b) {
    auto gen = resample_generator(seed, b);
    for (auto& i : idx) i = pick(gen);
    dist[static_cast<std::size_t>(b)] = statistic(idx);
  }
  return finish(std::move(dist), point, B, alpha, true);
}

double RatioSamples::point() const {
  const double n = std::accumulate(num.begin(), num.end(), 0.0);
  const double d = std::accumulate(den.begin(), den.end(), 0.0);
  return d > 0.0 ? n / d : std::numeric_limits<double>::quiet_NaN();
}

std::vector<BootstrapCI> bootstrap_ratio_cis(const std::vector<RatioSamples>& samples, int B, double alpha,
                                             std::uint64_t seed, bool keep_sampling_dist) {
  if (samples.empty()) return {};
  const std::size_t n = samples.front().num.size();
  for (const auto& s : samples) {
    if (s.num.size() != n || s.den.size() != n) throw ValidationError("bootstrap: ratio samples differ in length");
  }
  check_args(n, B, alpha);

  const std::size_t k = samples.size();
  std::vector<std::vector<double>> dist(k, std::vector<double>(static_cast<std::size_t>(B)));
  std::vector<double> mult(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int b = 0; b < B; ++b) {
    auto gen = resample_generator(seed, b);
    std::fill(mult.begin(), mult.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) mult[pick(gen)] += 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (mult[c] == 0.0) continue;
        num += mult[c] * samples[j].num[c];
        den += mult[c] * samples[j].den[c];
      }
      dist[j][static_cast<std::size_t>(b)] = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    }
  }
  std::vector<BootstrapCI> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.push_back(finish(std::move(dist[j]), samples[j].point(), B, alpha, keep_sampling_dist));
  }
  return out;
}

BootstrapCI bootstrap_ratio_ci(const RatioSamples& samples, int B, double alpha, std::uint64_t seed) {
  return bootstrap_ratio_cis({samples}, B, alpha, seed, true).front();
}

RatioSamples qlen_sf_samples(const sim::CycleSet& cycles, sim::QueueTarget target, std::size_t n) {
  const auto i = static_cast<std::size_t>(target);
  RatioSamples s;
  s.num.reserve(cycles.size());
  s.den.reserve(cycles.size());
  for (const sim::Cycle& c : cycles.cycles) {
    const auto& h = c.occupancy[i];
    double above = 0.0;
    for (std::size_t k = n + 1; k < h.size(); ++k) above += h[k];
    s.num.push_back(above);
    s.den.push_back(c.duration());
  }
  return s;
}

RatioSamples wait_sf_samples(const std::vector<std::vector<double>>& waits, double t) {
  RatioSamples s;
  s.num.reserve(waits.size());
  s.den.reserve(waits.size());
  for (const auto& cycle : waits) {
    s.num.push_back(static_cast<double>(std::count_if(cycle.begin(), cycle.end(), [&](double w) { return w > t; })));
    s.den.push_back(static_cast<double>(cycle.size()));
  }
  return s;
}

ClTInterval regenerative_clt_ci(const RatioSamples& samples, double alpha) {
  const std::size_t n = samples.num.size();
  check_args(n, 1, alpha);
  const double r = samples.point();
  const double mean_den = std::accumulate(samples.den.begin(), samples.den.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double z = samples.num[c] - r * samples.den[c];
    ss += z * z;
  }
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - 0.5 * alpha);
  const double half = z * s / (mean_den * std::sqrt(static_cast<double>(n)));
  return {r - half, r + half, r};
}

std::pair<double, double> binomial_ci(int k, int n, double alpha) {
  if (n < 1 || k < 0 || k > n) throw ValidationError("binomial_ci: need 0 <= k <= n, n >= 1");
  using boost::math::binomial_distribution;
  return {binomial_distribution<>::find_lower_bound_on_p(n, k, 0.5 * alpha),
          binomial_distribution<>::find_upper_bound_on_p(n, k, 0.5 * alpha)};
}

namespace {

double horizon(const WaitDist& a, const WaitDist& b, double level) {
  double t = 1.0;
  while ((a.sf(t) > level || b.sf(t) > level) && t < 1e12) t *= 2.0;
  return t;
}

}  // namespace

T0Result find_t0(const WaitDist& exact, const WaitDist& approx, int grid_points) {
  if (grid_points < 2) throw ValidationError("find_t0: need at least 2 grid points");
  const double t_lo = 1e-4;
  const double t_hi = std::max(horizon(exact, approx, 1e-8), 2.0 * t_lo);
  std::vector<double> t(static_cast<std::size_t>(grid_points)), d(t.size());
  const double step = std::log(t_hi / t_lo) / (grid_points - 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = t_lo * std::exp(step * static_cast<double>(i));
    d[i] = exact.pdf(t[i]) - approx.pdf(t[i]);
  }
  const auto gap = [&](double x) { return std::abs(exact.sf(x) - approx.sf(x)); };

  T0Result best;
  bool found = false;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(d[i] * d[i + 1] < 0.0)) continue;
    double a = t[i], b = t[i + 1], da = d[i];
    for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * b; ++it) {
      const double mid = 0.5 * (a + b);
      const double dm = exact.pdf(mid) - approx.pdf(mid);
      if (dm == 0.0) {
        a = b = mid;
        break;
      }
      if ((dm < 0.0) == (da < 0.0)) {
        a = mid;
        da = dm;
      } else {
        b = mid;
      }
    }
    const double root = 0.5 * (a + b);
    const double g = gap(root);
    if (!found || g > best.sf_gap) {
      best.t0 = root;
      best.sf_gap = g;
      found = true;
    }
  }
  if (found) return best;

  best.no_root = true;
  best.diagnostic = "no sign change of the PDF difference; using the grid maximum of the SF gap";
  for (double x : t) {
    const double g = gap(x);
    if (g > best.sf_gap || best.t0 == 0.0) {
      best.t0 = x;
      best.sf_gap = g;
    }
  }
  return best;
}

NullTestOutcome null_hypothesis_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx, int B,
                                     double alpha, std::uint64_t seed, std::optional<double> t0) {
  NullTestOutcome out;
  out.t0 = t0 ? *t0 : find_t0(exact, approx).t0;
  const RatioSamples s = wait_sf_samples(waits, out.t0);
  if (std::accumulate(s.den.begin(), s.den.end(), 0.0) == 0.0) {
    throw SampleError("null test: no positive vehicle waits in the sample");
  }
  out.ci = bootstrap_ratio_ci(s, B, alpha, seed);
  out.clt = regenerative_clt_ci(s, alpha);
  out.sf_exact = exact.sf(out.t0);
  out.sf_approx = approx.sf(out.t0);
  out.h_ex = !out.ci.contains(out.sf_exact);
  out.h_apx = !out.ci.contains(out.sf_approx);
  return out;
}

KlPair kl_divergences(const WaitDist& exact, const WaitDist& approx, double tol) {
  const double t_max = horizon(exact, approx, 1e-10);
  const auto kl = [&](const WaitDist& p, const WaitDist& q) {
    const auto f = [&](double t) {
      const double a = p.pdf(t);
      const double b = q.pdf(t);
      if (!(a > 0.0)) return 0.0;
      if (!(b > 0.0)) return a * 745.0;  // q underflowed; bounded stand-in for log(a / b)
      return a * std::log(a / b);
    };
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t_max, 20, tol, &err);
  };
  return {kl(exact, approx), kl(approx, exact)};
}

LrTestOutcome lr_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx, const KlPair& kl,
                      int B, double alpha, std::uint64_t seed) {
  RatioSamples s;
  s.num.reserve(waits.size());
  s.den.reserve(waits.size());
  for (const auto& cycle : waits) {
    double acc = 0.0;
    for (double t : cycle) {
      const double a = exact.pdf(t);
      const double b = approx.pdf(t);
      if (!(a > 0.0) || !(b > 0.0)) {
        throw SampleError("likelihood ratio: non-positive density at t = " + std::to_string(t));
      }
      acc += std::log(a / b);
    }
    s.num.push_back(acc);
    s.den.push_back(static_cast<double>(cycle.size()));
  }
  if (std::accumulate(s.den.begin(), s.den.end(), 0.0) == 0.0) {
    throw SampleError("likelihood ratio: no positive vehicle waits in the sample");
  }
  LrTestOutcome out;
  out.ci = bootstrap_ratio_ci(s, B, alpha, seed);
  out.lambda = out.ci.point;
  out.d1 = kl.d1;
  out.d2 = kl.d2;
  out.h_fa = out.ci.hi < 0.0;
  out.h_md = out.ci.lo < 0.0 && 0.0 <= out.ci.hi;
  out.k_fa = !out.ci.contains(out.d1);
  out.k_md = out.ci.contains(-out.d2);
  return out;
}

LrTestOutcome lr_test(const CycleWaits& waits, const WaitDist& exact, const WaitDist& approx, int B, double alpha,
                      std::uint64_t seed) {
  return lr_test(waits, exact, approx, kl_divergences(exact, approx), B, alpha, seed);
}

FarMdr far_mdr(std::span<const NullTestOutcome> outcomes) {
  if (outcomes.empty()) throw ValidationError("far_mdr: no outcomes");
  FarMdr r;
  r.runs = static_cast<int>(outcomes.size());
  double ex = 0.0, apx = 0.0;
  for (const auto& o : outcomes) {
    ex += o.h_ex;
    apx += o.h_apx;
  }
  r.far = ex / r.runs;
  r.mdr = 1.0 - apx / r.runs;
  return r;
}

FarMdr far_mdr(std::span<const LrTestOutcome> outcomes) {
  if (outcomes.empty()) throw ValidationError("far_mdr: no outcomes");
  FarMdr r;
  r.runs = static_cast<int>(outcomes.size());
  for (const auto& o : outcomes) {
    r.far += o.h_fa;
    r.mdr += o.h_md;
    r.far_kl += o.k_fa;
    r.mdr_kl += o.k_md;
  }
  r.far /= r.runs;
  r.mdr /= r.runs;
  r.far_kl /= r.runs;
  r.mdr_kl /= r.runs;
  return r;
}

}  // namespace offload::stats
