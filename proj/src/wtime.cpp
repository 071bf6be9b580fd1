#include "offload/wtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "offload/kernels.hpp"

namespace offload {

WaitDist WaitDist::mixture(std::vector<double> coef, std::vector<double> rate, double atom0, WaitKind kind) {
  if (coef.size() != rate.size()) throw ValidationError("WaitDist: coef/rate size mismatch");
  WaitDist d;
  d.kind = kind;
  d.atom0 = atom0;
  d.coef = std::move(coef);
  d.rate = std::move(rate);
  d.pdf_coef.resize(d.coef.size());
  for (std::size_t i = 0; i < d.coef.size(); ++i) {
    if (!(d.rate[i] > 0.0)) throw ValidationError("WaitDist: rates must be positive");
    d.pdf_coef[i] = d.coef[i] * d.rate[i];
  }
  return d;
}

WaitDist WaitDist::exponential(double rate, double atom0) { return mixture({1.0}, {rate}, atom0); }

double WaitDist::sf(double t) const {
  if (t < 0.0) return 1.0;
  return simd::exp_weighted_sum(coef, rate, t);
}

double WaitDist::pdf(double t) const {
  if (t < 0.0) return 0.0;
  return simd::exp_weighted_sum(pdf_coef, rate, t);
}

double WaitDist::mean() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += coef[i] / rate[i];
  return acc;
}

double WaitDist::second_moment() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += 2.0 * coef[i] / (rate[i] * rate[i]);
  return acc;
}

double WaitDist::unconditional_sf(double t) const {
  if (t < 0.0) return 1.0;
  return (1.0 - atom0) * sf(t);
}

double WaitDist::unconditional_mean() const { return (1.0 - atom0) * mean(); }

namespace {

ExpComponents components_at(const CutGeometry& g, int M, int L, QuadratureKind kind) {
  ExpComponents out;
  out.L = L;
  if (g.pole_active) {
    const double s = g.sigma;
    out.coef.push_back((s * s - g.r_hi) / (s * g.r_med) * std::pow(g.p * s / (1.0 - g.q * s), M));
    out.rate.push_back(g.r_med * (1.0 - s) / s);
  }
  if (g.has_cut && L > 0) {
    const QuadratureRule rule = build_quadrature(g, L, kind);
    for (int k = 0; k < L; ++k) {
      const double u = rule.nodes[k];
      const double w = 0.25 * rule.weights[k];
      const double z = g.p / ((g.a_q + u) * g.x_dif);
      const double c = w * std::pow(z, M) / (g.c + u);
      if (c == 0.0) continue;
      out.coef.push_back(c);
      out.rate.push_back((g.c + u) * g.gamma);
    }
  }
  return out;
}

std::vector<double> probes(const ExpComponents& e) {
  static constexpr double kTimes[] = {1.0, 10.0, 50.0};
  std::vector<double> v(3 + std::size(kTimes), 0.0);
  for (std::size_t i = 0; i < e.coef.size(); ++i) {
    v[0] += e.coef[i];
    v[1] += e.coef[i] / e.rate[i];
    v[2] += e.coef[i] * e.rate[i];
  }
  for (std::size_t j = 0; j < std::size(kTimes); ++j) v[3 + j] = simd::exp_weighted_sum(e.coef, e.rate, kTimes[j]);
  return v;
}

}  // namespace

ExpComponents med_wait_components(const CutGeometry& geom, int M, const NumericsConfig& numerics,
                                  QuadratureKind kind) {
  if (M < 0) throw ValidationError("med_wait_components: M must be >= 0");
  if (!geom.has_cut) return components_at(geom, M, 0, kind);
  int L_final = 0;
  double delta = 0.0;
  const auto refined = refine_vector_to_tolerance(
      [&](int L) { return probes(components_at(geom, M, L, kind)); }, numerics.quad_tol,
      numerics.quad_max_points);
  L_final = refined.L;
  delta = refined.delta;
  ExpComponents out = components_at(geom, M, L_final, kind);
  out.delta = delta;
  return out;
}

double exact_med_sf(double t, const ModelParams& params, double chi, const NumericsConfig& numerics) {
  if (t < 0.0) throw ValidationError("exact_med_sf: t must be >= 0");
  if (!(chi > 0.0)) throw ValidationError("exact_med_sf: chi must be positive");
  const DerivedRates rates = derive_rates(params);
  const ExpComponents e = med_wait_components(cut_geometry(rates), params.M(), numerics);
  return simd::exp_weighted_sum(e.coef, e.rate, t) / chi;
}

MixtureWeights weights_from_alpha(double alpha, double nu_hi) {
  MixtureWeights w;
  w.alpha = alpha;
  w.beta = alpha > 0.0 ? 1.0 / alpha - 1.0 : std::numeric_limits<double>::infinity();
  w.chi_eff = nu_hi < 1.0 ? nu_hi * w.beta / (1.0 - nu_hi) : 0.0;
  return w;
}

WaitDist exact_vehicle_dist(const VehicleQueueSolution& sol, const NumericsConfig& numerics) {
  const DerivedRates& r = sol.rates;
  const double nu_hi = r.nu_hi;
  const double med_weight = sol.chi * (1.0 - nu_hi);
  const double enter = nu_hi + med_weight;

  if (!(enter > 0.0)) {
    WaitDist d;
    d.atom0 = 1.0;
    d.degenerate = true;
    d.diagnostic = "no ambulance patient ever enters the vehicle queue; point mass at zero";
    return d;
  }

  std::vector<double> coef, rate;
  if (nu_hi > 0.0) {
    coef.push_back(nu_hi / enter);
    rate.push_back(1.0 - r.r_hi);
  }
  const CutGeometry g = cut_geometry(r);
  int L = 0;
  if (med_weight > 0.0 && r.p > 0.0) {
    // chi * SF_med is what the components carry, so chi drops out of the weight.
    const ExpComponents e = med_wait_components(g, sol.M, numerics);
    L = e.L;
    for (std::size_t i = 0; i < e.coef.size(); ++i) {
      coef.push_back((1.0 - nu_hi) * e.coef[i] / enter);
      rate.push_back(e.rate[i]);
    }
  }
  WaitDist d = WaitDist::mixture(std::move(coef), std::move(rate), 1.0 - (1.0 - sol.p_nw) * enter);
  d.weights = weights_from_alpha(nu_hi / enter, nu_hi);
  d.weights.chi_eff = sol.chi;
  d.geometry = g;
  d.quadrature_points = L;
  return d;
}

WaitDist exact_vehicle_dist(const ModelParams& params, const NumericsConfig& numerics) {
  return exact_vehicle_dist(solve_vehicle_queue(params, numerics), numerics);
}

WaitDist approx_level2_dist(double r1, double r2, const NumericsConfig& numerics) {
  const CutGeometry g = cut_geometry(r1, r2);
  ExpComponents e = med_wait_components(g, 0, numerics);
  WaitDist d = WaitDist::mixture(std::move(e.coef), std::move(e.rate), 0.0, WaitKind::approximate);
  d.geometry = g;
  d.quadrature_points = e.L;
  return d;
}

double approx_level2_pdf(double t, double r1, double r2, const NumericsConfig& numerics) {
  if (t < 0.0) throw ValidationError("approx_level2_pdf: t must be >= 0");
  return approx_level2_dist(r1, r2, numerics).pdf(t);
}

double approx_level2_sf(double t, double r1, double r2, const NumericsConfig& numerics) {
  if (t < 0.0) throw ValidationError("approx_level2_sf: t must be >= 0");
  return approx_level2_dist(r1, r2, numerics).sf(t);
}

WaitDist approx_vehicle_dist(const VehicleQueueSolution& sol, AlphaSource source, const EmpiricalSf* fit,
                             const NumericsConfig& numerics) {
  const DerivedRates& r = sol.rates;
  const double nu_hi = r.nu_hi;
  const double enter = nu_hi + sol.chi * (1.0 - nu_hi);
  if (!(enter > 0.0) || !(r.r_amb > 0.0)) {
    WaitDist d;
    d.kind = WaitKind::approximate;
    d.atom0 = 1.0;
    d.degenerate = true;
    d.diagnostic = "no ambulance patient ever enters the vehicle queue; point mass at zero";
    return d;
  }

  const WaitDist p1 = WaitDist::exponential(1.0 - r.r_hi);
  const WaitDist p2 = approx_level2_dist(r.r_hi, r.r_med, numerics);
  double alpha = 0.0;
  std::string diag;
  if (source == AlphaSource::littles_law) {
    const LevelMoments lm = level_moments(r);
    const double w1 = lm.mean_W_c[0];
    const double w2 = lm.mean_W_c[1];
    const double l_amb = lm.mean_L_c[0] + sol.med_shifted_conditional.mean;
    const double w_amb = l_amb / (r.r_amb * enter);
    alpha = (w_amb - w2) / (w1 - w2);
  } else {
    if (fit == nullptr || fit->t.empty() || fit->t.size() != fit->sf.size()) {
      throw ValidationError("approx_vehicle_dist: least-squares route needs a non-empty empirical SF");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fit->t.size(); ++j) {
      const double f1 = p1.sf(fit->t[j]);
      const double f2 = p2.sf(fit->t[j]);
      num += (f1 - f2) * (fit->sf[j] - f2);
      den += (f1 - f2) * (f1 - f2);
    }
    if (!(den > 0.0)) throw ValidationError("approx_vehicle_dist: empirical grid cannot separate the components");
    alpha = num / den;
  }
  if (alpha < 0.0 || alpha > 1.0) {
    diag = "mixture alpha " + std::to_string(alpha) + " outside [0, 1]; clamped";
    alpha = std::clamp(alpha, 0.0, 1.0);
  }

  std::vector<double> coef, rate;
  coef.push_back(alpha);
  rate.push_back(p1.rate[0]);
  for (std::size_t i = 0; i < p2.coef.size(); ++i) {
    coef.push_back((1.0 - alpha) * p2.coef[i]);
    rate.push_back(p2.rate[i]);
  }
  WaitDist d = WaitDist::mixture(std::move(coef), std::move(rate), 1.0 - (1.0 - sol.p_nw) * enter,
                                 WaitKind::approximate);
  d.weights = weights_from_alpha(alpha, nu_hi);
  d.geometry = p2.geometry;
  d.quadrature_points = p2.quadrature_points;
  d.diagnostic = diag;
  return d;
}

WaitDist approx_vehicle_dist(const ModelParams& params, AlphaSource source, const EmpiricalSf* fit,
                             const NumericsConfig& numerics) {
  return approx_vehicle_dist(solve_vehicle_queue(params, numerics), source, fit, numerics);
}

double percentile_wait(const WaitDist& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("percentile_wait: level must lie in (0, 1)");
  if (dist.atom0 >= level) return 0.0;
  const double target = 1.0 - level;
  double lo = 0.0, hi = 1.0;
  int expansions = 0;
  while (dist.unconditional_sf(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 80) {
      throw ConvergenceError("percentile_wait: could not bracket the quantile", hi, hi - lo);
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist.unconditional_sf(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace offload
