#include "offload/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "offload/error.hpp"

namespace offload {

using std::numbers::pi;

ZetaPair zeta_pm(cplx z, double r_level, double sigma_prev) {
  if (!(r_level > 0.0)) throw ValidationError("zeta_pm: r_level must be positive");
  const double sigma = sigma_prev + r_level;
  const double midpoint = 1.0 + (1.0 + sigma_prev) / r_level;
  const cplx b = 1.0 + sigma - r_level * z;

  cplx root;  // xi(z) * sqrt(Delta(z))
  if (z.imag() == 0.0) {
    const double br = b.real();
    const double delta = br * br - 4.0 * sigma_prev;
    if (delta < 0.0) {
      root = cplx(0.0, -std::sqrt(-delta));  // upper edge of the cut
    } else {
      const double s = std::sqrt(delta);
      root = z.real() <= midpoint ? s : -s;
    }
  } else {
    const cplx s = std::sqrt(b * b - 4.0 * sigma_prev);
    root = z.real() <= midpoint ? s : -s;
  }

  // Take the larger-magnitude root directly and the other from the product of roots.
  const cplx w_plus = 0.5 * (b + root);
  const cplx w_minus = 0.5 * (b - root);
  if (std::abs(w_plus) >= std::abs(w_minus)) {
    return {w_plus, w_plus == 0.0 ? cplx(0.0) : sigma_prev / w_plus};
  }
  return {sigma_prev / w_minus, w_minus};
}

double no_wait_probability(int N, double r) {
  if (N < 1) throw ValidationError("no_wait_probability: N must be >= 1");
  if (!(r > 0.0 && r < 1.0)) throw ValidationError("no_wait_probability: r must lie in (0, 1)");
  // 1/(1-P) = 1 + (1-r) S with S = sum_{j=1..N} N!/((N-j)! a^j), a = N r.
  const double a = N * r;
  std::vector<double> log_terms;
  log_terms.reserve(static_cast<std::size_t>(N));
  double log_t = 0.0;
  for (int j = 1; j <= N; ++j) {
    log_t += std::log(static_cast<double>(N - j + 1) / a);
    log_terms.push_back(log_t);
  }
  const double peak = *std::max_element(log_terms.begin(), log_terms.end());
  double acc = 0.0;
  for (double lt : log_terms) acc += std::exp(lt - peak);
  const double log_x = std::log1p(-r) + peak + std::log(acc);
  return 1.0 / (1.0 + std::exp(-log_x));
}

cplx marginal_pgf(cplx z, Level level, const DerivedRates& rates) {
  if (level == Level::hi) {
    const cplx den = 1.0 - rates.r_hi * z;
    if (den == 0.0) throw std::domain_error("marginal_pgf: pole of the high-level PGF at z = 1/r_hi");
    return (1.0 - rates.r_hi) / den;
  }
  const ZetaPair zeta = zeta_pm(z, rates.r_med, rates.r_hi);
  return (1.0 - rates.sigma) / (zeta.plus - rates.sigma);
}

LevelMoments level_moments(const DerivedRates& rates) {
  LevelMoments out{};
  const double s_prev[2] = {0.0, rates.r_hi};
  const double s_cur[2] = {rates.r_hi, rates.sigma};
  const double r_lvl[2] = {rates.r_hi, rates.r_med};
  for (int k = 0; k < 2; ++k) {
    const double a = 1.0 - s_cur[k];
    const double b = 1.0 - s_prev[k];
    out.mean_W_c[k] = 1.0 / (a * b);
    out.mean_L_c[k] = r_lvl[k] * out.mean_W_c[k];
    out.second_W_c[k] = 2.0 * (1.0 - s_cur[k] * s_prev[k]) / (a * a * b * b * b);
    out.second_L_c[k] = out.mean_L_c[k] + r_lvl[k] * r_lvl[k] * out.second_W_c[k];
  }
  return out;
}

namespace {

CutGeometry make_geometry(double r1, double r2, double p, double q) {
  CutGeometry g;
  g.r_hi = r1;
  g.r_med = r2;
  g.sigma = r1 + r2;
  g.p = p;
  g.q = q;
  g.pole_location = 1.0 / g.sigma;
  g.pole_active = g.sigma * g.sigma > r1;
  g.has_cut = r1 > 0.0;
  if (!g.has_cut) return g;

  const double s = std::sqrt(r1);
  g.x_minus = 1.0 + (1.0 - s) * (1.0 - s) / r2;
  g.x_plus = 1.0 + (1.0 + s) * (1.0 + s) / r2;
  g.x_dif = 4.0 * s / r2;
  g.a_q = (g.x_minus - q) / g.x_dif;
  // (x- - 1/sigma)/x_dif written as a square so that b >= 0 holds exactly.
  g.b = (g.sigma - s) * (g.sigma - s) / (4.0 * g.sigma * s);
  g.gamma = 4.0 * s;
  g.c = (1.0 - s) * (1.0 - s) / g.gamma;
  return g;
}

}  // namespace

CutGeometry cut_geometry(const DerivedRates& rates) { return make_geometry(rates.r_hi, rates.r_med, rates.p, rates.q); }

CutGeometry cut_geometry(double r1, double r2) {
  if (!(r1 >= 0.0 && r2 > 0.0 && r1 + r2 < 1.0)) {
    throw ValidationError("cut_geometry: need r1 >= 0, r2 > 0, r1 + r2 < 1");
  }
  return make_geometry(r1, r2, 1.0, 0.0);
}

QuadratureRule build_quadrature(const CutGeometry& geom, int L, QuadratureKind kind) {
  if (L < 1) throw ValidationError("build_quadrature: L must be >= 1");
  QuadratureRule rule;
  rule.kind = kind;
  rule.L = L;
  const auto n = static_cast<std::size_t>(L);
  rule.tau.resize(n);
  rule.tau_complement.resize(n);
  rule.nodes.resize(n);
  rule.one_minus_nodes.resize(n);
  rule.weights.resize(n);

  const double prefactor = 2.0 * (1.0 - geom.sigma) / (geom.sigma * L);
  for (int k = 1; k <= L; ++k) {
    const double twice_num = kind == QuadratureKind::chebyshev1 ? 2.0 * k - 1.0 : 2.0 * k;
    const double twice_comp = 2.0 * L - twice_num;
    const double tau = twice_num / (2.0 * L);
    const double comp = twice_comp / (2.0 * L);
    double u, one_minus_u;
    if (tau <= 0.5) {
      const double cs = std::cos(0.5 * pi * tau), sn = std::sin(0.5 * pi * tau);
      u = cs * cs;
      one_minus_u = sn * sn;
    } else {
      const double cs = std::cos(0.5 * pi * comp), sn = std::sin(0.5 * pi * comp);
      u = sn * sn;
      one_minus_u = cs * cs;
    }
    const auto i = static_cast<std::size_t>(k - 1);
    rule.tau[i] = tau;
    rule.tau_complement[i] = comp;
    rule.nodes[i] = u;
    rule.one_minus_nodes[i] = one_minus_u;
    const double shape = geom.b == 0.0 ? 1.0 : u / (u + geom.b);
    rule.weights[i] = prefactor * one_minus_u * shape;
  }
  return rule;
}

double chebyshev_ratio(int l, double tau, double tau_complement) {
  if (l == 0) return 0.0;
  if (tau <= 0.5) {
    const double sign = (l - 1) % 2 == 0 ? 1.0 : -1.0;
    if (tau == 0.0) return sign * l;
    return sign * std::sin(l * pi * tau) / std::sin(pi * tau);
  }
  if (tau_complement == 0.0) return static_cast<double>(l);
  return std::sin(l * pi * tau_complement) / std::sin(pi * tau_complement);
}

RefineResult refine_to_tolerance(const std::function<double(int L)>& evaluate, double tol, int max_points) {
  int L = kQuadratureStartPoints;
  double value = evaluate(L);
  double delta = std::numeric_limits<double>::infinity();
  while (2 * L <= max_points) {
    L *= 2;
    const double next = evaluate(L);
    delta = std::abs(next - value);
    value = next;
    if (delta < tol) return {value, delta, L};
  }
  throw ConvergenceError("quadrature did not reach tolerance before the point cap", value, delta);
}

RefineVectorResult refine_vector_to_tolerance(const std::function<std::vector<double>(int L)>& evaluate,
                                              double tol, int max_points) {
  int L = kQuadratureStartPoints;
  std::vector<double> value = evaluate(L);
  double delta = std::numeric_limits<double>::infinity();
  while (2 * L <= max_points) {
    L *= 2;
    std::vector<double> next = evaluate(L);
    if (next.size() != value.size()) throw std::logic_error("refine: evaluator changed result size");
    delta = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) delta = std::max(delta, std::abs(next[i] - value[i]));
    value = std::move(next);
    if (delta < tol) return {std::move(value), delta, L};
  }
  const double best = value.empty() ? 0.0 : value.front();
  throw ConvergenceError("quadrature did not reach tolerance before the point cap", best, delta);
}

double lambda_q(const CutGeometry& geom, const QuadratureRule& rule, int l, int m) {
  if (!geom.has_cut) return 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double c = chebyshev_ratio(l, rule.tau[k], rule.tau_complement[k]);
    acc += rule.weights[k] * c * std::pow(geom.x_dif * (geom.a_q + rule.nodes[k]), -m);
  }
  return std::pow(geom.r_hi, 0.5 * l) * acc;
}

}  // namespace offload
