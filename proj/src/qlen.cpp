#include "offload/qlen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "offload/kernels.hpp"

namespace offload {

std::vector<double> JointPmfTable::med_marginal() const {
  std::vector<double> out(static_cast<std::size_t>(m_max) + 1, 0.0);
  for (int l = 0; l <= l_max; ++l)
    for (int m = 0; m <= m_max; ++m) out[m] += at(l, m);
  return out;
}

std::vector<double> JointPmfTable::hi_marginal() const {
  std::vector<double> out(static_cast<std::size_t>(l_max) + 1, 0.0);
  for (int l = 0; l <= l_max; ++l)
    for (int m = 0; m <= m_max; ++m) out[l] += at(l, m);
  return out;
}

namespace {

std::vector<double> pole_table(const CutGeometry& g, int l_max, int m_max) {
  std::vector<double> out(static_cast<std::size_t>(l_max + 1) * (m_max + 1), 0.0);
  if (!g.pole_active) return out;
  const double s = g.sigma;
  const double base = (1.0 - s) * (1.0 - g.r_hi / (s * s)) / (1.0 - g.q * s);
  const double ratio_m = g.p * s / (1.0 - g.q * s);
  const double ratio_l = g.r_hi / s;
  for (int l = 0; l <= l_max; ++l) {
    const double row = base * std::pow(ratio_l, l);
    for (int m = 0; m <= m_max; ++m) {
      out[static_cast<std::size_t>(l) * (m_max + 1) + m] = row * std::pow(ratio_m, m);
    }
  }
  return out;
}

// Cut part p^m [Lambda(l+1,m) - Lambda(l,m+1) + q Lambda(l+1,m+1)] for the whole table at once:
// each row is a power-moment sum over the nodes with ratios p / (x_dif (a_q + U_k)) <= 1.
std::vector<double> cut_table(const CutGeometry& g, int l_max, int m_max, int L, QuadratureKind kind) {
  const std::size_t cols = static_cast<std::size_t>(m_max) + 1;
  std::vector<double> out(static_cast<std::size_t>(l_max + 1) * cols, 0.0);
  if (!g.has_cut) return out;

  const QuadratureRule rule = build_quadrature(g, L, kind);
  const auto n = static_cast<std::size_t>(L);
  std::vector<double> inv_y(n), z(n), v_cur(n, 0.0), v_next(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    inv_y[k] = 1.0 / (g.x_dif * (g.a_q + rule.nodes[k]));
    z[k] = g.p * inv_y[k];
  }
  const double root = std::sqrt(g.r_hi);
  double scale = 1.0;  // r_hi^{(l+1)/2}
  for (int l = 0; l <= l_max; ++l) {
    scale *= root;
    for (std::size_t k = 0; k < n; ++k) {
      v_next[k] = scale * rule.weights[k] * chebyshev_ratio(l + 1, rule.tau[k], rule.tau_complement[k]);
      w[k] = v_next[k] * (1.0 + g.q * inv_y[k]) - v_cur[k] * inv_y[k];
    }
    simd::power_moments(w, z, std::span<double>(out.data() + static_cast<std::size_t>(l) * cols, cols));
    std::swap(v_cur, v_next);
  }
  return out;
}

int geometric_extent(double rho, double tol) {
  if (!(rho > 0.0)) return 4;
  if (rho >= 1.0) return std::numeric_limits<int>::max();
  const double n = std::log(tol * (1.0 - rho) * (1.0 - rho) / 64.0) / std::log(rho);
  return std::max(4, static_cast<int>(std::ceil(n)) + 2);
}

}  // namespace

JointPmfTable joint_amb_pmf(const DerivedRates& rates, int l_max, int m_max, const NumericsConfig& numerics,
                            QuadratureKind kind) {
  if (l_max < 0 || m_max < 0) throw ValidationError("joint_amb_pmf: bounds must be non-negative");
  if (!(rates.sigma < 1.0)) throw ValidationError("joint_amb_pmf: sigma must be < 1");

  JointPmfTable t;
  t.l_max = l_max;
  t.m_max = m_max;
  t.geometry = cut_geometry(rates);
  t.pole = pole_table(t.geometry, l_max, m_max);
  if (t.geometry.has_cut) {
    const auto refined = refine_vector_to_tolerance(
        [&](int L) { return cut_table(t.geometry, l_max, m_max, L, kind); }, numerics.quad_tol,
        numerics.quad_max_points);
    t.cut = refined.value;
    t.quadrature_points = refined.L;
    t.quadrature_delta = refined.delta;
  } else {
    t.cut.assign(t.pole.size(), 0.0);
  }

  t.values.resize(t.pole.size());
  double total = 0.0;
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    t.values[i] = std::max(0.0, t.pole[i] + t.cut[i]);
    total += t.values[i];
  }
  t.tail_mass = 1.0 - total;
  return t;
}

JointPmfTable joint_amb_pmf(const DerivedRates& rates, const NumericsConfig& numerics, int min_m_max,
                            QuadratureKind kind) {
  const CutGeometry g = cut_geometry(rates);
  double rho_l = 0.0, rho_m = 0.0;
  if (g.pole_active) {
    rho_l = g.r_hi / g.sigma;
    rho_m = g.p * g.sigma / (1.0 - g.q * g.sigma);
  }
  if (g.has_cut) {
    rho_l = std::max(rho_l, std::sqrt(g.r_hi));
    rho_m = std::max(rho_m, g.p / (g.x_minus - g.q));
  }
  const int cap = numerics.table_cap;
  int l_max = std::min(cap, g.r_hi > 0.0 ? geometric_extent(rho_l, numerics.tail_mass_tol) : 0);
  int m_max = std::min(cap, std::max(min_m_max, geometric_extent(rho_m, numerics.tail_mass_tol)));
  m_max = std::max(m_max, min_m_max);

  for (;;) {
    JointPmfTable t = joint_amb_pmf(rates, l_max, m_max, numerics, kind);
    if (t.tail_mass <= numerics.tail_mass_tol) return t;
    if (l_max >= cap && m_max >= cap) {
      t.hit_cap = true;
      return t;
    }
    l_max = g.r_hi > 0.0 ? std::min(cap, l_max + l_max / 2 + 1) : 0;
    m_max = std::max(min_m_max, std::min(cap, m_max + m_max / 2 + 1));
  }
}

DiscreteDist DiscreteDist::from_pmf(std::vector<double> pmf) {
  DiscreteDist d;
  d.pmf = std::move(pmf);
  const double total = std::accumulate(d.pmf.begin(), d.pmf.end(), 0.0);
  d.tail_mass = std::max(0.0, 1.0 - total);
  d.sf.resize(d.pmf.size());
  double above = d.tail_mass;
  for (std::size_t n = d.pmf.size(); n-- > 0;) {
    d.sf[n] = above;
    above += d.pmf[n];
  }
  for (std::size_t n = 0; n < d.pmf.size(); ++n) {
    const double x = static_cast<double>(n);
    d.mean += x * d.pmf[n];
    d.second_moment += x * x * d.pmf[n];
  }
  d.atom0 = d.pmf.empty() ? 0.0 : d.pmf[0];
  return d;
}

DiscreteDist DiscreteDist::unconditioned(double p_nw) const {
  std::vector<double> out(pmf.size());
  for (std::size_t n = 0; n < pmf.size(); ++n) out[n] = (1.0 - p_nw) * pmf[n];
  if (out.empty()) out.push_back(0.0);
  out[0] += p_nw;
  DiscreteDist d = from_pmf(std::move(out));
  return d;
}

double chi(const JointPmfTable& table, int M) {
  if (M < 0) throw ValidationError("chi: M must be >= 0");
  if (M > table.m_max + 1) throw ValidationError("chi: table does not cover m < M");
  const std::vector<double> med = table.med_marginal();
  double below = 0.0;
  for (int m = 0; m < M; ++m) below += med[m];
  return 1.0 - below;
}

DiscreteDist apot_shift(const JointPmfTable& table, int M) {
  if (M < 0) throw ValidationError("apot_shift: M must be >= 0");
  if (M > table.m_max) throw ValidationError("apot_shift: table does not cover m = M");
  const std::vector<double> med = table.med_marginal();
  std::vector<double> pmf(static_cast<std::size_t>(table.m_max - M) + 1, 0.0);
  for (int m = 0; m <= table.m_max; ++m) pmf[static_cast<std::size_t>(std::max(0, m - M))] += med[m];
  return DiscreteDist::from_pmf(std::move(pmf));
}

double apot_shift_mean(const DerivedRates& rates, const std::vector<double>& med_marginal, int M) {
  if (static_cast<int>(med_marginal.size()) < M) throw ValidationError("apot_shift_mean: marginal too short");
  const LevelMoments lm = level_moments(rates);
  double acc = rates.p * lm.mean_L_c[1] - M;
  for (int m = 0; m < M; ++m) acc += (M - m) * med_marginal[m];
  return acc;
}

DiscreteDist vehicle_queue_conditional(const JointPmfTable& table, int M) {
  if (M < 0) throw ValidationError("vehicle_queue_conditional: M must be >= 0");
  if (M > table.m_max) throw ValidationError("vehicle_queue_conditional: table does not cover m = M");
  std::vector<double> pmf(static_cast<std::size_t>(table.l_max + table.m_max - M) + 1, 0.0);
  for (int l = 0; l <= table.l_max; ++l)
    for (int m = 0; m <= table.m_max; ++m) pmf[static_cast<std::size_t>(l + std::max(0, m - M))] += table.at(l, m);
  return DiscreteDist::from_pmf(std::move(pmf));
}

DiscreteDist apot_occupancy(const JointPmfTable& table, int M) {
  if (M < 1) throw ValidationError("apot_occupancy: M must be >= 1");
  if (M > table.m_max + 1) throw ValidationError("apot_occupancy: table does not cover m < M");
  const std::vector<double> med = table.med_marginal();
  std::vector<double> pmf(med.begin(), med.begin() + M);
  pmf.push_back(chi(table, M));
  return DiscreteDist::from_pmf(std::move(pmf));
}

VehicleQueueSolution solve_vehicle_queue(const ModelParams& params, const NumericsConfig& numerics) {
  return solve_vehicle_queue(params, joint_amb_pmf(derive_rates(params), numerics, params.M() + 1));
}

VehicleQueueSolution solve_vehicle_queue(const ModelParams& params, const JointPmfTable& table) {
  VehicleQueueSolution s;
  s.rates = derive_rates(params);
  s.M = params.M();
  s.p_nw = no_wait_probability(params.N(), params.r());
  s.table = table;
  s.chi = chi(s.table, s.M);
  s.vehicle_conditional = vehicle_queue_conditional(s.table, s.M);
  s.vehicle = s.vehicle_conditional.unconditioned(s.p_nw);
  s.med_shifted_conditional = apot_shift(s.table, s.M);
  if (s.M >= 1) {
    s.apot_conditional = apot_occupancy(s.table, s.M);
    s.apot = s.apot_conditional.unconditioned(s.p_nw);
  }
  return s;
}

DiscreteDist vehicle_queue_dist(const ModelParams& params, const NumericsConfig& numerics) {
  return solve_vehicle_queue(params, numerics).vehicle;
}

int percentile_qlen(const DiscreteDist& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("percentile_qlen: level must lie in (0, 1)");
  for (std::size_t n = 0; n < dist.sf.size(); ++n) {
    if (1.0 - dist.sf[n] >= level) return static_cast<int>(n);
  }
  return static_cast<int>(dist.sf.size());
}

}  // namespace offload
