#pragma once

// Wait-conditional queue-length distributions on the ambulance side: the thinned joint PMF of
// (high-level queue, intermediate ambulance queue), the APOT shift, the vehicle-queue aggregate
// and APOT occupancy.

#include <vector>

#include "offload/analytic.hpp"
#include "offload/params.hpp"

namespace offload {

/// P^c_amb(l, m) for 0 <= l <= l_max, 0 <= m <= m_max, stored row-major in l.
struct JointPmfTable {
  int l_max = 0;
  int m_max = 0;
  std::vector<double> pole;
  std::vector<double> cut;
  std::vector<double> values;
  double tail_mass = 0;  ///< 1 - sum(values)
  bool wait_conditional = true;
  bool hit_cap = false;  ///< bounds stopped at the configured cap before tail_mass_tol was met
  int quadrature_points = 0;
  double quadrature_delta = 0;
  CutGeometry geometry;

  double at(int l, int m) const { return values[static_cast<std::size_t>(l) * (m_max + 1) + m]; }
  std::size_t index(int l, int m) const { return static_cast<std::size_t>(l) * (m_max + 1) + m; }

  /// P^c_med(m): sum over l.
  std::vector<double> med_marginal() const;
  /// Sum over m.
  std::vector<double> hi_marginal() const;
};

/// Fixed bounds; the quadrature is refined until the whole table moves by less than quad_tol.
JointPmfTable joint_amb_pmf(const DerivedRates& rates, int l_max, int m_max, const NumericsConfig& numerics,
                            QuadratureKind kind = QuadratureKind::chebyshev1);

/// Bounds grown until the captured mass reaches 1 - tail_mass_tol (or table_cap is hit);
/// m_max is at least min_m_max.
JointPmfTable joint_amb_pmf(const DerivedRates& rates, const NumericsConfig& numerics, int min_m_max = 0,
                            QuadratureKind kind = QuadratureKind::chebyshev1);

/// Queue-length PMF with its SF F(n) = P(X > n). Mass not captured by the table is tail_mass and
/// is carried inside every sf entry.
struct DiscreteDist {
  std::vector<double> pmf;
  std::vector<double> sf;
  double mean = 0;
  double second_moment = 0;
  double atom0 = 0;
  double tail_mass = 0;

  static DiscreteDist from_pmf(std::vector<double> pmf);
  /// P_NW * delta_0 + (1 - P_NW) * this.
  DiscreteDist unconditioned(double p_nw) const;
};

/// Probability that the APOT is full given the ED is full.
double chi(const JointPmfTable& table, int M);

/// Intermediate vehicle-queue marginal P^c_M(n) = delta_n0 sum_{m<M} P_med(m) + P_med(n+M).
DiscreteDist apot_shift(const JointPmfTable& table, int M);

/// Closed form of the mean of apot_shift: p L_2 - M + sum_{m<M} (M-m) P_med(m).
double apot_shift_mean(const DerivedRates& rates, const std::vector<double>& med_marginal, int M);

/// High queue plus shifted intermediate queue, wait-conditional.
DiscreteDist vehicle_queue_conditional(const JointPmfTable& table, int M);

/// APOT occupancy on {0..M}, wait-conditional. Requires M >= 1.
DiscreteDist apot_occupancy(const JointPmfTable& table, int M);

/// Everything the ambulance side needs for one parameter set.
struct VehicleQueueSolution {
  DerivedRates rates;
  int M = 0;
  double p_nw = 0;
  double chi = 1;
  JointPmfTable table;
  DiscreteDist vehicle_conditional;
  DiscreteDist vehicle;  ///< unconditional
  DiscreteDist med_shifted_conditional;
  DiscreteDist apot_conditional;  ///< empty when M = 0
  DiscreteDist apot;              ///< unconditional, empty when M = 0
};

VehicleQueueSolution solve_vehicle_queue(const ModelParams& params, const NumericsConfig& numerics = {});

/// Reuses a table built for the same rates (it does not depend on M, only needs m_max >= M).
VehicleQueueSolution solve_vehicle_queue(const ModelParams& params, const JointPmfTable& table);

/// Unconditional vehicle-queue distribution.
DiscreteDist vehicle_queue_dist(const ModelParams& params, const NumericsConfig& numerics = {});

/// Smallest n with P(X <= n) >= level.
int percentile_qlen(const DiscreteDist& dist, double level);

}  // namespace offload
