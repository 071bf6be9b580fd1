#pragma once

// Generating-function machinery for the two-level reduced model (high and intermediate
// priority): the zeta branches, cut geometry, marginal PGFs, closed-form moments, and the
// Gauss-Chebyshev rule used to integrate along the branch cut.
//
// Time inside this module is measured in units of 1/(N mu).

#include <complex>
#include <functional>
#include <vector>

#include "offload/params.hpp"

namespace offload {

using cplx = std::complex<double>;

struct ZetaPair {
  cplx plus;
  cplx minus;
};

/// Roots of zeta^2 - b(z) zeta + sigma_prev = 0 with b(z) = 1 + sigma_prev + r_level - r_level z.
/// The sign function flips at Re z = (x+ + x-)/2 so both roots are analytic off the cut; on the
/// cut itself the upper-edge limit is returned.
ZetaPair zeta_pm(cplx z, double r_level, double sigma_prev);

/// Probability that an arrival finds a free server (complement of Erlang C). Evaluated in log
/// space, so N in the thousands is fine.
double no_wait_probability(int N, double r);

enum class Level { hi, med };

/// Wait-conditional marginal queue-length PGF of one level. Throws std::domain_error at the
/// pole z = 1/r_hi of the high level.
cplx marginal_pgf(cplx z, Level level, const DerivedRates& rates);

/// Wait-conditional means and second moments (queue length and waiting time, the latter in
/// units of 1/(N mu)). Index 0 is the high level, index 1 the intermediate level.
struct LevelMoments {
  double mean_L_c[2];
  double mean_W_c[2];
  double second_L_c[2];
  double second_W_c[2];
};

LevelMoments level_moments(const DerivedRates& rates);

/// Geometry of the branch cut [x-, x+] and pole 1/sigma of the two-level PGF, with the
/// ambulance thinning z -> p z + q folded into a_q.
struct CutGeometry {
  double sigma = 0;
  double r_hi = 0;
  double r_med = 0;
  double p = 1;
  double q = 0;
  double x_minus = 0;
  double x_plus = 0;
  double x_dif = 0;
  double a_q = 0;
  double b = 0;
  double c = 0;
  double gamma = 0;
  double pole_location = 0;
  bool pole_active = false;
  bool has_cut = false;  ///< false when r_hi = 0: the cut collapses and only the pole remains
};

CutGeometry cut_geometry(const DerivedRates& rates);

/// Same geometry for a bare two-level queue with intensities r1 (high) and r2 (low), no thinning.
CutGeometry cut_geometry(double r1, double r2);

enum class QuadratureKind { chebyshev1, chebyshev2 };

/// Nodes U_k = cos^2(pi tau_k / 2) with midpoint (first kind) or trapezoid (second kind)
/// tau grids, and weights W_k = 2(1-sigma)/(sigma L) * (1-U_k)/(1+b/U_k).
/// `tau_complement` holds 1 - tau_k computed from integers, for accurate evaluation near tau = 1.
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::chebyshev1;
  int L = 0;
  std::vector<double> tau;
  std::vector<double> tau_complement;
  std::vector<double> nodes;
  std::vector<double> one_minus_nodes;
  std::vector<double> weights;
};

QuadratureRule build_quadrature(const CutGeometry& geom, int L, QuadratureKind kind);

/// C_l(U_k) = (-1)^(l-1) sin(l pi tau_k) / sin(pi tau_k), with C_l = l at U = 0.
double chebyshev_ratio(int l, double tau, double tau_complement);

struct RefineResult {
  double value;
  double delta;
  int L;
};

struct RefineVectorResult {
  std::vector<double> value;
  double delta;
  int L;
};

constexpr int kQuadratureStartPoints = 16;

/// Doubles L from 16 until successive evaluations differ by less than tol (absolute), throwing
/// ConvergenceError (carrying the best value and last delta) once L would exceed max_points.
RefineResult refine_to_tolerance(const std::function<double(int L)>& evaluate, double tol, int max_points);

/// Vector variant; convergence is judged on the max-abs difference.
RefineVectorResult refine_vector_to_tolerance(const std::function<std::vector<double>(int L)>& evaluate, double tol,
                                              int max_points);

/// Cut integral Lambda_q(l, m) evaluated with an explicit rule (no refinement).
double lambda_q(const CutGeometry& geom, const QuadratureRule& rule, int l, int m);

}  // namespace offload
