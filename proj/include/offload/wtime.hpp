#pragma once

// Ambulance vehicle-queue waiting times. Every distribution here is a positive mixture of
// exponentials, SF(t) = sum_i c_i exp(-lambda_i t), with an optional atom at zero for the
// unconditional form. Time is measured in units of 1/(N mu).

#include <string>
#include <vector>

#include "offload/analytic.hpp"
#include "offload/params.hpp"
#include "offload/qlen.hpp"

namespace offload {

enum class WaitKind { exact, approximate };

struct MixtureWeights {
  double alpha = 1;    ///< weight of the high-priority component
  double beta = 0;     ///< 1/alpha - 1
  double chi_eff = 0;  ///< chi implied by alpha through alpha = nu_hi / (nu_hi + chi_eff (1 - nu_hi))
};

struct WaitDist {
  WaitKind kind = WaitKind::exact;
  double atom0 = 0;  ///< unconditional P(W = 0)
  std::vector<double> coef;
  std::vector<double> rate;
  std::vector<double> pdf_coef;  ///< coef * rate
  MixtureWeights weights;
  CutGeometry geometry;
  int quadrature_points = 0;
  bool degenerate = false;  ///< nobody enters the vehicle queue; the law is a point mass at 0
  std::string diagnostic;

  /// Builds a mixture from (coef, rate); coef need not sum to 1 exactly.
  static WaitDist mixture(std::vector<double> coef, std::vector<double> rate, double atom0 = 0.0,
                          WaitKind kind = WaitKind::exact);
  static WaitDist exponential(double rate, double atom0 = 0.0);

  /// Conditional on a positive wait.
  double sf(double t) const;
  double pdf(double t) const;
  double mean() const;
  double second_moment() const;

  /// Including the atom at zero; unconditional_sf(0) = P(W > 0).
  double unconditional_sf(double t) const;
  double unconditional_mean() const;
};

/// Numerator components chi * SF^(M)_med(t) of the APOT-shifted intermediate ambulance wait.
/// With p = 1, q = 0 and M = 0 this is the plain intermediate wait of the two-level queue.
struct ExpComponents {
  std::vector<double> coef;
  std::vector<double> rate;
  int L = 0;
  double delta = 0;
};

ExpComponents med_wait_components(const CutGeometry& geom, int M, const NumericsConfig& numerics = {},
                                  QuadratureKind kind = QuadratureKind::chebyshev1);

/// SF^(M)_med(t) for the parameter set; chi must match the parameters' APOT size.
double exact_med_sf(double t, const ModelParams& params, double chi, const NumericsConfig& numerics = {});

/// Exact vehicle wait: high-priority exponential mixed with the shifted intermediate wait.
WaitDist exact_vehicle_dist(const VehicleQueueSolution& sol, const NumericsConfig& numerics = {});
WaitDist exact_vehicle_dist(const ModelParams& params, const NumericsConfig& numerics = {});

/// Level-2 waiting-time PDF/SF of a two-level queue with intensities r1 >= 0 (high), r2 > 0.
WaitDist approx_level2_dist(double r1, double r2, const NumericsConfig& numerics = {});
double approx_level2_pdf(double t, double r1, double r2, const NumericsConfig& numerics = {});
double approx_level2_sf(double t, double r1, double r2, const NumericsConfig& numerics = {});

enum class AlphaSource { littles_law, least_squares };

/// Sampled conditional SF used by the least-squares route.
struct EmpiricalSf {
  std::vector<double> t;
  std::vector<double> sf;
};

/// alpha P_1 + (1 - alpha) P_2. alpha comes from the mean wait of patients entering the vehicle
/// queue, or from a least-squares fit to `fit`; values outside [0, 1] are clamped and noted.
WaitDist approx_vehicle_dist(const VehicleQueueSolution& sol, AlphaSource source = AlphaSource::littles_law,
                             const EmpiricalSf* fit = nullptr, const NumericsConfig& numerics = {});
WaitDist approx_vehicle_dist(const ModelParams& params, AlphaSource source = AlphaSource::littles_law,
                             const EmpiricalSf* fit = nullptr, const NumericsConfig& numerics = {});

MixtureWeights weights_from_alpha(double alpha, double nu_hi);

/// t with unconditional SF(t) = 1 - level; 0 when the atom already covers the level.
double percentile_wait(const WaitDist& dist, double level);

}  // namespace offload
