#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "offload/error.hpp"

namespace offload {

/// Free parameters of the offload-zone model. Validated on construction.
class ModelParams {
 public:
  /// Throws ValidationError unless N >= 1, M >= 0, mu > 0, 0 < r < 1 and every nu in [0, 1].
  ModelParams(int N, int M, double mu, double r, double nu_amb, double nu_hi, double nu_lo);

  int N() const noexcept { return N_; }
  int M() const noexcept { return M_; }
  double mu() const noexcept { return mu_; }
  double r() const noexcept { return r_; }
  double nu_amb() const noexcept { return nu_amb_; }
  double nu_hi() const noexcept { return nu_hi_; }
  double nu_lo() const noexcept { return nu_lo_; }

  /// Total service capacity N*mu; the scale that turns physical time into the solver's time.
  double capacity() const noexcept { return N_ * mu_; }

  ModelParams with_apot(int M) const;
  ModelParams with_nu_amb(double nu_amb) const;

  /// The standard test case: N=10, M=6, mu=1, r=0.95, nu_amb=2/3, nu_hi=2/3, nu_lo=0.10.
  static ModelParams reference();

 private:
  int N_;
  int M_;
  double mu_;
  double r_;
  double nu_amb_;
  double nu_hi_;
  double nu_lo_;
};

/// Rates and fractions derived from ModelParams. Rates are per unit physical time;
/// intensities are dimensionless (rate / (N mu)).
struct DerivedRates {
  double lambda_amb = 0, lambda_wlk = 0;
  double lambda_hi = 0, lambda_med = 0, lambda_lo = 0;
  double r_amb = 0, r_wlk = 0;
  double r_hi = 0, r_med = 0, r_lo = 0;
  double r = 0;
  double sigma = 0;  ///< r_hi + r_med, total intensity of the reduced two-level model
  double p = 0;      ///< share of intermediate-level arrivals that come by ambulance
  double q = 0;      ///< 1 - p
  double f_hi = 0, f_med = 0, f_lo = 0;
  double nu_hi = 0;
};

/// Throws DegenerateMixError when the intermediate class is empty.
DerivedRates derive_rates(const ModelParams& params);

struct TriageFractions {
  double f_hi;
  double f_lo;
  double nu_amb;
  double nu_hi;
  double nu_lo;
};

/// Triage categories T2 (high), T3+T4 (intermediate), T5 (low). The denominator is
/// T2+T3+T4+T5; nu_amb defaults to ambulance_count over that same total.
TriageFractions from_triage_counts(double t2, double t3, double t4, double t5, double ambulance_count,
                                   std::optional<double> nu_amb_override = std::nullopt);

struct SimConfig {
  double t_stop = 1e5;
  std::uint64_t seed = 1;
  int n_runs = 1;
};

struct NumericsConfig {
  double quad_tol = 1e-12;
  int quad_max_points = 1 << 20;
  double tail_mass_tol = 1e-10;
  int table_cap = 4096;
};

struct Config {
  ModelParams params = ModelParams::reference();
  SimConfig sim;
  NumericsConfig numerics;
};

/// Parses the JSON config object (keys N, M, mu, r, nu_amb, nu_hi, nu_lo and optional
/// `sim` / `numerics` blocks). Throws ValidationError on missing keys or bad values.
Config parse_config(const std::string& json_text);
Config load_config(const std::string& path);

}  // namespace offload
