#pragma once

// Measures of performance: offload delay rate (exact and exponential ansatz), geometric fits of
// queue-length SFs, and sweeps over the APOT size.

#include <optional>
#include <string>
#include <vector>

#include "offload/params.hpp"
#include "offload/qlen.hpp"

namespace offload {

inline constexpr double kDaysPerMonth = 30.0;

/// 30 x unconditional mean vehicle-queue length: ambulance-days lost per month.
double offload_delay_rate_exact(const ModelParams& params, const NumericsConfig& numerics = {});
double offload_delay_rate_exact(const VehicleQueueSolution& sol);

/// Large-M limit, where only high-priority ambulances still queue.
double offload_delay_rate_limit(const ModelParams& params);

/// Atom and decay of a geometric-with-atom law with the given first two moments:
/// P(0) = 1 - 2 mean^2 / (mean + second_moment), t = 1 - (1 - P(0)) / mean.
struct AnsatzDecay {
  double p0;
  double t;
};

AnsatzDecay ansatz_decay(double mean, double second_moment);

struct AnsatzResult {
  double p20 = 0;         ///< P(no intermediate patient waits), from the first two moments
  double t_prime = 0;     ///< decay of the intermediate queue
  double p_amb_med = 0;   ///< P(no intermediate ambulance waits)
  double t = 0;           ///< decay of the intermediate ambulance queue
  double mean_hi = 0;     ///< unconditional
  double mean_amb_med = 0;
  double delay_rate = 0;
  std::string diagnostic;  ///< set when t falls outside [0, 1)
};

AnsatzResult exponential_ansatz(const ModelParams& params);
double offload_delay_rate_ansatz(const ModelParams& params);

struct GeomFit {
  double rho = 0;
  double F0 = 0;
  double mean = 0;

  /// -log10(F0 rho^n).
  double H(int n) const;
};

GeomFit geometric_fit(const DiscreteDist& dist);

struct MopRow {
  int M = 0;
  double mean_qlen = 0;
  double p90_qlen = 0;
  double mean_wait = 0;  ///< units of 1/mu
  double p90_wait = 0;   ///< units of 1/mu
  double p90_wait_scaled = 0;  ///< lambda_amb * p90_wait, dimensionless
  double chi = 0;
  double delay_rate_exact = 0;
  double delay_rate_ansatz = 0;

  bool has_sim = false;
  double sim_mean_qlen = 0;
  double sim_p90_qlen = 0;
  double sim_mean_wait = 0;
  double sim_p90_wait = 0;
  double sim_delay_rate = 0;

  std::string error;  ///< non-empty when this row failed; the sweep carries on
};

/// One row per M. The joint table is built once for the largest M and reused.
std::vector<MopRow> sweep(const ModelParams& params, const std::vector<int>& M_range, bool include_sim = false,
                          const SimConfig& sim = {}, const NumericsConfig& numerics = {});

}  // namespace offload
