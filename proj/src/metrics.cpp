#include "offload/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "offload/analytic.hpp"
#include "offload/parallel.hpp"
#include "offload/sim.hpp"
#include "offload/wtime.hpp"

namespace offload {

double offload_delay_rate_exact(const VehicleQueueSolution& sol) { return kDaysPerMonth * sol.vehicle.mean; }

double offload_delay_rate_exact(const ModelParams& params, const NumericsConfig& numerics) {
  return offload_delay_rate_exact(solve_vehicle_queue(params, numerics));
}

double offload_delay_rate_limit(const ModelParams& params) {
  const DerivedRates r = derive_rates(params);
  const double p_nw = no_wait_probability(params.N(), params.r());
  return kDaysPerMonth * (1.0 - p_nw) * level_moments(r).mean_L_c[0];
}

AnsatzDecay ansatz_decay(double mean, double second_moment) {
  if (!(mean > 0.0)) throw ValidationError("ansatz_decay: mean must be positive");
  const double p0 = 1.0 - 2.0 * mean * mean / (mean + second_moment);
  return {p0, 1.0 - (1.0 - p0) / mean};
}

AnsatzResult exponential_ansatz(const ModelParams& params) {
  const DerivedRates r = derive_rates(params);
  const double p_nw = no_wait_probability(params.N(), params.r());
  const LevelMoments lm = level_moments(r);

  AnsatzResult a;
  a.mean_hi = (1.0 - p_nw) * lm.mean_L_c[0];
  const double mean_med = (1.0 - p_nw) * lm.mean_L_c[1];
  const double second_med = (1.0 - p_nw) * lm.second_L_c[1];
  if (!(mean_med > 0.0)) throw ValidationError("exponential ansatz: intermediate mean queue length must be positive");

  const AnsatzDecay med = ansatz_decay(mean_med, second_med);
  a.p20 = med.p0;
  a.t_prime = med.t;
  a.p_amb_med = a.p20 + (1.0 - a.p20) * r.q * (1.0 - a.t_prime) / (1.0 - r.q * a.t_prime);
  a.mean_amb_med = r.p * mean_med;
  a.t = a.mean_amb_med > 0.0 ? 1.0 - (1.0 - a.p_amb_med) / a.mean_amb_med : 0.0;
  if (!(a.t >= 0.0 && a.t < 1.0)) {
    a.diagnostic = "ansatz decay t = " + std::to_string(a.t) + " outside [0, 1); geometric assumption violated";
  }
  a.delay_rate = kDaysPerMonth * (a.mean_hi + a.mean_amb_med * std::pow(a.t, params.M()));
  return a;
}

double offload_delay_rate_ansatz(const ModelParams& params) { return exponential_ansatz(params).delay_rate; }

double GeomFit::H(int n) const { return -std::log10(F0) - n * std::log10(rho); }

GeomFit geometric_fit(const DiscreteDist& dist) {
  if (dist.sf.empty() || !(dist.sf[0] > 0.0) || !(dist.mean > 0.0)) {
    throw ValidationError("geometric_fit: need F(0) > 0 and a positive mean");
  }
  GeomFit g;
  g.F0 = dist.sf[0];
  g.mean = dist.mean;
  g.rho = 1.0 - g.F0 / g.mean;
  if (!(g.rho > 0.0 && g.rho < 1.0)) throw ValidationError("geometric_fit: fitted rho outside (0, 1)");
  return g;
}

namespace {

double empirical_quantile(std::vector<double> xs, double level) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const auto k = static_cast<std::size_t>(std::ceil(level * static_cast<double>(xs.size())));
  return xs[std::clamp<std::size_t>(k, 1, xs.size()) - 1];
}

}  // namespace

std::vector<MopRow> sweep(const ModelParams& params, const std::vector<int>& M_range, bool include_sim,
                          const SimConfig& sim_cfg, const NumericsConfig& numerics) {
  if (M_range.empty()) throw ValidationError("sweep: M range is empty");
  const int M_top = *std::max_element(M_range.begin(), M_range.end());
  const DerivedRates rates = derive_rates(params);
  const double cap = params.capacity();

  std::optional<JointPmfTable> table;
  std::string table_error;
  try {
    table = joint_amb_pmf(rates, numerics, M_top + 1);
  } catch (const std::exception& e) {
    table_error = e.what();
  }

  std::vector<MopRow> rows(M_range.size());
  parallel_for(M_range.size(), [&](std::size_t i) {
    const int M = M_range[i];
    MopRow& row = rows[i];
    row.M = M;
    try {
      if (!table) throw ConvergenceError(table_error, 0.0, 0.0);
      const ModelParams pm = params.with_apot(M);
      const VehicleQueueSolution sol = solve_vehicle_queue(pm, *table);
      const WaitDist wait = exact_vehicle_dist(sol, numerics);
      row.mean_qlen = sol.vehicle.mean;
      row.p90_qlen = percentile_qlen(sol.vehicle, 0.9);
      row.mean_wait = wait.unconditional_mean() / cap * params.mu();
      row.p90_wait = percentile_wait(wait, 0.9) / cap * params.mu();
      row.p90_wait_scaled = rates.lambda_amb * row.p90_wait / params.mu();
      row.chi = sol.chi;
      row.delay_rate_exact = offload_delay_rate_exact(sol);
      row.delay_rate_ansatz = offload_delay_rate_ansatz(pm);

      if (include_sim) {
        const sim::SimResult res = sim::run(pm, sim_cfg.t_stop, sim_cfg.seed);
        const DiscreteDist q = sim::empirical_qlen(res.cycles, sim::QueueTarget::vehicle);
        std::vector<double> waits = sim::empirical_wait(res.history, sim::WaitTarget::vehicle, false);
        double sum = 0.0;
        for (double w : waits) sum += w;
        row.has_sim = true;
        row.sim_mean_qlen = q.mean;
        row.sim_p90_qlen = percentile_qlen(q, 0.9);
        row.sim_mean_wait = waits.empty() ? 0.0 : sum / static_cast<double>(waits.size()) * params.mu();
        row.sim_p90_wait = empirical_quantile(std::move(waits), 0.9) * params.mu();
        row.sim_delay_rate = kDaysPerMonth * q.mean;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace offload
