#include <doctest.h>

#include <cmath>

#include "offload/metrics.hpp"
#include "offload/wtime.hpp"

using namespace offload;

namespace {

DiscreteDist geometric_with_atom(double p0, double t, int n_max = 2000) {
  std::vector<double> pmf(n_max + 1);
  pmf[0] = p0;
  for (int n = 1; n <= n_max; ++n) pmf[n] = (1 - p0) * (1 - t) * std::pow(t, n - 1);
  return DiscreteDist::from_pmf(pmf);
}

}  // namespace

TEST_CASE("ansatz recovers a geometric law") {
  for (auto [p0, t] : {std::pair{0.3, 0.6}, {0.0, 0.9}, {0.8, 0.2}}) {
    const DiscreteDist d = geometric_with_atom(p0, t);
    const AnsatzDecay fit = ansatz_decay(d.mean, d.second_moment);
    CHECK(fit.p0 == doctest::Approx(p0).epsilon(1e-12));
    CHECK(fit.t == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("ansatz and exact delay rate agree without an APOT") {
  const ModelParams params = ModelParams::reference().with_apot(0);
  const AnsatzResult a = exponential_ansatz(params);
  CHECK(a.diagnostic.empty());
  CHECK(a.delay_rate == doctest::Approx(kDaysPerMonth * (a.mean_hi + a.mean_amb_med)).epsilon(1e-14));
  CHECK(a.delay_rate == doctest::Approx(offload_delay_rate_exact(params)).epsilon(1e-10));
  CHECK(a.t > 0.0);
  CHECK(a.t < 1.0);
  CHECK(a.t_prime > 0.0);
  CHECK(a.t_prime < 1.0);
}

TEST_CASE("delay rate at the reference parameters") {
  const ModelParams params = ModelParams::reference();
  CHECK(offload_delay_rate_exact(params) == doctest::Approx(53.2038967289216).epsilon(1e-9));
  const VehicleQueueSolution sol = solve_vehicle_queue(params);
  CHECK(offload_delay_rate_exact(sol) == doctest::Approx(kDaysPerMonth * sol.vehicle.mean).epsilon(1e-15));
  const double limit = offload_delay_rate_limit(params);
  CHECK(offload_delay_rate_exact(params.with_apot(250)) == doctest::Approx(limit).epsilon(1e-8));
  CHECK(limit < offload_delay_rate_exact(params.with_apot(20)));
}

TEST_CASE("geometric fit") {
  const DiscreteDist half = geometric_with_atom(0.5, 0.5);
  const GeomFit g = geometric_fit(half);
  CHECK(g.F0 == doctest::Approx(0.5));
  CHECK(g.mean == doctest::Approx(1.0));
  CHECK(g.rho == doctest::Approx(0.5));

  const DiscreteDist d = geometric_with_atom(0.35, 0.8);
  const GeomFit fit = geometric_fit(d);
  for (int n = 0; n < 60; ++n) CHECK(fit.H(n) == doctest::Approx(-std::log10(d.sf[n])).epsilon(1e-10));
  CHECK(fit.H(2) - fit.H(1) == doctest::Approx(fit.H(11) - fit.H(10)).epsilon(1e-12));
  CHECK_THROWS_AS(geometric_fit(DiscreteDist::from_pmf({1.0})), ValidationError);
}

TEST_CASE("sweep over the APOT size") {
  const ModelParams params = ModelParams::reference();
  std::vector<int> range;
  for (int M = 0; M <= 20; ++M) range.push_back(M);
  const std::vector<MopRow> rows = sweep(params, range);
  REQUIRE(rows.size() == 21);
  const double lambda_amb = derive_rates(params).lambda_amb;
  double max_rel = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MopRow& r = rows[i];
    CHECK(r.error.empty());
    CHECK(r.M == range[i]);
    CHECK(r.mean_qlen == doctest::Approx(r.delay_rate_exact / kDaysPerMonth).epsilon(1e-14));
    CHECK(std::abs(r.mean_wait * lambda_amb / params.mu() - r.mean_qlen) < 1e-6);
    CHECK(r.p90_wait_scaled == doctest::Approx(lambda_amb * r.p90_wait));
    CHECK(r.delay_rate_ansatz >= 0.0);
    max_rel = std::max(max_rel, std::abs(r.delay_rate_exact - r.delay_rate_ansatz) / r.delay_rate_exact);
    if (i >= 1) CHECK(r.delay_rate_exact <= rows[i - 1].delay_rate_exact);
    if (i >= 2) {
      const double second = r.delay_rate_exact - 2 * rows[i - 1].delay_rate_exact + rows[i - 2].delay_rate_exact;
      CHECK(second >= -1e-9);
    }
  }
  CHECK(max_rel < 0.02);
}

TEST_CASE("single-row sweep matches the individual operations") {
  const ModelParams params = ModelParams::reference();
  const std::vector<MopRow> rows = sweep(params, {6});
  REQUIRE(rows.size() == 1);
  const MopRow& r = rows.front();
  const VehicleQueueSolution sol = solve_vehicle_queue(params);
  const WaitDist w = exact_vehicle_dist(sol);
  CHECK(r.delay_rate_exact == doctest::Approx(offload_delay_rate_exact(params)).epsilon(1e-12));
  CHECK(r.delay_rate_ansatz == doctest::Approx(offload_delay_rate_ansatz(params)).epsilon(1e-14));
  CHECK(r.p90_qlen == percentile_qlen(sol.vehicle, 0.9));
  CHECK(r.p90_wait == doctest::Approx(percentile_wait(w, 0.9) / params.N()).epsilon(1e-12));
  CHECK(r.chi == doctest::Approx(sol.chi).epsilon(1e-14));
  CHECK_FALSE(r.has_sim);
  CHECK_THROWS_AS(sweep(params, {}), ValidationError);
}

TEST_CASE("sweep with simulation columns") {
  SimConfig cfg;
  cfg.t_stop = 20000;
  cfg.seed = 3;
  const std::vector<MopRow> rows = sweep(ModelParams::reference(), {0, 6}, true, cfg);
  for (const MopRow& r : rows) {
    CHECK(r.has_sim);
    CHECK(r.sim_mean_qlen > 0.0);
    CHECK(r.sim_delay_rate == doctest::Approx(kDaysPerMonth * r.sim_mean_qlen));
    CHECK(r.sim_mean_qlen == doctest::Approx(r.mean_qlen).epsilon(0.5));
  }
}
