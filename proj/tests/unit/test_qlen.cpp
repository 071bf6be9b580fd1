#include <doctest.h>

#include <cmath>
#include <numeric>

#include "offload/ctmc.hpp"
#include "offload/qlen.hpp"

using namespace offload;

namespace {

const double kPmedReference[] = {0.2077887346148059774,  0.14793322842151515128, 0.11559183905132174634,
                                 0.093226081345510759902, 0.076138168535068654213, 0.062540620849056136607,
                                 0.051521488069236609429, 0.042511518630826571904, 0.035109411451468774253};

std::vector<double> table_block(const JointPmfTable& t, int cap) {
  std::vector<double> out(static_cast<std::size_t>(cap + 1) * (cap + 1), 0.0);
  for (int l = 0; l <= std::min(cap, t.l_max); ++l)
    for (int m = 0; m <= std::min(cap, t.m_max); ++m) out[static_cast<std::size_t>(l) * (cap + 1) + m] = t.at(l, m);
  return out;
}

}  // namespace

TEST_CASE("intermediate ambulance marginal at the reference parameters") {
  const VehicleQueueSolution sol = solve_vehicle_queue(ModelParams::reference());
  const std::vector<double> med = sol.table.med_marginal();
  for (int m = 0; m < 9; ++m) CHECK(std::abs(med[m] - kPmedReference[m]) < 1e-13);
  CHECK(std::abs(sol.chi - 0.29678132718272157426) < 1e-13);
  CHECK(sol.table.tail_mass < 1e-10);
  CHECK_FALSE(sol.table.hit_cap);
  const double total = std::accumulate(sol.table.values.begin(), sol.table.values.end(), 0.0);
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("thinning preserves the high-priority marginal") {
  const DerivedRates d = derive_rates(ModelParams::reference());
  DerivedRates unthinned = d;
  unthinned.p = 1.0;
  unthinned.q = 0.0;
  const JointPmfTable thin = joint_amb_pmf(d, 60, 40, NumericsConfig{});
  const JointPmfTable full = joint_amb_pmf(unthinned, 60, 400, NumericsConfig{});
  const std::vector<double> a = thin.hi_marginal(), b = full.hi_marginal();
  for (int l = 0; l <= 60; ++l) {
    const double geometric = (1.0 - d.r_hi) * std::pow(d.r_hi, l);
    CHECK(std::abs(b[l] - geometric) < 1e-10);
    CHECK(a[l] <= b[l] + 1e-12);
  }
  const JointPmfTable wide = joint_amb_pmf(d, 60, 300, NumericsConfig{});
  const std::vector<double> w = wide.hi_marginal();
  for (int l = 0; l <= 60; ++l) CHECK(std::abs(w[l] - b[l]) < 1e-10);
}

TEST_CASE("all intermediate patients by ambulance: thinning is the identity") {
  const ModelParams params(10, 2, 1.0, 0.7, 1.0, 0.4, 0.0);
  const DerivedRates d = derive_rates(params);
  CHECK(d.p == 1.0);
  const JointPmfTable t = joint_amb_pmf(d, 30, 30, NumericsConfig{});
  const std::vector<double> ref = ctmc::busy_joint(d.r_hi, d.r_med, 120);
  std::vector<double> block(31 * 31);
  for (int l = 0; l <= 30; ++l)
    for (int m = 0; m <= 30; ++m) block[l * 31 + m] = ref[static_cast<std::size_t>(l) * 121 + m];
  double worst = 0.0;
  for (std::size_t i = 0; i < block.size(); ++i) worst = std::max(worst, std::abs(block[i] - t.values[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("pole switches off when sigma^2 <= r_hi") {
  const ModelParams params(10, 2, 1.0, 0.5, 0.9, 0.9, 0.1);
  const DerivedRates d = derive_rates(params);
  CHECK(d.sigma * d.sigma < d.r_hi);
  const JointPmfTable t = joint_amb_pmf(d, NumericsConfig{}, 3);
  CHECK_FALSE(t.geometry.pole_active);
  for (double v : t.pole) CHECK(v == 0.0);
  CHECK(t.tail_mass < 1e-10);
}

TEST_CASE("mean of the shifted intermediate queue matches the closed form") {
  const ModelParams params = ModelParams::reference();
  const DerivedRates d = derive_rates(params);
  const JointPmfTable t = joint_amb_pmf(d, NumericsConfig{}, 13);
  const std::vector<double> med = t.med_marginal();
  double previous = INFINITY;
  for (int M = 0; M <= 12; ++M) {
    const DiscreteDist shifted = apot_shift(t, M);
    const double closed = apot_shift_mean(d, med, M);
    CHECK(std::abs(shifted.mean - closed) < 1e-8);
    CHECK(shifted.mean <= previous);
    previous = shifted.mean;
    CHECK(shifted.pmf[0] == doctest::Approx(1.0 - chi(t, M) + med[M]).epsilon(1e-14));
  }
  const JointPmfTable wide = joint_amb_pmf(d, NumericsConfig{}, 201);
  CHECK(apot_shift(wide, 200).mean < 1e-6);
}

TEST_CASE("chi") {
  const JointPmfTable t = joint_amb_pmf(derive_rates(ModelParams::reference()), NumericsConfig{}, 30);
  CHECK(chi(t, 0) == 1.0);
  double previous = 1.0;
  for (int M = 1; M <= 30; ++M) {
    const double c = chi(t, M);
    CHECK(c < previous);
    CHECK(c > 0.0);
    previous = c;
  }
  CHECK_THROWS_AS(chi(t, -1), ValidationError);
}

TEST_CASE("no intermediate ambulances: the vehicle queue is the high queue") {
  const ModelParams params(10, 3, 1.0, 0.9, 0.5, 1.0, 0.2);
  const VehicleQueueSolution sol = solve_vehicle_queue(params);
  const double r_hi = sol.rates.r_hi;
  CHECK(sol.rates.p == 0.0);
  CHECK(sol.vehicle.atom0 == doctest::Approx(sol.p_nw + (1 - sol.p_nw) * (1 - r_hi)).epsilon(1e-12));
  for (int n = 1; n < 30; ++n) {
    CHECK(std::abs(sol.vehicle.pmf[n] - (1 - sol.p_nw) * (1 - r_hi) * std::pow(r_hi, n)) < 1e-13);
  }
  CHECK(std::abs(sol.chi) < 1e-14);
  CHECK(sol.apot.atom0 == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("vehicle queue and APOT occupancy") {
  const VehicleQueueSolution sol = solve_vehicle_queue(ModelParams::reference());
  const DiscreteDist& v = sol.vehicle;
  CHECK(std::abs(std::accumulate(v.pmf.begin(), v.pmf.end(), 0.0) + v.tail_mass - 1.0) < 1e-12);
  for (std::size_t n = 1; n < v.sf.size(); ++n) CHECK(v.sf[n] <= v.sf[n - 1]);
  double sf_sum = 0.0;
  for (double s : v.sf) sf_sum += s;
  CHECK(v.mean == doctest::Approx(sf_sum).epsilon(1e-9));

  const LevelMoments lm = level_moments(sol.rates);
  CHECK(sol.vehicle_conditional.mean ==
        doctest::Approx(lm.mean_L_c[0] + apot_shift_mean(sol.rates, sol.table.med_marginal(), 6)).epsilon(1e-10));

  CHECK(sol.apot_conditional.pmf.size() == 7);
  CHECK(sol.apot_conditional.pmf.back() == sol.chi);
  CHECK(std::abs(std::accumulate(sol.apot_conditional.pmf.begin(), sol.apot_conditional.pmf.end(), 0.0) - 1.0) <
        1e-14);
  CHECK(sol.apot.atom0 == doctest::Approx(sol.p_nw + (1 - sol.p_nw) * sol.apot_conditional.pmf[0]));

  const JointPmfTable& t = sol.table;
  const DiscreteDist one = apot_occupancy(t, 1);
  CHECK(one.pmf.size() == 2);
  CHECK(one.pmf[1] == doctest::Approx(1.0 - t.med_marginal()[0]));
  CHECK_THROWS_AS(apot_occupancy(t, 0), ValidationError);

  const VehicleQueueSolution none = solve_vehicle_queue(ModelParams::reference().with_apot(0));
  CHECK(none.apot.pmf.empty());
  CHECK(none.chi == 1.0);
}

TEST_CASE("unconditioned distribution") {
  const DiscreteDist c = DiscreteDist::from_pmf({0.5, 0.25, 0.25});
  const DiscreteDist u = c.unconditioned(0.2);
  CHECK(u.pmf[0] == doctest::Approx(0.6));
  CHECK(u.pmf[2] == doctest::Approx(0.2));
  CHECK(u.mean == doctest::Approx(0.8 * c.mean));
  CHECK(u.sf[0] == doctest::Approx(0.4));
}

TEST_CASE("percentiles") {
  CHECK(percentile_qlen(DiscreteDist::from_pmf({1.0}), 0.9) == 0);
  std::vector<double> geo(200);
  for (int n = 0; n < 200; ++n) geo[n] = 0.5 * std::pow(0.5, n);
  const DiscreteDist g = DiscreteDist::from_pmf(geo);
  CHECK(percentile_qlen(g, 0.5) == 0);
  CHECK(percentile_qlen(g, 0.9) == 3);
  CHECK(percentile_qlen(g, 0.75) == 1);
  CHECK_THROWS_AS(percentile_qlen(g, 1.0), ValidationError);
}

TEST_CASE("CTMC oracle on small instances") {
  struct Case {
    ModelParams params;
    int cap;
  };
  const Case cases[] = {
      {ModelParams(2, 0, 1.0, 0.6, 0.5, 0.5, 0.5), 80},
      {ModelParams(2, 1, 1.0, 0.6, 0.5, 0.5, 0.5), 80},
      {ModelParams(2, 2, 1.0, 0.6, 0.5, 0.5, 0.5), 80},
      {ModelParams(3, 3, 1.0, 0.7, 0.8, 0.3, 0.2), 100},
      {ModelParams(10, 2, 1.0, 0.5, 0.9, 0.9, 0.1), 80},
  };
  for (const Case& c : cases) {
    CAPTURE(c.params.N());
    CAPTURE(c.params.M());
    const ctmc::OracleResult oracle = ctmc::solve(c.params, c.cap);
    const VehicleQueueSolution sol = solve_vehicle_queue(c.params);
    CHECK(std::abs(oracle.p_nw - sol.p_nw) < 1e-12);
    CHECK(ctmc::total_variation(oracle.joint_amb, table_block(sol.table, c.cap)) < 1e-6);
    CHECK(ctmc::total_variation(oracle.vehicle_conditional.pmf, sol.vehicle_conditional.pmf) < 1e-6);
    CHECK(ctmc::total_variation(oracle.vehicle.pmf, sol.vehicle.pmf) < 1e-6);
    if (c.params.M() >= 1) CHECK(ctmc::total_variation(oracle.apot_conditional.pmf, sol.apot_conditional.pmf) < 1e-6);
  }
}
