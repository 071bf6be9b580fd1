#include <doctest.h>

#include <cmath>
#include <random>

#include "offload/params.hpp"

using namespace offload;

TEST_CASE("reference rates") {
  const DerivedRates d = derive_rates(ModelParams::reference());
  CHECK(d.r_hi == doctest::Approx(0.4222222222222222222222).epsilon(1e-15));
  CHECK(d.r_med == doctest::Approx(0.4961111111111111111111).epsilon(1e-15));
  CHECK(d.r_lo == doctest::Approx(0.03166666666666666666667).epsilon(1e-15));
  CHECK(d.sigma == doctest::Approx(0.9183333333333333333333).epsilon(1e-15));
  CHECK(d.p == doctest::Approx(0.4255319148936170212766).epsilon(1e-15));
  CHECK(d.lambda_amb == doctest::Approx(19.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("derived quantities sum to one on random parameters") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const int N = 1 + static_cast<int>(u(gen) * 40);
    const double r = 0.01 + 0.98 * u(gen);
    const double nu_amb = u(gen), nu_hi = u(gen), nu_lo = u(gen);
    const ModelParams params(N, 3, 1.0, r, nu_amb, nu_hi, nu_lo);
    DerivedRates d;
    try {
      d = derive_rates(params);
    } catch (const DegenerateMixError&) {
      continue;
    }
    CHECK(std::abs(d.r_hi + d.r_med + d.r_lo - r) < 1e-12);
    CHECK(std::abs(d.f_hi + d.f_med + d.f_lo - 1.0) < 1e-12);
    CHECK(std::abs(d.p + d.q - 1.0) < 1e-12);
    CHECK(std::abs(d.r_amb + d.r_wlk - r) < 1e-12);
  }
}

TEST_CASE("rates are scale consistent") {
  const ModelParams a(10, 6, 1.0, 0.95, 2.0 / 3, 2.0 / 3, 0.1);
  const ModelParams b(10, 6, 7.5, 0.95, 2.0 / 3, 2.0 / 3, 0.1);
  const DerivedRates da = derive_rates(a), db = derive_rates(b);
  CHECK(da.r_hi == doctest::Approx(db.r_hi).epsilon(1e-15));
  CHECK(da.r_med == doctest::Approx(db.r_med).epsilon(1e-15));
  CHECK(da.sigma == doctest::Approx(db.sigma).epsilon(1e-15));
  CHECK(da.p == doctest::Approx(db.p).epsilon(1e-15));
  CHECK(db.lambda_amb == doctest::Approx(7.5 * da.lambda_amb).epsilon(1e-15));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(ModelParams(0, 1, 1.0, 0.5, 0.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, -1, 1.0, 0.5, 0.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, 1, 0.0, 0.5, 0.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, 1, 1.0, 1.0, 0.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, 1, 1.0, 0.0, 0.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, 1, 1.0, 0.5, 1.5, 0.5, 0.5), ValidationError);
  CHECK_THROWS_AS(ModelParams(2, 1, 1.0, 0.5, 0.5, -0.1, 0.5), ValidationError);
  CHECK_NOTHROW(ModelParams(1, 0, 1.0, 0.5, 1.0, 1.0, 0.0));
}

TEST_CASE("empty intermediate class is degenerate") {
  CHECK_THROWS_AS(derive_rates(ModelParams(10, 2, 1.0, 0.9, 0.5, 1.0, 1.0)), DegenerateMixError);
  CHECK_NOTHROW(derive_rates(ModelParams(10, 2, 1.0, 0.9, 0.5, 1.0, 0.9)));
}

TEST_CASE("triage counts") {
  const double t2 = 75170, t3 = 197170, t4 = 160600, t5 = 27573, amb = 118056;
  const TriageFractions plain = from_triage_counts(t2, t3, t4, t5, amb);
  CHECK(std::round(plain.f_hi * 1000) / 1000 == doctest::Approx(0.163));
  CHECK(std::round(plain.f_lo * 1000) / 1000 == doctest::Approx(0.060));
  CHECK(plain.nu_amb == doctest::Approx(amb / (t2 + t3 + t4 + t5)));

  const TriageFractions overridden = from_triage_counts(t2, t3, t4, t5, amb, 0.248);
  CHECK(std::round(overridden.nu_hi * 100) / 100 == doctest::Approx(0.66));
  CHECK(std::round(overridden.nu_lo * 100) / 100 == doctest::Approx(0.08));

  const TriageFractions all_hi = from_triage_counts(100, 0, 0, 0, 100);
  CHECK(all_hi.f_hi == 1.0);
  CHECK(all_hi.f_lo == 0.0);

  CHECK_THROWS_AS(from_triage_counts(10, 20, 20, 10, 60), ValidationError);
  CHECK_THROWS_AS(from_triage_counts(10, 20, 20, 10, 0), ValidationError);
  CHECK_THROWS_AS(from_triage_counts(0, 0, 0, 0, 0), ValidationError);
}

TEST_CASE("config parsing") {
  const Config cfg = parse_config(R"({"N": 4, "M": 2, "mu": 1.5, "r": 0.8, "nu_amb": 0.5, "nu_hi": 0.4,
    "nu_lo": 0.2, "sim": {"t_stop": 500, "seed": 9, "n_runs": 3},
    "numerics": {"quad_tol": 1e-10, "quad_max_points": 4096, "tail_mass_tol": 1e-9, "table_cap": 512}})");
  CHECK(cfg.params.N() == 4);
  CHECK(cfg.params.M() == 2);
  CHECK(cfg.params.mu() == 1.5);
  CHECK(cfg.sim.seed == 9);
  CHECK(cfg.sim.n_runs == 3);
  CHECK(cfg.numerics.quad_max_points == 4096);
  CHECK(cfg.numerics.table_cap == 512);

  CHECK_THROWS_AS(parse_config(R"({"N": 4, "M": 2})"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"N": 4.5, "M": 2, "mu": 1, "r": 0.8, "nu_amb": 0.5, "nu_hi": 0.4, "nu_lo": 0.2})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"N": 4, "M": 2, "mu": 1, "r": 1.2, "nu_amb": 0.5, "nu_hi": 0.4, "nu_lo": 0.2})"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ValidationError);
}
