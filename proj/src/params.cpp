#include "offload/params.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace offload {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

}  // namespace

ModelParams::ModelParams(int N, int M, double mu, double r, double nu_amb, double nu_hi, double nu_lo)
    : N_(N), M_(M), mu_(mu), r_(r), nu_amb_(nu_amb), nu_hi_(nu_hi), nu_lo_(nu_lo) {
  require(N >= 1, "N must be >= 1");
  require(M >= 0, "M must be >= 0");
  require(std::isfinite(mu) && mu > 0.0, "mu must be positive");
  require(std::isfinite(r) && r > 0.0 && r < 1.0, "r must lie in (0, 1) for a steady state to exist");
  require(is_fraction(nu_amb), "nu_amb must lie in [0, 1]");
  require(is_fraction(nu_hi), "nu_hi must lie in [0, 1]");
  require(is_fraction(nu_lo), "nu_lo must lie in [0, 1]");
}

ModelParams ModelParams::with_apot(int M) const { return {N_, M, mu_, r_, nu_amb_, nu_hi_, nu_lo_}; }

ModelParams ModelParams::with_nu_amb(double nu_amb) const {
  return {N_, M_, mu_, r_, nu_amb, nu_hi_, nu_lo_};
}

ModelParams ModelParams::reference() { return {10, 6, 1.0, 0.95, 2.0 / 3.0, 2.0 / 3.0, 0.10}; }

DerivedRates derive_rates(const ModelParams& params) {
  DerivedRates d;
  const double cap = params.capacity();
  d.r = params.r();
  d.nu_hi = params.nu_hi();
  d.r_amb = params.nu_amb() * params.r();
  d.r_wlk = (1.0 - params.nu_amb()) * params.r();
  d.lambda_amb = cap * d.r_amb;
  d.lambda_wlk = cap * d.r_wlk;

  const double med_amb = (1.0 - params.nu_hi()) * d.lambda_amb;
  const double med_wlk = (1.0 - params.nu_lo()) * d.lambda_wlk;
  d.lambda_hi = params.nu_hi() * d.lambda_amb;
  d.lambda_lo = params.nu_lo() * d.lambda_wlk;
  d.lambda_med = med_amb + med_wlk;
  if (!(d.lambda_med > 0.0)) {
    throw DegenerateMixError("intermediate priority class is empty; p = q = 0/0");
  }

  d.r_hi = params.nu_hi() * d.r_amb;
  d.r_lo = params.nu_lo() * d.r_wlk;
  d.r_med = (1.0 - params.nu_hi()) * d.r_amb + (1.0 - params.nu_lo()) * d.r_wlk;
  d.sigma = d.r_hi + d.r_med;
  d.p = med_amb / d.lambda_med;
  d.q = med_wlk / d.lambda_med;

  d.f_hi = params.nu_hi() * params.nu_amb();
  d.f_med = (1.0 - params.nu_hi()) * params.nu_amb() + (1.0 - params.nu_lo()) * (1.0 - params.nu_amb());
  d.f_lo = params.nu_lo() * (1.0 - params.nu_amb());
  return d;
}

TriageFractions from_triage_counts(double t2, double t3, double t4, double t5, double ambulance_count,
                                   std::optional<double> nu_amb_override) {
  for (double c : {t2, t3, t4, t5, ambulance_count}) {
    require(std::isfinite(c) && c >= 0.0, "triage counts must be non-negative");
  }
  const double total = t2 + t3 + t4 + t5;
  require(total > 0.0, "triage counts must have a positive total");

  TriageFractions out{};
  out.f_hi = t2 / total;
  out.f_lo = t5 / total;
  out.nu_amb = nu_amb_override ? *nu_amb_override : ambulance_count / total;
  require(is_fraction(out.nu_amb), "nu_amb must lie in [0, 1]");
  // With no ambulances (or no walk-ins) the matching split is immaterial as long as that class
  // has no patients to split.
  if (out.nu_amb == 0.0) {
    if (out.f_hi > 0.0) throw ValidationError("nu_hi = f_hi / nu_amb is undefined for nu_amb = 0");
    out.nu_hi = 0.0;
  } else {
    out.nu_hi = out.f_hi / out.nu_amb;
  }
  if (out.nu_amb == 1.0) {
    if (out.f_lo > 0.0) throw ValidationError("nu_lo = f_lo / (1 - nu_amb) is undefined for nu_amb = 1");
    out.nu_lo = 0.0;
  } else {
    out.nu_lo = out.f_lo / (1.0 - out.nu_amb);
  }
  return out;
}

Config parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), "config must be a JSON object");
  for (const char* key : {"N", "M", "mu", "r", "nu_amb", "nu_hi", "nu_lo"}) {
    require(j.contains(key) && j[key].is_number(), std::string("config key missing or not a number: ") + key);
  }
  const auto as_int = [&](const char* key) {
    const double v = j[key].get<double>();
    require(v == std::floor(v), std::string(key) + " must be an integer");
    return static_cast<int>(v);
  };

  Config cfg{ModelParams(as_int("N"), as_int("M"), j["mu"].get<double>(), j["r"].get<double>(),
                         j["nu_amb"].get<double>(), j["nu_hi"].get<double>(), j["nu_lo"].get<double>()),
             {}, {}};

  if (j.contains("sim")) {
    const auto& s = j["sim"];
    require(s.is_object(), "`sim` must be an object");
    if (s.contains("t_stop")) cfg.sim.t_stop = s["t_stop"].get<double>();
    if (s.contains("seed")) cfg.sim.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("n_runs")) cfg.sim.n_runs = s["n_runs"].get<int>();
    require(cfg.sim.t_stop > 0.0, "sim.t_stop must be positive");
    require(cfg.sim.n_runs >= 1, "sim.n_runs must be >= 1");
  }
  if (j.contains("numerics")) {
    const auto& n = j["numerics"];
    require(n.is_object(), "`numerics` must be an object");
    if (n.contains("quad_tol")) cfg.numerics.quad_tol = n["quad_tol"].get<double>();
    if (n.contains("quad_max_points")) cfg.numerics.quad_max_points = n["quad_max_points"].get<int>();
    if (n.contains("tail_mass_tol")) cfg.numerics.tail_mass_tol = n["tail_mass_tol"].get<double>();
    if (n.contains("table_cap")) cfg.numerics.table_cap = n["table_cap"].get<int>();
    require(cfg.numerics.quad_tol > 0.0, "numerics.quad_tol must be positive");
    require(cfg.numerics.quad_max_points >= 16, "numerics.quad_max_points must be >= 16");
    require(cfg.numerics.tail_mass_tol > 0.0, "numerics.tail_mass_tol must be positive");
    require(cfg.numerics.table_cap >= 8, "numerics.table_cap must be >= 8");
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace offload
