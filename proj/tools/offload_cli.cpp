#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "offload/ctmc.hpp"
#include "offload/io.hpp"
#include "offload/metrics.hpp"
#include "offload/parallel.hpp"
#include "offload/qlen.hpp"
#include "offload/sim.hpp"
#include "offload/stats.hpp"
#include "offload/wtime.hpp"

using namespace offload;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out = "-";
  std::string format = "csv";
  std::string plot;
  std::optional<std::uint64_t> seed;
  std::optional<double> t_stop;
  std::optional<int> runs;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON parameter file (defaults to the reference parameters)");
  app->add_option("--out", c.out, "output path, or - for stdout");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "simulation seed");
  app->add_option("--t-stop", c.t_stop, "simulated time horizon, units of 1/mu");
  app->add_option("--runs", c.runs, "number of independent replications");
  app->add_option("--plot", c.plot, "also write an SVG chart to this path");
}

Config resolve(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : load_config(c.config);
  if (c.seed) cfg.sim.seed = *c.seed;
  if (c.t_stop) {
    if (!(*c.t_stop > 0.0)) throw ValidationError("--t-stop must be positive");
    cfg.sim.t_stop = *c.t_stop;
  }
  if (c.runs) {
    if (*c.runs < 1) throw ValidationError("--runs must be >= 1");
    cfg.sim.n_runs = *c.runs;
  }
  return cfg;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ValidationError("cannot open output file: " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string sibling(const std::string& out, const std::string& suffix) {
  if (out.empty() || out == "-") return {};
  const auto dot = out.rfind('.');
  const auto slash = out.rfind('/');
  const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash)) ? out.substr(0, dot) : out;
  return stem + "_" + suffix;
}

void write_plot(const std::string& path, const std::string& title, const std::string& xl, const std::string& yl,
                const std::vector<io::Series>& series) {
  if (path.empty()) return;
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open plot file: " + path);
  io::write_svg_chart(f, title, xl, yl, series);
}

int cmd_solve(const Common& c) {
  const Config cfg = resolve(c);
  const VehicleQueueSolution sol = solve_vehicle_queue(cfg.params, cfg.numerics);
  const WaitDist exact = exact_vehicle_dist(sol, cfg.numerics);
  const WaitDist approx = approx_vehicle_dist(sol, AlphaSource::littles_law, nullptr, cfg.numerics);
  const int N = cfg.params.N();
  const io::WaitCurve ce = io::sample_wait(exact, N);
  const io::WaitCurve ca = io::sample_wait(approx, N);

  if (c.format == "json") {
    json doc = {{"meta", io::meta_json(cfg)},
                {"p_nw", sol.p_nw},
                {"chi", sol.chi},
                {"tail_mass", sol.table.tail_mass},
                {"vehicle_queue", io::dist_json(sol.vehicle)},
                {"vehicle_queue_conditional", io::dist_json(sol.vehicle_conditional)},
                {"wait_exact", io::wait_json(ce, exact)},
                {"wait_approx", io::wait_json(ca, approx)},
                {"delay_rate_exact", offload_delay_rate_exact(sol)},
                {"delay_rate_ansatz", offload_delay_rate_ansatz(cfg.params)}};
    if (sol.M >= 1) doc["apot_occupancy"] = io::dist_json(sol.apot);
    Output out(c.out);
    out.stream() << doc.dump(2) << '\n';
  } else {
    Output out(c.out);
    io::write_dist_csv(out.stream(), sol.vehicle);
    if (const std::string p = sibling(c.out, "apot.csv"); !p.empty() && sol.M >= 1) {
      Output o(p);
      io::write_dist_csv(o.stream(), sol.apot);
    }
    if (const std::string p = sibling(c.out, "wait_exact.csv"); !p.empty()) {
      Output o(p);
      io::write_wait_csv(o.stream(), ce);
    }
    if (const std::string p = sibling(c.out, "wait_approx.csv"); !p.empty()) {
      Output o(p);
      io::write_wait_csv(o.stream(), ca);
    }
  }

  std::vector<double> n, lsf;
  for (std::size_t i = 0; i < sol.vehicle.sf.size() && i <= 40; ++i) {
    n.push_back(static_cast<double>(i));
    lsf.push_back(std::log10(sol.vehicle.sf[i]));
  }
  std::vector<double> le, la;
  for (double v : ce.sf) le.push_back(std::log10(v));
  for (double v : ca.sf) la.push_back(std::log10(v));
  write_plot(c.plot, "Vehicle queue length SF", "n", "log10 SF", {{"exact", n, lsf}});
  write_plot(sibling(c.plot, "wait.svg"), "Conditional vehicle wait SF", "t (1/mu)", "log10 SF",
             {{"exact", ce.t, le}, {"approximate", ca.t, la}});
  return 0;
}

int cmd_simulate(const Common& c) {
  const Config cfg = resolve(c);
  const sim::SimResult res = sim::run(cfg.params, cfg.sim.t_stop, cfg.sim.seed);
  if (c.format == "json") {
    const DiscreteDist q = sim::empirical_qlen(res.cycles, sim::QueueTarget::vehicle);
    json doc = {{"meta", io::meta_json(cfg)},
                {"patients", res.history.size()},
                {"events", res.events},
                {"cycles", res.cycles.size()},
                {"vehicle_queue", io::dist_json(q)}};
    if (cfg.params.M() >= 1) doc["apot_occupancy"] = io::dist_json(sim::empirical_qlen(res.cycles, sim::QueueTarget::apot));
    Output out(c.out);
    out.stream() << doc.dump(2) << '\n';
  } else {
    Output out(c.out);
    io::write_history_csv(out.stream(), res.history);
  }
  std::fprintf(stderr, "simulated %zu patients in %zu complete regeneration cycles\n", res.history.size(),
               res.cycles.size());
  return 0;
}

int cmd_sweep(const Common& c, int m_max, bool with_sim) {
  const Config cfg = resolve(c);
  if (m_max < 0) throw ValidationError("--m-max must be >= 0");
  std::vector<int> range;
  for (int m = 0; m <= m_max; ++m) range.push_back(m);
  const std::vector<MopRow> rows = sweep(cfg.params, range, with_sim, cfg.sim, cfg.numerics);
  Output out(c.out);
  if (c.format == "json") {
    json doc = io::mop_json(rows);
    doc["meta"] = io::meta_json(cfg);
    out.stream() << doc.dump(2) << '\n';
  } else {
    io::write_mop_csv(out.stream(), rows);
  }
  std::vector<double> m, ex, an, sm;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    m.push_back(r.M);
    ex.push_back(r.delay_rate_exact);
    an.push_back(r.delay_rate_ansatz);
    if (r.has_sim) sm.push_back(r.sim_delay_rate);
  }
  std::vector<io::Series> series{{"exact", m, ex}, {"ansatz", m, an}};
  if (!sm.empty()) series.push_back({"simulation", m, sm});
  write_plot(c.plot, "Offload delay rate", "APOT size M", "ambulance-days per month", series);
  for (const auto& r : rows) {
    if (!r.error.empty()) std::fprintf(stderr, "M=%d failed: %s\n", r.M, r.error.c_str());
  }
  return 0;
}

int cmd_test(const Common& c, bool lr, int B, double alpha, unsigned threads) {
  const Config cfg = resolve(c);
  const VehicleQueueSolution sol = solve_vehicle_queue(cfg.params, cfg.numerics);
  const WaitDist exact = exact_vehicle_dist(sol, cfg.numerics);
  const WaitDist approx = approx_vehicle_dist(sol, AlphaSource::littles_law, nullptr, cfg.numerics);
  const stats::KlPair kl = lr ? stats::kl_divergences(exact, approx) : stats::KlPair{0, 0};
  const double t0 = stats::find_t0(exact, approx).t0;
  const auto n = static_cast<std::size_t>(cfg.sim.n_runs);

  std::vector<stats::NullTestOutcome> nulls(lr ? 0 : n);
  std::vector<stats::LrTestOutcome> lrs(lr ? n : 0);
  parallel_for(
      n,
      [&](std::size_t i) {
        const std::uint64_t seed = cfg.sim.seed + i;
        const sim::SimResult res = sim::run(cfg.params, cfg.sim.t_stop, seed);
        const auto waits = sim::cycle_waits(res, sim::WaitTarget::vehicle, true, res.capacity);
        if (lr) {
          lrs[i] = stats::lr_test(waits, exact, approx, kl, B, alpha, seed);
        } else {
          nulls[i] = stats::null_hypothesis_test(waits, exact, approx, B, alpha, seed, t0);
        }
      },
      threads);

  const stats::FarMdr rates = lr ? stats::far_mdr(std::span<const stats::LrTestOutcome>(lrs))
                                 : stats::far_mdr(std::span<const stats::NullTestOutcome>(nulls));
  Output out(c.out);
  if (c.format == "json") {
    json runs = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      runs.push_back(lr ? io::lr_test_json(lrs[i], B, alpha, cfg.sim.seed + i)
                        : io::null_test_json(nulls[i], B, alpha, cfg.sim.seed + i));
    }
    json doc = {{"meta", io::meta_json(cfg)},
                {"test", lr ? "likelihood-ratio" : "null-hypothesis"},
                {"far", rates.far},
                {"mdr", rates.mdr},
                {"runs", runs}};
    if (lr) {
      doc["far_kl"] = rates.far_kl;
      doc["mdr_kl"] = rates.mdr_kl;
      doc["d1"] = kl.d1;
      doc["d2"] = kl.d2;
    } else {
      doc["t0"] = t0;
    }
    out.stream() << doc.dump(2) << '\n';
  } else {
    io::write_far_mdr_csv(out.stream(), {{cfg.params.nu_amb(), cfg.sim.t_stop, rates}});
  }
  return 0;
}

int cmd_oracle(const Common& c, int cap) {
  Config cfg = resolve(c);
  if (c.config.empty()) cfg.params = ModelParams(2, 1, 1.0, 0.6, 0.5, 0.5, 0.5);
  const VehicleQueueSolution sol = solve_vehicle_queue(cfg.params, cfg.numerics);
  const ctmc::OracleResult ref = ctmc::solve(cfg.params, cap);

  const int side = cap + 1;
  std::vector<double> analytic(static_cast<std::size_t>(side) * side, 0.0);
  for (int l = 0; l <= std::min(cap, sol.table.l_max); ++l)
    for (int m = 0; m <= std::min(cap, sol.table.m_max); ++m) analytic[l * side + m] = sol.table.at(l, m);

  const double tv_joint = ctmc::total_variation(analytic, ref.joint_amb);
  const double tv_vehicle = ctmc::total_variation(sol.vehicle.pmf, ref.vehicle.pmf);
  const double tv_apot = sol.M >= 1 ? ctmc::total_variation(sol.apot_conditional.pmf, ref.apot_conditional.pmf) : 0.0;
  const double dp = std::abs(sol.p_nw - ref.p_nw);

  Output out(c.out);
  if (c.format == "json") {
    json doc = {{"meta", io::meta_json(cfg)},   {"cap", cap},
                {"p_nw_abs_diff", dp},          {"tv_joint", tv_joint},
                {"tv_vehicle_queue", tv_vehicle}, {"tv_apot_occupancy", tv_apot}};
    out.stream() << doc.dump(2) << '\n';
  } else {
    out.stream() << "quantity,value\n"
                 << "p_nw_abs_diff," << io::fmt(dp) << '\n'
                 << "tv_joint," << io::fmt(tv_joint) << '\n'
                 << "tv_vehicle_queue," << io::fmt(tv_vehicle) << '\n'
                 << "tv_apot_occupancy," << io::fmt(tv_apot) << '\n';
  }
  return std::max({tv_joint, tv_vehicle, tv_apot}) < 1e-6 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ambulance offload-zone queue: analytic solver, simulator and goodness-of-fit tests"};
  app.require_subcommand(1);

  Common solve_c, sim_c, sweep_c, null_c, lr_c, oracle_c;
  auto* solve = app.add_subcommand("solve", "queue-length and waiting-time distributions for one parameter set");
  add_common(solve, solve_c);

  auto* simulate = app.add_subcommand("simulate", "run the discrete event simulation and export the patient history");
  add_common(simulate, sim_c);

  int m_max = 20;
  bool with_sim = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "measures of performance over APOT sizes 0..m-max");
  add_common(sweep_cmd, sweep_c);
  sweep_cmd->add_option("--m-max", m_max, "largest APOT size");
  sweep_cmd->add_flag("--with-sim", with_sim, "append simulation estimates");

  int B = stats::kDefaultResamples;
  double alpha = stats::kDefaultAlpha;
  unsigned threads = 0;
  auto* test_null = app.add_subcommand("test-null", "null-hypothesis test at t0 over repeated runs");
  add_common(test_null, null_c);
  auto* test_lr = app.add_subcommand("test-lr", "likelihood-ratio test over repeated runs");
  add_common(test_lr, lr_c);
  for (auto* t : {test_null, test_lr}) {
    t->add_option("--resamples", B, "bootstrap resamples")->check(CLI::PositiveNumber);
    t->add_option("--alpha", alpha, "test significance level")->check(CLI::Range(0.0, 1.0));
    t->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  int cap = 80;
  auto* oracle = app.add_subcommand("oracle-ctmc", "compare against a truncated Markov chain (small instances)");
  add_common(oracle, oracle_c);
  oracle->add_option("--cap", cap, "queue truncation per level")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return cmd_solve(solve_c);
    if (*simulate) return cmd_simulate(sim_c);
    if (*sweep_cmd) return cmd_sweep(sweep_c, m_max, with_sim);
    if (*test_null) return cmd_test(null_c, false, B, alpha, threads);
    if (*test_lr) return cmd_test(lr_c, true, B, alpha, threads);
    if (*oracle) return cmd_oracle(oracle_c, cap);
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "error: %s (best %.6g, delta %.3g)\n", e.what(), e.best_value(), e.delta());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
