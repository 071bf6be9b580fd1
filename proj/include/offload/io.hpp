#pragma once

// Flat-file output: CSV tables, JSON mirrors with a meta block, and minimal SVG line charts.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "offload/metrics.hpp"
#include "offload/params.hpp"
#include "offload/qlen.hpp"
#include "offload/sim.hpp"
#include "offload/stats.hpp"
#include "offload/wtime.hpp"

namespace offload::io {

std::string fmt(double v);

/// Columns n,pmf,sf,log10_sf.
void write_dist_csv(std::ostream& out, const DiscreteDist& dist);
nlohmann::json dist_json(const DiscreteDist& dist);

/// Conditional wait curve sampled on a grid, in units of 1/mu.
struct WaitCurve {
  std::vector<double> t;
  std::vector<double> pdf;
  std::vector<double> sf;
};

/// Samples dist on n_points equally spaced times up to the 1e-6 quantile of the conditional law.
/// Solver time is divided by N to express it in units of 1/mu.
WaitCurve sample_wait(const WaitDist& dist, int N, int n_points = 200);

/// Columns t,pdf,sf,log10_sf.
void write_wait_csv(std::ostream& out, const WaitCurve& curve);
nlohmann::json wait_json(const WaitCurve& curve, const WaitDist& dist);

/// Columns M,mean_qlen,p90_qlen,mean_wait,p90_wait,chi,delay_rate_exact,delay_rate_ansatz, then
/// simulation columns when any row carries them.
void write_mop_csv(std::ostream& out, const std::vector<MopRow>& rows);
nlohmann::json mop_json(const std::vector<MopRow>& rows);

struct FarMdrRow {
  double nu_amb;
  double t_stop;
  stats::FarMdr rates;
};

/// Columns nu_amb,t_stop,far,mdr,far_kl,mdr_kl.
void write_far_mdr_csv(std::ostream& out, const std::vector<FarMdrRow>& rows);

nlohmann::json null_test_json(const stats::NullTestOutcome& o, int B, double alpha, std::uint64_t seed);
nlohmann::json lr_test_json(const stats::LrTestOutcome& o, int B, double alpha, std::uint64_t seed);

void write_history_csv(std::ostream& out, const std::vector<sim::PatientRecord>& history);

/// Parameters, seed, tolerances and build information.
nlohmann::json meta_json(const Config& cfg);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series);

}  // namespace offload::io
