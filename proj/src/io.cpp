#include "offload/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "offload/kernels.hpp"

namespace offload::io {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void write_dist_csv(std::ostream& out, const DiscreteDist& dist) {
  out << "n,pmf,sf,log10_sf\n";
  for (std::size_t n = 0; n < dist.pmf.size(); ++n) {
    out << n << ',' << fmt(dist.pmf[n]) << ',' << fmt(dist.sf[n]) << ',' << fmt(std::log10(dist.sf[n])) << '\n';
  }
}

json dist_json(const DiscreteDist& dist) {
  json rows = json::array();
  for (std::size_t n = 0; n < dist.pmf.size(); ++n) {
    rows.push_back({{"n", n}, {"pmf", dist.pmf[n]}, {"sf", dist.sf[n]},
                    {"log10_sf", finite_or_null(std::log10(dist.sf[n]))}});
  }
  return {{"mean", dist.mean},
          {"second_moment", dist.second_moment},
          {"atom0", dist.atom0},
          {"tail_mass", dist.tail_mass},
          {"rows", rows}};
}

WaitCurve sample_wait(const WaitDist& dist, int N, int n_points) {
  WaitCurve c;
  if (dist.degenerate || dist.coef.empty()) return c;
  double t_end = 1.0;
  while (dist.sf(t_end) > 1e-6 && t_end < 1e9) t_end *= 1.5;
  for (int i = 0; i < n_points; ++i) {
    const double t = t_end * i / (n_points - 1);
    c.t.push_back(t / N);
    c.pdf.push_back(dist.pdf(t) * N);
    c.sf.push_back(dist.sf(t));
  }
  return c;
}

void write_wait_csv(std::ostream& out, const WaitCurve& curve) {
  out << "t,pdf,sf,log10_sf\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out << fmt(curve.t[i]) << ',' << fmt(curve.pdf[i]) << ',' << fmt(curve.sf[i]) << ','
        << fmt(std::log10(curve.sf[i])) << '\n';
  }
}

json wait_json(const WaitCurve& curve, const WaitDist& dist) {
  json rows = json::array();
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    rows.push_back({{"t", curve.t[i]}, {"pdf", curve.pdf[i]}, {"sf", curve.sf[i]},
                    {"log10_sf", finite_or_null(std::log10(curve.sf[i]))}});
  }
  return {{"kind", dist.kind == WaitKind::exact ? "exact" : "approximate"},
          {"time_unit", "1/mu"},
          {"conditional_on", "entering the vehicle queue"},
          {"atom0", dist.atom0},
          {"mixture_alpha", dist.weights.alpha},
          {"mixture_beta", finite_or_null(dist.weights.beta)},
          {"chi_eff", dist.weights.chi_eff},
          {"diagnostic", dist.diagnostic},
          {"rows", rows}};
}

void write_mop_csv(std::ostream& out, const std::vector<MopRow>& rows) {
  const bool sim = std::any_of(rows.begin(), rows.end(), [](const MopRow& r) { return r.has_sim; });
  out << "M,mean_qlen,p90_qlen,mean_wait,p90_wait,chi,delay_rate_exact,delay_rate_ansatz";
  if (sim) out << ",sim_mean_qlen,sim_p90_qlen,sim_mean_wait,sim_p90_wait,sim_delay_rate";
  out << '\n';
  for (const MopRow& r : rows) {
    if (!r.error.empty()) {
      out << r.M << ",,,,,,,";
      if (sim) out << ",,,,,";
      out << '\n';
      continue;
    }
    out << r.M << ',' << fmt(r.mean_qlen) << ',' << fmt(r.p90_qlen) << ',' << fmt(r.mean_wait) << ','
        << fmt(r.p90_wait) << ',' << fmt(r.chi) << ',' << fmt(r.delay_rate_exact) << ','
        << fmt(r.delay_rate_ansatz);
    if (sim) {
      out << ',' << fmt(r.sim_mean_qlen) << ',' << fmt(r.sim_p90_qlen) << ',' << fmt(r.sim_mean_wait) << ','
          << fmt(r.sim_p90_wait) << ',' << fmt(r.sim_delay_rate);
    }
    out << '\n';
  }
}

json mop_json(const std::vector<MopRow>& rows) {
  json arr = json::array();
  for (const MopRow& r : rows) {
    json j = {{"M", r.M}};
    if (!r.error.empty()) {
      j["error"] = r.error;
    } else {
      j.update({{"mean_qlen", r.mean_qlen},
                {"p90_qlen", r.p90_qlen},
                {"mean_wait", r.mean_wait},
                {"p90_wait", r.p90_wait},
                {"p90_wait_scaled", r.p90_wait_scaled},
                {"chi", r.chi},
                {"delay_rate_exact", r.delay_rate_exact},
                {"delay_rate_ansatz", r.delay_rate_ansatz}});
      if (r.has_sim) {
        j["sim"] = {{"mean_qlen", r.sim_mean_qlen},
                    {"p90_qlen", r.sim_p90_qlen},
                    {"mean_wait", r.sim_mean_wait},
                    {"p90_wait", r.sim_p90_wait},
                    {"delay_rate", r.sim_delay_rate}};
      }
    }
    arr.push_back(std::move(j));
  }
  return {{"wait_unit", "1/mu"}, {"delay_rate_unit", "ambulance-days per 30-day month"}, {"rows", arr}};
}

void write_far_mdr_csv(std::ostream& out, const std::vector<FarMdrRow>& rows) {
  out << "nu_amb,t_stop,far,mdr,far_kl,mdr_kl\n";
  for (const auto& r : rows) {
    out << fmt(r.nu_amb) << ',' << fmt(r.t_stop) << ',' << fmt(r.rates.far) << ',' << fmt(r.rates.mdr) << ','
        << fmt(r.rates.far_kl) << ',' << fmt(r.rates.mdr_kl) << '\n';
  }
}

namespace {

json ci_json(const stats::BootstrapCI& ci) { return json::array({ci.lo, ci.hi}); }

}  // namespace

json null_test_json(const stats::NullTestOutcome& o, int B, double alpha, std::uint64_t seed) {
  return {{"statistic", o.ci.point},
          {"t0", o.t0},
          {"ci", ci_json(o.ci)},
          {"clt_ci", json::array({o.clt.lo, o.clt.hi})},
          {"sf_exact", o.sf_exact},
          {"sf_approx", o.sf_approx},
          {"h_ex", o.h_ex},
          {"h_apx", o.h_apx},
          {"B", B},
          {"alpha", alpha},
          {"seed", seed}};
}

json lr_test_json(const stats::LrTestOutcome& o, int B, double alpha, std::uint64_t seed) {
  return {{"statistic", o.lambda},
          {"lambda", o.lambda},
          {"ci", ci_json(o.ci)},
          {"d1", o.d1},
          {"d2", o.d2},
          {"h_fa", o.h_fa},
          {"h_md", o.h_md},
          {"k_fa", o.k_fa},
          {"k_md", o.k_md},
          {"B", B},
          {"alpha", alpha},
          {"seed", seed}};
}

void write_history_csv(std::ostream& out, const std::vector<sim::PatientRecord>& history) {
  sim::write_history_csv(out, history);
}

json meta_json(const Config& cfg) {
  const ModelParams& p = cfg.params;
  return {{"params",
           {{"N", p.N()}, {"M", p.M()}, {"mu", p.mu()}, {"r", p.r()}, {"nu_amb", p.nu_amb()},
            {"nu_hi", p.nu_hi()}, {"nu_lo", p.nu_lo()}}},
          {"sim", {{"t_stop", cfg.sim.t_stop}, {"seed", cfg.sim.seed}, {"n_runs", cfg.sim.n_runs}}},
          {"numerics",
           {{"quad_tol", cfg.numerics.quad_tol},
            {"quad_max_points", cfg.numerics.quad_max_points},
            {"tail_mass_tol", cfg.numerics.tail_mass_tol},
            {"table_cap", cfg.numerics.table_cap}}},
          {"versions", {{"offload", "1.0.0"}, {"kernels", std::string(simd::isa_name(simd::active_isa()))}}}};
}

void write_svg_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                     const std::string& y_label, const std::vector<Series>& series) {
  constexpr double W = 720, H = 440, left = 70, right = 160, top = 40, bottom = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) { x0 -= 0.5; x1 += 0.5; }
  if (!(y1 > y0)) { y0 -= 0.5; y1 += 0.5; }
  const double pw = W - left - right, ph = H - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << px(fx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">" << fmt_short(fx)
        << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(fy) + 4 << "\" text-anchor=\"end\">" << fmt_short(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
      << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 16 + 18.0 * static_cast<double>(k);
    out << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - right + 36 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace offload::io
