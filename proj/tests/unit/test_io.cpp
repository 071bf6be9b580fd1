#include <doctest.h>

#include <sstream>

#include "offload/io.hpp"

using namespace offload;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("distribution CSV and JSON") {
  const DiscreteDist d = DiscreteDist::from_pmf({0.5, 0.25, 0.25});
  std::ostringstream out;
  io::write_dist_csv(out, d);
  CHECK(first_line(out.str()) == "n,pmf,sf,log10_sf");
  CHECK(out.str().find("\n0,0.5,0.5,") != std::string::npos);
  const nlohmann::json j = io::dist_json(d);
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][1]["pmf"].get<double>() == 0.25);
  CHECK(j["mean"].get<double>() == doctest::Approx(0.75));
}

TEST_CASE("numbers round-trip") {
  const double x = 0.1 + 0.2;
  CHECK(std::stod(io::fmt(x)) == x);
}

TEST_CASE("wait curve is expressed in units of the mean treatment time") {
  const WaitDist d = WaitDist::exponential(1.0);
  const io::WaitCurve c = io::sample_wait(d, 10, 50);
  REQUIRE(c.t.size() == 50);
  CHECK(c.t.front() == 0.0);
  CHECK(c.sf.front() == doctest::Approx(1.0));
  CHECK(c.pdf.front() == doctest::Approx(10.0));
  CHECK(c.sf.back() == doctest::Approx(1e-6).epsilon(1e-6));
  std::ostringstream out;
  io::write_wait_csv(out, c);
  CHECK(first_line(out.str()) == "t,pdf,sf,log10_sf");
}

TEST_CASE("MOP table schema") {
  MopRow row;
  row.M = 3;
  std::ostringstream plain;
  io::write_mop_csv(plain, {row});
  CHECK(first_line(plain.str()) == "M,mean_qlen,p90_qlen,mean_wait,p90_wait,chi,delay_rate_exact,delay_rate_ansatz");
  row.has_sim = true;
  std::ostringstream with_sim;
  io::write_mop_csv(with_sim, {row});
  CHECK(first_line(with_sim.str()).rfind("M,mean_qlen,p90_qlen,mean_wait,p90_wait,chi,delay_rate_exact,delay_rate_ansatz,",
                                         0) == 0);
  const nlohmann::json mop = io::mop_json({row});
  CHECK(mop["rows"].size() == 1);
  CHECK(mop["rows"][0].contains("sim"));
  CHECK(mop["wait_unit"] == "1/mu");
}

TEST_CASE("meta block") {
  const nlohmann::json meta = io::meta_json(Config{});
  CHECK(meta["params"]["N"] == 10);
  CHECK(meta.contains("sim"));
  CHECK(meta["numerics"]["quad_tol"].get<double>() == 1e-12);
  CHECK(meta.contains("versions"));
}

TEST_CASE("SVG chart") {
  std::ostringstream out;
  io::write_svg_chart(out, "title", "x", "y", {{"a", {0, 1, 2}, {1, 4, 9}}});
  CHECK(out.str().rfind("<svg", 0) == 0);
  CHECK(out.str().find("polyline") != std::string::npos);
}
