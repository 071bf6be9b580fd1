#include "offload/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace offload::ctmc {

std::vector<double> stationary(int n_states, const std::vector<Transition>& transitions) {
  if (n_states < 1) throw ValidationError("stationary: need at least one state");
  std::vector<double> out_rate(static_cast<std::size_t>(n_states), 0.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(transitions.size() * 2 + static_cast<std::size_t>(n_states));
  for (const Transition& t : transitions) {
    if (t.from == t.to || t.rate == 0.0) continue;
    out_rate[t.from] += t.rate;
    // Balance equations pi Q = 0 as Q^T pi = 0; row 0 is replaced by the normalization.
    if (t.to != 0) trip.emplace_back(t.to, t.from, t.rate);
  }
  for (int i = 1; i < n_states; ++i) trip.emplace_back(i, i, -out_rate[i]);
  for (int j = 0; j < n_states; ++j) trip.emplace_back(0, j, 1.0);

  Eigen::SparseMatrix<double> A(n_states, n_states);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary: sparse LU factorization failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_states);
  rhs(0) = 1.0;
  const Eigen::VectorXd pi = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("stationary: sparse LU solve failed");
  std::vector<double> out(pi.data(), pi.data() + n_states);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

double no_wait_probability(int N, double r, int extra) {
  if (N < 1 || !(r > 0.0 && r < 1.0)) throw ValidationError("ctmc no_wait_probability: bad N or r");
  const int n = N + extra + 1;
  std::vector<Transition> tr;
  const double lambda = N * r;
  for (int k = 0; k + 1 < n; ++k) {
    tr.push_back({k, k + 1, lambda});
    tr.push_back({k + 1, k, static_cast<double>(std::min(k + 1, N))});
  }
  const std::vector<double> pi = stationary(n, tr);
  double free = 0.0;
  for (int k = 0; k < N; ++k) free += pi[k];
  return free;
}

std::vector<double> busy_joint(double r_hi, double r_med, int cap) {
  const int side = cap + 1;
  const auto id = [side](int l, int m) { return l * side + m; };
  std::vector<Transition> tr;
  for (int l = 0; l <= cap; ++l) {
    for (int m = 0; m <= cap; ++m) {
      if (l < cap) tr.push_back({id(l, m), id(l + 1, m), r_hi});
      if (m < cap) tr.push_back({id(l, m), id(l, m + 1), r_med});
      if (l > 0) {
        tr.push_back({id(l, m), id(l - 1, m), 1.0});
      } else if (m > 0) {
        tr.push_back({id(l, m), id(l, m - 1), 1.0});
      }
    }
  }
  return stationary(side * side, tr);
}

namespace {

double binomial_pmf(int n, int k, double p) {
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_c + k * std::log(p) + (n - k) * std::log1p(-p));
}

}  // namespace

OracleResult solve(const ModelParams& params, int cap) {
  if (cap < params.M() + 1) throw ValidationError("ctmc solve: cap must exceed M");
  const DerivedRates r = derive_rates(params);
  const int side = cap + 1;
  const std::vector<double> joint = busy_joint(r.r_hi, r.r_med, cap);

  OracleResult out;
  out.cap = cap;
  out.p_nw = no_wait_probability(params.N(), params.r());
  out.joint_amb.assign(joint.size(), 0.0);
  for (int l = 0; l <= cap; ++l)
    for (int n = 0; n <= cap; ++n)
      for (int m = 0; m <= n; ++m) out.joint_amb[l * side + m] += joint[l * side + n] * binomial_pmf(n, m, r.p);

  const int M = params.M();
  std::vector<double> vehicle(static_cast<std::size_t>(2 * cap) + 1, 0.0);
  std::vector<double> apot(static_cast<std::size_t>(M) + 1, 0.0);
  for (int l = 0; l <= cap; ++l) {
    for (int m = 0; m <= cap; ++m) {
      const double v = out.joint_amb[l * side + m];
      vehicle[static_cast<std::size_t>(l + std::max(0, m - M))] += v;
      apot[static_cast<std::size_t>(std::min(m, M))] += v;
    }
  }
  out.vehicle_conditional = DiscreteDist::from_pmf(std::move(vehicle));
  out.vehicle = out.vehicle_conditional.unconditioned(out.p_nw);
  if (M >= 1) out.apot_conditional = DiscreteDist::from_pmf(std::move(apot));
  return out;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    acc += std::abs(x - y);
  }
  return 0.5 * acc;
}

}  // namespace offload::ctmc
