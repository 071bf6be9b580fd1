#pragma once

// Brute-force continuous-time Markov chain steady states used as an independent reference for
// the generating-function results on small instances.

#include <vector>

#include "offload/params.hpp"
#include "offload/qlen.hpp"

namespace offload::ctmc {

struct Transition {
  int from;
  int to;
  double rate;
};

/// Stationary law of a finite irreducible chain given by its off-diagonal rates (sparse LU).
std::vector<double> stationary(int n_states, const std::vector<Transition>& transitions);

/// M/M/N birth-death chain truncated at N + extra states; probability an arrival finds a free server.
double no_wait_probability(int N, double r, int extra = 2000);

/// Chain on (l, m) observed only while all servers are busy: arrivals at r_hi, r_med, one
/// departure per unit time served high first. Row-major (cap+1) x (cap+1).
std::vector<double> busy_joint(double r_hi, double r_med, int cap);

struct OracleResult {
  int cap = 0;
  double p_nw = 0;
  std::vector<double> joint_amb;  ///< thinned, (cap+1) x (cap+1), row-major in l
  DiscreteDist vehicle_conditional;
  DiscreteDist vehicle;
  DiscreteDist apot_conditional;  ///< empty when M = 0
};

OracleResult solve(const ModelParams& params, int cap = 80);

/// Half the L1 distance; the shorter vector is padded with zeros.
double total_variation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace offload::ctmc
