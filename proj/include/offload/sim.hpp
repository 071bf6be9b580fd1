#pragma once

// Discrete event simulation of the ambulance / ED / APOT system. Times in the patient history are
// physical (units of 1/mu); multiply by N mu to compare with the analytic side.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "offload/params.hpp"
#include "offload/qlen.hpp"

namespace offload::sim {

enum class EventKind : int { ambulance_arrival = 1, walk_in_arrival = 2, end_service = 3 };
enum class Source : int { ambulance = 1, walk_in = 2, apot = 3 };
enum class Acuity : int { lo = 1, med = 2, hi = 3 };

struct Event {
  double epoch;
  EventKind kind;
  std::uint64_t seq;
};

struct PatientRecord {
  double arrival_time;
  double wait_time;
  double treatment_time;
  double apot_time;
  Source source;  ///< where the patient came from when admitted to the ED
  Acuity level;
};

/// Time-weighted occupancy is tracked for these queues.
enum class QueueTarget : int { vehicle = 0, apot, hi, med, lo, aggregate };
inline constexpr std::size_t kQueueTargets = 6;

/// One regeneration cycle: an idle period plus the busy period that follows, ending when the
/// system next empties. Records [first, last) of the history arrived (and were admitted) in it.
struct Cycle {
  double start = 0;
  double end = 0;
  std::size_t first = 0;
  std::size_t last = 0;
  std::array<std::vector<double>, kQueueTargets> occupancy;  ///< time spent at each length

  double duration() const { return end - start; }
};

struct CycleSet {
  std::vector<double> boundaries;  ///< epochs at which the system became empty, starting at 0
  std::vector<Cycle> cycles;       ///< complete cycles only

  std::size_t size() const { return cycles.size(); }
};

struct SimOptions {
  bool check_invariants = false;  ///< verify work conservation and the APOT bound on every event
  bool record_history = true;     ///< off: only cycles and occupancy are kept (record ranges stay empty)
};

struct SimResult {
  std::vector<PatientRecord> history;
  CycleSet cycles;
  double t_stop = 0;
  double capacity = 0;  ///< N mu
  std::uint64_t events = 0;
};

SimResult run(const ModelParams& params, double t_stop, std::uint64_t seed, const SimOptions& options = {});

/// Pooled time-weighted queue-length distribution over the complete cycles.
DiscreteDist empirical_qlen(const CycleSet& cycles, QueueTarget target);

enum class WaitTarget { vehicle, hi, med, lo, all };

/// Waits from the history (physical time). Vehicle waits are wait - apot_time for ambulance
/// patients. Conditional mode keeps strictly positive values only.
std::vector<double> empirical_wait(const std::vector<PatientRecord>& history, WaitTarget target, bool conditional);

/// Same, grouped by complete cycle and multiplied by time_scale.
std::vector<std::vector<double>> cycle_waits(const SimResult& result, WaitTarget target, bool conditional,
                                             double time_scale = 1.0);

bool is_ambulance(const PatientRecord& rec);

void write_history_csv(std::ostream& out, const std::vector<PatientRecord>& history);

}  // namespace offload::sim
