#include "offload/sim.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <stdexcept>

namespace offload::sim {

namespace {

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
    gen_.seed(seq);
  }

  // 53-bit uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 gen_;
};

enum StreamId : std::uint32_t { kAmbulanceGaps = 1, kWalkInGaps = 2, kAcuity = 3, kService = 4 };

struct Waiting {
  double arrival;
  double apot_entry;
  bool ambulance;
  Acuity level;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.epoch != b.epoch) return a.epoch > b.epoch;
    return a.seq > b.seq;
  }
};

class Simulator {
 public:
  Simulator(const ModelParams& params, std::uint64_t seed, const SimOptions& options)
      : N_(params.N()),
        M_(params.M()),
        mu_(params.mu()),
        nu_hi_(params.nu_hi()),
        nu_lo_(params.nu_lo()),
        options_(options),
        amb_gaps_(seed, kAmbulanceGaps),
        wlk_gaps_(seed, kWalkInGaps),
        acuity_(seed, kAcuity),
        service_(seed, kService) {
    const DerivedRates d = derive_rates(params);
    lambda_amb_ = d.lambda_amb;
    lambda_wlk_ = d.lambda_wlk;
  }

  SimResult run(double t_stop) {
    SimResult out;
    out.t_stop = t_stop;
    result_ = &out;
    out.cycles.boundaries.push_back(0.0);
    current_ = Cycle{};

    if (lambda_amb_ > 0.0) schedule(amb_gaps_.exponential(lambda_amb_), EventKind::ambulance_arrival);
    if (lambda_wlk_ > 0.0) schedule(wlk_gaps_.exponential(lambda_wlk_), EventKind::walk_in_arrival);

    while (!events_.empty() && events_.top().epoch <= t_stop) {
      const Event ev = events_.top();
      events_.pop();
      advance(ev.epoch);
      ++out.events;
      switch (ev.kind) {
        case EventKind::ambulance_arrival: on_ambulance(); break;
        case EventKind::walk_in_arrival: on_walk_in(); break;
        case EventKind::end_service: on_end_service(); break;
      }
      if (options_.check_invariants) check();
    }
    result_ = nullptr;
    return out;
  }

 private:
  void schedule(double delay, EventKind kind) { events_.push(Event{now_ + delay, kind, seq_++}); }

  std::size_t queue_length(QueueTarget target) const {
    switch (target) {
      case QueueTarget::vehicle: return hi_.size() + med_vehicle_.size();
      case QueueTarget::apot: return apot_.size();
      case QueueTarget::hi: return hi_.size();
      case QueueTarget::med: return med_walk_in_.size() + med_vehicle_.size() + apot_.size();
      case QueueTarget::lo: return lo_.size();
      case QueueTarget::aggregate:
        return hi_.size() + med_walk_in_.size() + med_vehicle_.size() + apot_.size() + lo_.size();
    }
    return 0;
  }

  void advance(double t) {
    const double dt = t - now_;
    if (dt > 0.0) {
      for (std::size_t i = 0; i < kQueueTargets; ++i) {
        const std::size_t n = queue_length(static_cast<QueueTarget>(i));
        auto& h = current_.occupancy[i];
        if (h.size() <= n) h.resize(n + 1, 0.0);
        h[n] += dt;
      }
    }
    now_ = t;
  }

  void on_ambulance() {
    schedule(amb_gaps_.exponential(lambda_amb_), EventKind::ambulance_arrival);
    const Acuity level = acuity_.uniform() < nu_hi_ ? Acuity::hi : Acuity::med;
    Waiting w{now_, std::numeric_limits<double>::quiet_NaN(), true, level};
    if (busy_ < N_) {
      admit(w, Source::ambulance);
    } else if (level == Acuity::hi) {
      hi_.push_back(w);
    } else if (static_cast<int>(apot_.size()) < M_) {
      w.apot_entry = now_;
      apot_.push_back(w);
    } else {
      med_vehicle_.push_back(w);
    }
  }

  void on_walk_in() {
    schedule(wlk_gaps_.exponential(lambda_wlk_), EventKind::walk_in_arrival);
    const Acuity level = acuity_.uniform() < nu_lo_ ? Acuity::lo : Acuity::med;
    const Waiting w{now_, std::numeric_limits<double>::quiet_NaN(), false, level};
    if (busy_ < N_) {
      admit(w, Source::walk_in);
    } else if (level == Acuity::lo) {
      lo_.push_back(w);
    } else {
      med_walk_in_.push_back(w);
    }
  }

  void on_end_service() {
    --busy_;
    if (!hi_.empty()) {
      const Waiting w = hi_.front();
      hi_.pop_front();
      admit(w, Source::ambulance);
      return;
    }
    // Intermediate level: one queue in arrival order across walk-ins, APOT and vehicles.
    std::deque<Waiting>* pick = nullptr;
    for (auto* q : {&med_walk_in_, &apot_, &med_vehicle_}) {
      if (!q->empty() && (pick == nullptr || q->front().arrival < pick->front().arrival)) pick = q;
    }
    if (pick != nullptr) {
      const Waiting w = pick->front();
      pick->pop_front();
      if (pick == &apot_) {
        admit(w, Source::apot);
        transfer_to_apot();
      } else {
        admit(w, w.ambulance ? Source::ambulance : Source::walk_in);
      }
      return;
    }
    if (!lo_.empty()) {
      const Waiting w = lo_.front();
      lo_.pop_front();
      admit(w, Source::walk_in);
      return;
    }
    if (busy_ == 0) close_cycle();
  }

  void transfer_to_apot() {
    if (med_vehicle_.empty() || static_cast<int>(apot_.size()) >= M_) return;
    Waiting w = med_vehicle_.front();
    med_vehicle_.pop_front();
    w.apot_entry = now_;
    apot_.push_back(w);
  }

  void admit(const Waiting& w, Source source) {
    ++busy_;
    const double treatment = service_.exponential(mu_);
    if (options_.record_history) {
      const double apot_time = std::isnan(w.apot_entry) ? 0.0 : now_ - w.apot_entry;
      result_->history.push_back(PatientRecord{w.arrival, now_ - w.arrival, treatment, apot_time, source, w.level});
    }
    schedule(treatment, EventKind::end_service);
  }

  void close_cycle() {
    current_.end = now_;
    current_.last = result_->history.size();
    result_->cycles.cycles.push_back(std::move(current_));
    result_->cycles.boundaries.push_back(now_);
    current_ = Cycle{};
    current_.start = now_;
    current_.first = result_->history.size();
  }

  void check() const {
    const bool waiting = queue_length(QueueTarget::aggregate) > 0;
    if (waiting && busy_ != N_) throw std::logic_error("simulation: idle server while patients wait");
    if (static_cast<int>(apot_.size()) > M_) throw std::logic_error("simulation: APOT over capacity");
    if (!med_vehicle_.empty() && static_cast<int>(apot_.size()) < M_) {
      throw std::logic_error("simulation: free APOT place while an eligible ambulance waits");
    }
    if (busy_ < 0 || busy_ > N_) throw std::logic_error("simulation: busy server count out of range");
  }

  int N_;
  int M_;
  double mu_;
  double nu_hi_;
  double nu_lo_;
  double lambda_amb_ = 0;
  double lambda_wlk_ = 0;
  SimOptions options_;
  Stream amb_gaps_, wlk_gaps_, acuity_, service_;

  std::priority_queue<Event, std::vector<Event>, EventLater> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0;
  int busy_ = 0;
  std::deque<Waiting> hi_, med_walk_in_, apot_, med_vehicle_, lo_;
  Cycle current_;
  SimResult* result_ = nullptr;
};

}  // namespace

SimResult run(const ModelParams& params, double t_stop, std::uint64_t seed, const SimOptions& options) {
  if (!(t_stop > 0.0)) throw ValidationError("simulation: t_stop must be positive");
  Simulator s(params, seed, options);
  SimResult out = s.run(t_stop);
  out.capacity = params.capacity();
  return out;
}

DiscreteDist empirical_qlen(const CycleSet& cycles, QueueTarget target) {
  const auto i = static_cast<std::size_t>(target);
  std::vector<double> time;
  double total = 0.0;
  for (const Cycle& c : cycles.cycles) {
    const auto& h = c.occupancy[i];
    if (time.size() < h.size()) time.resize(h.size(), 0.0);
    for (std::size_t n = 0; n < h.size(); ++n) time[n] += h[n];
    total += c.duration();
  }
  if (!(total > 0.0)) return DiscreteDist::from_pmf({1.0});
  for (double& t : time) t /= total;
  return DiscreteDist::from_pmf(std::move(time));
}

bool is_ambulance(const PatientRecord& rec) { return rec.source != Source::walk_in; }

namespace {

bool wanted(const PatientRecord& rec, WaitTarget target) {
  switch (target) {
    case WaitTarget::vehicle: return is_ambulance(rec);
    case WaitTarget::hi: return rec.level == Acuity::hi;
    case WaitTarget::med: return rec.level == Acuity::med;
    case WaitTarget::lo: return rec.level == Acuity::lo;
    case WaitTarget::all: return true;
  }
  return false;
}

double wait_of(const PatientRecord& rec, WaitTarget target) {
  return target == WaitTarget::vehicle ? rec.wait_time - rec.apot_time : rec.wait_time;
}

}  // namespace

std::vector<double> empirical_wait(const std::vector<PatientRecord>& history, WaitTarget target, bool conditional) {
  std::vector<double> out;
  for (const PatientRecord& rec : history) {
    if (!wanted(rec, target)) continue;
    const double w = wait_of(rec, target);
    if (conditional && !(w > 0.0)) continue;
    out.push_back(w);
  }
  return out;
}

std::vector<std::vector<double>> cycle_waits(const SimResult& result, WaitTarget target, bool conditional,
                                             double time_scale) {
  std::vector<std::vector<double>> out;
  out.reserve(result.cycles.size());
  for (const Cycle& c : result.cycles.cycles) {
    std::vector<double> waits;
    for (std::size_t i = c.first; i < c.last; ++i) {
      const PatientRecord& rec = result.history[i];
      if (!wanted(rec, target)) continue;
      const double w = wait_of(rec, target);
      if (conditional && !(w > 0.0)) continue;
      waits.push_back(w * time_scale);
    }
    out.push_back(std::move(waits));
  }
  return out;
}

void write_history_csv(std::ostream& out, const std::vector<PatientRecord>& history) {
  out << "arrival_time,wait_time,treatment_time,apot_time,source,level\n";
  char line[160];
  for (const PatientRecord& r : history) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%d,%d\n", r.arrival_time, r.wait_time, r.treatment_time,
                  r.apot_time, static_cast<int>(r.source), static_cast<int>(r.level));
    out << line;
  }
}

}  // namespace offload::sim
