#pragma once

// Deterministic discrete-event simulation of the online model. Algorithms
// only ever see jobs whose release time has passed and act through a
// `SimulationContext`, which rejects retroactive or structurally invalid
// actions at intake. The finished schedule is validated independently.

#include "cloudsched/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace cloudsched {

/// An algorithm tried to act in the past or on a rental it may not touch.
class CausalityError : public Error {
 public:
  using Error::Error;
};

struct OnlineEvent {
  enum class Kind : std::uint8_t { JobsReleased, WakeUp };

  Time time{0};
  Kind kind = Kind::JobsReleased;
  std::vector<Job> jobs;  // JobsReleased only, canonical order
  std::int64_t tag = 0;   // WakeUp only
};

struct OpenMachine {
  RentalId rental;
  MachineType type = MachineType::A;
  Time at{0};
};
struct CloseMachine {
  RentalId rental;
  Time at{0};
};
struct AssignJob {
  std::string job_id;
  RentalId rental;
  Time start{0};
};
struct RequestWakeUp {
  Time at{0};
  std::int64_t tag = 0;
};
struct DeclareInfeasible {
  std::string job_id;
  std::string reason;
};

using AlgorithmAction =
    std::variant<OpenMachine, CloseMachine, AssignJob, RequestWakeUp, DeclareInfeasible>;

struct TraceEntry {
  Time now{0};
  AlgorithmAction action;
  bool automatic = false;  // emitted by the harness (final closes), not the algorithm
};

struct DeclinedJob {
  std::string job_id;
  Time at{0};
  std::string reason;
};

/// Harness-side view of a rental during a run.
struct RentalState {
  RentalId id;
  MachineType type = MachineType::A;
  Time open_at{0};
  Time ready_at{0};
  Time committed_end{0};  // latest completion among assigned jobs (ready_at if none)
  std::size_t assigned = 0;
  std::optional<Time> close_at;
};

class SimulationContext {
 public:
  SimulationContext(const Instance& instance, bool record_trace)
      : instance_(instance), record_trace_(record_trace) {}

  Time now() const { return now_; }
  const MachineParams& params() const { return instance_.params(); }

  RentalId open_machine(MachineType type, Time at) {
    if (at < now_) throw CausalityError("causality violation: open at " + to_string(at));
    RentalId id{static_cast<std::uint32_t>(rentals_.size())};
    Time ready = at + params().setup(type);
    rentals_.push_back(RentalState{id, type, at, ready, ready, 0, std::nullopt});
    record(OpenMachine{id, type, at});
    return id;
  }

  void close_machine(RentalId id, Time at) {
    RentalState& r = mutable_rental(id);
    if (r.close_at) throw CausalityError("rental " + to_string(id) + " already closed");
    if (at < now_) throw CausalityError("causality violation: close at " + to_string(at));
    if (at < r.ready_at) throw CausalityError("rental " + to_string(id) + " closed during setup");
    if (at < r.committed_end) {
      throw CausalityError("rental " + to_string(id) + " closed before committed work ends");
    }
    r.close_at = at;
    record(CloseMachine{id, at});
  }

  void assign(const std::string& job_id, RentalId id, Time start) {
    const Job* job = instance_.find(job_id);
    if (job == nullptr || job->release > now_) {
      rejected_.push_back(Violation{ViolationKind::Assignment, job_id, id, {},
                                    "action references a job not yet released"});
      return;
    }
    RentalState& r = mutable_rental(id);
    if (start < now_) throw CausalityError("causality violation: start " + to_string(start));
    if (start < r.ready_at) {
      throw CausalityError("job '" + job_id + "' starts before rental " + to_string(id) +
                           " finishes setup");
    }
    Time end = start + job->size(r.type);
    if (r.close_at && end > *r.close_at) {
      throw CausalityError("job '" + job_id + "' assigned to closed rental " + to_string(id));
    }
    r.committed_end = std::max(r.committed_end, end);
    ++r.assigned;
    assignments_.push_back(Assignment{job_id, id, start});
    record(AssignJob{job_id, id, start});
  }

  void request_wakeup(Time at, std::int64_t tag) {
    if (at < now_) throw CausalityError("causality violation: wake-up at " + to_string(at));
    wakeups_.push(Pending{at, sequence_++, tag});
    record(RequestWakeUp{at, tag});
  }

  void declare_infeasible(const std::string& job_id, std::string reason) {
    declined_.push_back(DeclinedJob{job_id, now_, reason});
    record(DeclareInfeasible{job_id, std::move(reason)});
  }

  const RentalState& rental(RentalId id) const {
    if (id.value >= rentals_.size()) throw CausalityError("unknown rental " + to_string(id));
    return rentals_[id.value];
  }

  const std::vector<RentalState>& rentals() const { return rentals_; }

  /// Rentals without a committed close, ascending id.
  std::vector<RentalId> open_rentals() const {
    std::vector<RentalId> out;
    for (const RentalState& r : rentals_) {
      if (!r.close_at) out.push_back(r.id);
    }
    return out;
  }

 private:
  friend struct Simulator;

  struct Pending {
    Time at;
    std::uint64_t seq;
    std::int64_t tag;
    bool operator>(const Pending& o) const { return std::tie(at, seq) > std::tie(o.at, o.seq); }
  };

  RentalState& mutable_rental(RentalId id) {
    if (id.value >= rentals_.size()) throw CausalityError("unknown rental " + to_string(id));
    return rentals_[id.value];
  }

  void record(AlgorithmAction action, bool automatic = false) {
    if (record_trace_) trace_.push_back(TraceEntry{now_, std::move(action), automatic});
  }

  const Instance& instance_;
  bool record_trace_;
  Time now_{0};
  std::uint64_t sequence_ = 0;
  std::vector<RentalState> rentals_;
  std::vector<Assignment> assignments_;
  std::vector<DeclinedJob> declined_;
  std::vector<Violation> rejected_;
  std::vector<TraceEntry> trace_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> wakeups_;
};

class OnlineAlgorithm {
 public:
  virtual ~OnlineAlgorithm() = default;
  virtual std::string name() const = 0;
  /// Called once before the first event; must reset all per-run state.
  virtual void start(SimulationContext& /*ctx*/) {}
  virtual void on_event(const OnlineEvent& event, SimulationContext& ctx) = 0;
};

struct RunReport {
  std::string algorithm;
  Schedule schedule;
  Cost cost{0};
  ValidationReport validation;
  std::optional<Rational> ratio;
  std::vector<DeclinedJob> declined;
  std::vector<TraceEntry> trace;

  bool feasible() const { return validation.feasible(); }
};

inline Rational competitive_ratio(const Cost& report_cost, const Cost& opt_cost) {
  if (opt_cost <= 0) throw ParameterError("optimal cost must be positive");
  return report_cost / opt_cost;
}

struct Simulator {
  static RunReport run(OnlineAlgorithm& algorithm, const Instance& instance,
                       std::optional<Cost> opt_cost, bool record_trace) {
    SimulationContext ctx(instance, record_trace);
    algorithm.start(ctx);

    const std::vector<Job>& jobs = instance.jobs();
    std::size_t next = 0;
    while (next < jobs.size() || !ctx.wakeups_.empty()) {
      bool release_first =
          next < jobs.size() && (ctx.wakeups_.empty() || jobs[next].release <= ctx.wakeups_.top().at);
      if (release_first) {
        OnlineEvent event{jobs[next].release, OnlineEvent::Kind::JobsReleased, {}, 0};
        while (next < jobs.size() && jobs[next].release == event.time) event.jobs.push_back(jobs[next++]);
        ctx.now_ = event.time;
        algorithm.on_event(event, ctx);
      } else {
        SimulationContext::Pending p = ctx.wakeups_.top();
        ctx.wakeups_.pop();
        ctx.now_ = p.at;
        algorithm.on_event(OnlineEvent{p.at, OnlineEvent::Kind::WakeUp, {}, p.tag}, ctx);
      }
    }

    RunReport report;
    report.algorithm = algorithm.name();
    for (RentalState& r : ctx.rentals_) {
      if (!r.close_at) {
        r.close_at = r.committed_end;
        ctx.record(CloseMachine{r.id, r.committed_end}, true);
      }
      report.schedule.rentals.push_back(Rental{r.id, r.type, r.open_at, *r.close_at});
    }
    report.schedule.assignments = ctx.assignments_;
    report.cost = total_cost(report.schedule, instance.params());
    report.validation = validate(report.schedule, instance);
    report.validation.violations.insert(report.validation.violations.end(), ctx.rejected_.begin(),
                                        ctx.rejected_.end());
    if (opt_cost) report.ratio = competitive_ratio(report.cost, *opt_cost);
    report.declined = std::move(ctx.declined_);
    report.trace = std::move(ctx.trace_);
    return report;
  }
};

/// Replays the instance's releases (and requested wake-ups) in time order
/// against `algorithm`. At equal times, releases are delivered before
/// wake-ups; wake-ups at equal times fire in request order.
inline RunReport run_online(OnlineAlgorithm& algorithm, const Instance& instance,
                            std::optional<Cost> opt_cost = std::nullopt, bool record_trace = false) {
  return Simulator::run(algorithm, instance, opt_cost, record_trace);
}

}  // namespace cloudsched
