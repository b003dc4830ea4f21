#pragma once

// Online algorithms: A1 (one exclusive machine per job), the GreedyFit
// family (any-fit onto already open machines), and BatchedDispatch(eps),
// which buffers jobs per phase of length Delta = eps*s_B/2, solves tentative
// schedules at each phase end and realizes them by shifting starts past the
// setups.

#include "cloudsched/harness.hpp"
#include "cloudsched/tentative.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cloudsched {

// ---------------------------------------------------------------------------
// A1

inline MachineType a1_choose_type(const Job& job, const MachineParams& params) {
  bool a_not_dearer = params.setup_a + job.size_a <= params.cost_b * (params.setup_b + job.size_b);
  if ((a_not_dearer && slack(job, MachineType::A) >= params.setup_a) ||
      slack(job, MachineType::B) < params.setup_b) {
    return MachineType::A;
  }
  return MachineType::B;
}

class A1 final : public OnlineAlgorithm {
 public:
  std::string name() const override { return "a1"; }

  void on_event(const OnlineEvent& event, SimulationContext& ctx) override {
    if (event.kind != OnlineEvent::Kind::JobsReleased) return;
    for (const Job& job : event.jobs) {
      MachineType type = a1_choose_type(job, ctx.params());
      Time start = ctx.now() + ctx.params().setup(type);
      Time end = start + job.size(type);
      if (end > job.deadline) {
        ctx.declare_infeasible(job.id, "infeasible job: exclusive type " + std::string(to_string(type)) +
                                           " machine misses the deadline");
        continue;
      }
      RentalId id = ctx.open_machine(type, ctx.now());
      ctx.assign(job.id, id, start);
      ctx.close_machine(id, end);
    }
  }
};

// ---------------------------------------------------------------------------
// GreedyFit

struct GreedyFitPolicy {
  enum class Order : std::uint8_t { Id, Deadline };
  enum class OpenChoice : std::uint8_t { A1Rule, Cheapest };
  enum class FitChoice : std::uint8_t { First, Best };

  Order order = Order::Id;
  OpenChoice open_choice = OpenChoice::A1Rule;
  FitChoice fit_choice = FitChoice::First;
  bool close_on_idle = true;

  /// "default", or comma-separated key=value pairs:
  /// order=id|deadline, open=a1|cheapest, fit=first|best, close=1|0.
  static GreedyFitPolicy parse(std::string_view text) {
    GreedyFitPolicy policy;
    if (text.empty() || text == "default") return policy;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      std::string_view item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
      std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw InputError("greedyfit policy item '" + std::string(item) + "' is not key=value");
      }
      std::string_view key = item.substr(0, eq);
      std::string_view value = item.substr(eq + 1);
      auto bad = [&] {
        return InputError("greedyfit policy: bad value '" + std::string(value) + "' for '" +
                          std::string(key) + "'");
      };
      if (key == "order") {
        if (value == "id") policy.order = Order::Id;
        else if (value == "deadline") policy.order = Order::Deadline;
        else throw bad();
      } else if (key == "open") {
        if (value == "a1") policy.open_choice = OpenChoice::A1Rule;
        else if (value == "cheapest") policy.open_choice = OpenChoice::Cheapest;
        else throw bad();
      } else if (key == "fit") {
        if (value == "first") policy.fit_choice = FitChoice::First;
        else if (value == "best") policy.fit_choice = FitChoice::Best;
        else throw bad();
      } else if (key == "close") {
        if (value == "1" || value == "true") policy.close_on_idle = true;
        else if (value == "0" || value == "false") policy.close_on_idle = false;
        else throw bad();
      } else {
        throw InputError("greedyfit policy: unknown key '" + std::string(key) + "'");
      }
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return policy;
  }

  std::string to_string() const {
    return std::string("order=") + (order == Order::Id ? "id" : "deadline") +
           ",open=" + (open_choice == OpenChoice::A1Rule ? "a1" : "cheapest") +
           ",fit=" + (fit_choice == FitChoice::First ? "first" : "best") +
           ",close=" + (close_on_idle ? "1" : "0");
  }
};

/// Earliest start of `job` on an open rental at time `now`.
inline Time greedyfit_earliest_start(const Job& job, const RentalState& rental, Time now) {
  return std::max({now, rental.ready_at, rental.committed_end, job.release});
}

/// A job fits an open rental "reasonably" when it meets its deadline there
/// and its processing cost on that rental does not exceed the cheaper of
/// setting up a fresh machine of either type for it.
inline bool greedyfit_reasonable(const Job& job, const RentalState& rental, Time now,
                                 const MachineParams& params) {
  Time finish = greedyfit_earliest_start(job, rental, now) + job.size(rental.type);
  if (finish > job.deadline) return false;
  Cost here = params.cost(rental.type) * job.size(rental.type);
  Cost fresh = std::min(params.cost(MachineType::A) * (params.setup_a + job.size_a),
                        params.cost(MachineType::B) * (params.setup_b + job.size_b));
  return here <= fresh;
}

class GreedyFit final : public OnlineAlgorithm {
 public:
  explicit GreedyFit(GreedyFitPolicy policy = {}) : policy_(policy) {}

  std::string name() const override { return "greedyfit:" + policy_.to_string(); }
  const GreedyFitPolicy& policy() const { return policy_; }

  void on_event(const OnlineEvent& event, SimulationContext& ctx) override {
    if (event.kind == OnlineEvent::Kind::WakeUp) {
      RentalId id{static_cast<std::uint32_t>(event.tag)};
      const RentalState& r = ctx.rental(id);
      if (!r.close_at && r.committed_end == ctx.now()) ctx.close_machine(id, ctx.now());
      return;
    }
    std::vector<Job> batch = event.jobs;
    if (policy_.order == GreedyFitPolicy::Order::Deadline) {
      std::stable_sort(batch.begin(), batch.end(),
                       [](const Job& l, const Job& r) { return l.deadline < r.deadline; });
    } else {
      std::stable_sort(batch.begin(), batch.end(), [](const Job& l, const Job& r) { return l.id < r.id; });
    }
    for (const Job& job : batch) place(job, ctx);
  }

 private:
  void place(const Job& job, SimulationContext& ctx) {
    const MachineParams& params = ctx.params();
    std::optional<RentalId> target;
    Time best_gap{0};
    for (RentalId id : ctx.open_rentals()) {
      const RentalState& r = ctx.rental(id);
      if (!greedyfit_reasonable(job, r, ctx.now(), params)) continue;
      if (policy_.fit_choice == GreedyFitPolicy::FitChoice::First) {
        target = id;
        break;
      }
      Time gap = greedyfit_earliest_start(job, r, ctx.now()) - r.committed_end;
      if (!target || gap < best_gap) {
        target = id;
        best_gap = gap;
      }
    }
    if (!target) {
      MachineType type = open_type(job, params, ctx.now());
      if (ctx.now() + params.setup(type) + job.size(type) > job.deadline) {
        ctx.declare_infeasible(job.id, "infeasible job: no open machine fits and a new type " +
                                           std::string(to_string(type)) + " machine is too late");
        return;
      }
      target = ctx.open_machine(type, ctx.now());
    }
    const RentalState& r = ctx.rental(*target);
    ctx.assign(job.id, *target, greedyfit_earliest_start(job, r, ctx.now()));
    if (policy_.close_on_idle) {
      ctx.request_wakeup(ctx.rental(*target).committed_end, static_cast<std::int64_t>(target->value));
    }
  }

  MachineType open_type(const Job& job, const MachineParams& params, Time now) const {
    if (policy_.open_choice == GreedyFitPolicy::OpenChoice::A1Rule) return a1_choose_type(job, params);
    std::optional<MachineType> best;
    Cost best_cost{0};
    for (MachineType type : kMachineTypes) {
      if (now + params.setup(type) + job.size(type) > job.deadline) continue;
      Cost c = params.cost(type) * (params.setup(type) + job.size(type));
      if (!best || c < best_cost) {
        best = type;
        best_cost = c;
      }
    }
    return best.value_or(a1_choose_type(job, params));
  }

  GreedyFitPolicy policy_;
};

// ---------------------------------------------------------------------------
// BatchedDispatch

enum class SlackClass : std::uint8_t { J1, J2_1, J2_2, J3 };

inline std::string_view to_string(SlackClass c) {
  switch (c) {
    case SlackClass::J1: return "J1";
    case SlackClass::J2_1: return "J2_1";
    case SlackClass::J2_2: return "J2_2";
    case SlackClass::J3: return "J3";
  }
  return "?";
}

/// Condition C: s_B >= s_A + Delta and s_A / c > Delta.
inline bool bd_condition(const MachineParams& params, const Time& delta) {
  return params.setup_b >= params.setup_a + delta && params.setup_a / params.cost_b > delta;
}

/// Slack class of a job whose deadline was already reduced by s_B.
/// Returns nullopt when the job has slack below 2*Delta on both types.
inline std::optional<SlackClass> bd_classify(const Job& reduced, const MachineParams& params,
                                             const Time& delta, bool condition) {
  Time two_delta = delta * 2;
  Time slack_a = slack(reduced, MachineType::A);
  Time slack_b = slack(reduced, MachineType::B);
  if (slack_b >= two_delta) {
    if (slack_a >= two_delta || reduced.size_a <= delta) return SlackClass::J1;
    if (condition) return SlackClass::J2_1;
    return params.cost_b * reduced.size_b > params.setup_a ? SlackClass::J2_1 : SlackClass::J2_2;
  }
  if (slack_a >= two_delta) return SlackClass::J3;
  return std::nullopt;
}

class BatchedDispatch final : public OnlineAlgorithm {
 public:
  enum class Solver : std::uint8_t { Auto, Exact, FirstFit };

  /// Batches with at most this many jobs per class are solved exactly in Auto mode.
  static constexpr std::size_t kDefaultExactLimit = 8;
  static constexpr std::uint64_t kDefaultNodeLimit = 2'000'000;

  explicit BatchedDispatch(Rational epsilon, Solver solver = Solver::Auto)
      : epsilon_(epsilon), solver_(solver) {}

  std::string name() const override {
    std::string n = "bd:" + cloudsched::to_string(epsilon_);
    if (solver_ == Solver::Exact) n += ":exact";
    if (solver_ == Solver::FirstFit) n += ":firstfit";
    return n;
  }

  const Rational& epsilon() const { return epsilon_; }
  const Time& delta() const { return delta_; }
  bool condition() const { return condition_; }

  void start(SimulationContext& ctx) override {
    const MachineParams& params = ctx.params();
    if (epsilon_ * params.setup_b < 1 || epsilon_ > 1) {
      throw ParameterError("bd epsilon " + cloudsched::to_string(epsilon_) +
                           " outside [1/s_B, 1] for s_B = " + cloudsched::to_string(params.setup_b));
    }
    if (!params.setup_b_multiple_of_a()) {
      throw ParameterError("setup_B must be an integer multiple of setup_A for tentative schedules");
    }
    delta_ = epsilon_ * params.setup_b / 2;
    condition_ = bd_condition(params, delta_);
    phases_.clear();
  }

  void on_event(const OnlineEvent& event, SimulationContext& ctx) override {
    if (event.kind == OnlineEvent::Kind::JobsReleased) {
      for (const Job& job : event.jobs) admit(job, ctx);
    } else {
      dispatch(event.tag, ctx);
    }
  }

 private:
  struct Buffered {
    Job job;  // original deadline
    SlackClass cls = SlackClass::J1;
    std::optional<RentalId> precaution;
  };

  void admit(const Job& job, SimulationContext& ctx) {
    const MachineParams& params = ctx.params();
    Job reduced = job;
    reduced.deadline -= params.setup_b;
    auto cls = bd_classify(reduced, params, delta_, condition_);
    if (!cls) {
      ctx.declare_infeasible(job.id, "unclassifiable: slack below 2*Delta on both types");
      return;
    }
    Buffered entry{job, *cls, std::nullopt};
    if (!condition_ && *cls == SlackClass::J2_1) entry.precaution = ctx.open_machine(MachineType::A, ctx.now());
    std::int64_t phase = floor_div(job.release, delta_) + 1;
    auto [it, fresh] = phases_.try_emplace(phase);
    if (fresh) ctx.request_wakeup(delta_ * Rational(phase), phase);
    it->second.push_back(std::move(entry));
  }

  Time shift(SlackClass cls, MachineType type, const MachineParams& params) const {
    if (cls == SlackClass::J2_1 && type == MachineType::A) {
      return condition_ ? params.setup_a + delta_ : params.setup_a;
    }
    return params.setup(type);
  }

  tentative::Restriction restriction(SlackClass cls, Time boundary, const MachineParams& params) const {
    using tentative::Restriction;
    switch (cls) {
      case SlackClass::J1: {
        Restriction r;
        r.earliest_a = boundary;
        r.earliest_b = boundary;
        return r;
      }
      case SlackClass::J2_1: {
        Restriction r;
        r.earliest_b = boundary;
        // Without C the A-side start is realized s_A later on the precautionary
        // machine; it must not land before the decision time.
        if (!condition_) r.earliest_a = boundary - params.setup_a;
        return r;
      }
      case SlackClass::J2_2: {
        Restriction r = Restriction::only(MachineType::B);
        r.earliest_b = boundary;
        return r;
      }
      case SlackClass::J3: {
        Restriction r = Restriction::only(MachineType::A);
        r.earliest_a = boundary;
        return r;
      }
    }
    return {};
  }

  tentative::TentativeSolution solve(const tentative::TentativeProblem& problem) const {
    bool exact = solver_ == Solver::Exact ||
                 (solver_ == Solver::Auto && problem.jobs.size() <= kDefaultExactLimit);
    return exact ? tentative::solve_exact(problem, kDefaultNodeLimit) : tentative::solve_firstfit(problem);
  }

  void dispatch(std::int64_t phase, SimulationContext& ctx) {
    auto node = phases_.extract(phase);
    if (node.empty()) return;
    std::vector<Buffered>& buffered = node.mapped();
    const MachineParams& params = ctx.params();
    const Time boundary = ctx.now();
    std::set<RentalId> used_precautions;

    for (SlackClass cls : {SlackClass::J1, SlackClass::J2_1, SlackClass::J2_2, SlackClass::J3}) {
      std::vector<Job> jobs;
      std::vector<tentative::Restriction> limits;
      std::map<std::string, const Buffered*> by_id;
      for (const Buffered& b : buffered) {
        if (b.cls != cls) continue;
        jobs.push_back(b.job);
        limits.push_back(restriction(cls, boundary, params));
        by_id.emplace(b.job.id, &b);
      }
      if (jobs.empty()) continue;

      tentative::TentativeProblem problem =
          tentative::generate_candidate_intervals(std::move(jobs), params, std::move(limits));
      tentative::TentativeSolution solution;
      try {
        solution = solve(problem);
      } catch (const InfeasibleError& e) {
        for (const Job& j : problem.jobs) ctx.declare_infeasible(j.id, std::string("infeasible phase: ") + e.what());
        continue;
      }
      std::vector<int> slots = tentative::pack_machines(problem, solution);

      // One rental per tentative machine; jobs arrive in canonical order, so
      // the first member of a pooled machine has the earliest release.
      std::map<std::tuple<tentative::Pool, int>, RentalId> pooled;
      std::map<RentalId, Time> last_end;
      for (std::size_t j = 0; j < problem.jobs.size(); ++j) {
        const Job& job = problem.jobs[j];
        const tentative::CandidateInterval& c = solution.chosen(problem, j);
        bool on_precaution = cls == SlackClass::J2_1 && c.type == MachineType::A && !condition_;
        RentalId rental;
        auto fresh = [&] {
          return on_precaution ? *by_id.at(job.id)->precaution : ctx.open_machine(c.type, boundary);
        };
        if (c.exclusive) {
          rental = fresh();
        } else {
          auto key = std::make_tuple(c.pool, slots[j]);
          auto it = pooled.find(key);
          rental = it != pooled.end() ? it->second : pooled.emplace(key, fresh()).first->second;
        }
        if (on_precaution) used_precautions.insert(rental);
        Time start = c.start + shift(cls, c.type, params);
        ctx.assign(job.id, rental, start);
        Time end = start + job.size(c.type);
        auto [slot, inserted] = last_end.try_emplace(rental, end);
        if (!inserted) slot->second = std::max(slot->second, end);
      }
      for (const auto& [rental, end] : last_end) ctx.close_machine(rental, end);
    }

    for (const Buffered& b : buffered) {
      if (!b.precaution || used_precautions.count(*b.precaution) != 0) continue;
      ctx.close_machine(*b.precaution, std::max(b.job.release + params.setup_a, boundary));
    }
  }

  Rational epsilon_;
  Solver solver_;
  Time delta_{0};
  bool condition_ = false;
  std::map<std::int64_t, std::vector<Buffered>> phases_;
};

// ---------------------------------------------------------------------------

/// Algorithm by name: "a1", "greedyfit", "greedyfit:<policy>",
/// "bd:<epsilon>" (optionally suffixed ":exact" or ":firstfit").
inline std::unique_ptr<OnlineAlgorithm> make_algorithm(std::string_view spec) {
  if (spec == "a1") return std::make_unique<A1>();
  if (spec == "greedyfit") return std::make_unique<GreedyFit>();
  if (spec.rfind("greedyfit:", 0) == 0) {
    return std::make_unique<GreedyFit>(GreedyFitPolicy::parse(spec.substr(10)));
  }
  if (spec.rfind("bd:", 0) == 0) {
    std::string_view rest = spec.substr(3);
    auto solver = BatchedDispatch::Solver::Auto;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      std::string_view mode = rest.substr(colon + 1);
      if (mode == "exact") solver = BatchedDispatch::Solver::Exact;
      else if (mode == "firstfit") solver = BatchedDispatch::Solver::FirstFit;
      else throw InputError("unknown bd solver '" + std::string(mode) + "'");
      rest = rest.substr(0, colon);
    }
    Rational eps = parse_rational(rest);
    if (eps <= 0 || eps > 1) throw ParameterError("bd epsilon must lie in (0, 1]");
    return std::make_unique<BatchedDispatch>(eps, solver);
  }
  throw InputError("unknown algorithm '" + std::string(spec) + "'");
}

}  // namespace cloudsched
