#pragma once

// Offline reference costs and instance generators.
//
// brute_force_opt is the exact optimum for tiny instances. Every machine in
// an optimal schedule can be normalized to: open exactly s_tau before its
// first job, close at its last completion, jobs in some order packed as late
// as possible at the front and as early as possible behind. So the search
// runs over set partitions, a type per block and an order per block.
//
// The generators rebuild the adversarial families used in the lower-bound
// arguments, with the adversary's waiting time as an explicit parameter.

#include "cloudsched/core.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cloudsched {

struct OptResult {
  Cost cost{0};
  Schedule schedule;
  std::uint64_t partitions = 0;  // set partitions examined
};

/// One machine holding a fixed sequence of jobs.
struct MachinePlan {
  MachineType type = MachineType::A;
  Time open_at{0};
  Time close_at{0};
  std::vector<std::size_t> jobs;  // indices, processing order
  std::vector<Time> starts;
  Cost cost{0};
};

/// Cheapest placement of `order` (indices into `jobs`) on one machine of
/// `type`, or nullopt when some deadline cannot be met in this order.
inline std::optional<MachinePlan> plan_machine(const std::vector<Job>& jobs,
                                               const std::vector<std::size_t>& order, MachineType type,
                                               const MachineParams& params) {
  const Time s = params.setup(type);
  const std::size_t k = order.size();
  if (k == 0) return std::nullopt;
  auto earliest = [&](std::size_t i) { return std::max(jobs[order[i]].release, s); };
  auto size = [&](std::size_t i) { return jobs[order[i]].size(type); };

  // forward pass from the earliest possible first start decides feasibility
  Time x = earliest(0);
  for (std::size_t i = 0; i < k; ++i) {
    x = std::max(x, earliest(i));
    if (x + size(i) > jobs[order[i]].deadline) return std::nullopt;
    x += size(i);
  }
  // latest start of the first job that keeps every later job on time
  Time latest = jobs[order[k - 1]].deadline - size(k - 1);
  for (std::size_t i = k - 1; i-- > 0;) {
    latest = std::min(jobs[order[i]].deadline - size(i), latest - size(i));
  }

  MachinePlan plan;
  plan.type = type;
  plan.jobs = order;
  x = latest;
  for (std::size_t i = 0; i < k; ++i) {
    x = std::max(x, earliest(i));
    plan.starts.push_back(x);
    x += size(i);
  }
  plan.open_at = latest - s;
  plan.close_at = x;
  plan.cost = params.cost(type) * (plan.close_at - plan.open_at);
  return plan;
}

namespace detail {

inline Schedule schedule_from_plans(const std::vector<Job>& jobs, const std::vector<MachinePlan>& plans) {
  Schedule schedule;
  for (std::size_t m = 0; m < plans.size(); ++m) {
    RentalId id{static_cast<std::uint32_t>(m)};
    schedule.rentals.push_back(Rental{id, plans[m].type, plans[m].open_at, plans[m].close_at});
    for (std::size_t i = 0; i < plans[m].jobs.size(); ++i) {
      schedule.assignments.push_back(Assignment{jobs[plans[m].jobs[i]].id, id, plans[m].starts[i]});
    }
  }
  return schedule;
}

}  // namespace detail

inline constexpr std::size_t kOracleDefaultLimit = 8;

inline OptResult brute_force_opt(const Instance& instance, std::size_t limit = kOracleDefaultLimit) {
  const std::vector<Job>& jobs = instance.jobs();
  const MachineParams& params = instance.params();
  const std::size_t n = jobs.size();
  if (n > limit) {
    throw InputError("instance too large for oracle: " + std::to_string(n) + " jobs, limit " +
                     std::to_string(limit));
  }
  OptResult result;
  if (n == 0) return result;

  // cheapest machine plan for every nonempty subset
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<std::optional<MachinePlan>> block(subsets);
  for (std::size_t mask = 1; mask < subsets; ++mask) {
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) order.push_back(j);
    }
    do {
      for (MachineType type : kMachineTypes) {
        auto plan = plan_machine(jobs, order, type, params);
        if (plan && (!block[mask] || plan->cost < block[mask]->cost)) block[mask] = std::move(plan);
      }
    } while (std::next_permutation(order.begin(), order.end()));
  }

  std::optional<Cost> best;
  std::vector<std::size_t> best_blocks;
  std::vector<std::size_t> current;

  // each partition is generated once: the block holding the lowest
  // unassigned job is chosen among subsets of the remaining jobs
  auto recurse = [&](auto&& self, std::size_t remaining, Cost cost) -> void {
    if (remaining == 0) {
      ++result.partitions;
      if (!best || cost < *best) {
        best = cost;
        best_blocks = current;
      }
      return;
    }
    std::size_t low = remaining & (~remaining + 1);
    std::size_t rest = remaining ^ low;
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      std::size_t mask = sub | low;
      if (block[mask]) {
        current.push_back(mask);
        self(self, remaining ^ mask, cost + block[mask]->cost);
        current.pop_back();
      } else {
        ++result.partitions;  // examined but infeasible
      }
      if (sub == 0) break;
    }
  };
  recurse(recurse, subsets - 1, Cost{0});

  if (!best) throw InfeasibleError("infeasible instance");
  std::vector<MachinePlan> plans;
  for (std::size_t mask : best_blocks) plans.push_back(*block[mask]);
  result.cost = *best;
  result.schedule = detail::schedule_from_plans(jobs, plans);
  return result;
}

// ---------------------------------------------------------------------------
// Upper-bound witnesses for instances beyond the oracle limit.

struct Witness {
  Cost cost{0};
  Schedule schedule;
};

/// All jobs on a single machine of `type`, in canonical order.
inline std::optional<Witness> single_machine_witness(const Instance& instance, MachineType type) {
  if (instance.empty()) return Witness{};
  std::vector<std::size_t> order(instance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto plan = plan_machine(instance.jobs(), order, type, instance.params());
  if (!plan) return std::nullopt;
  return Witness{plan->cost, detail::schedule_from_plans(instance.jobs(), {*plan})};
}

/// Jobs with identical (release, deadline, sizes) are packed back to back
/// onto machines of one type; the number of machines per type is chosen by
/// a knapsack over the group size. Groups never share machines.
inline std::optional<Witness> group_packing_witness(const Instance& instance) {
  const std::vector<Job>& jobs = instance.jobs();
  const MachineParams& params = instance.params();
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    auto same = [&](const std::vector<std::size_t>& g) {
      const Job& o = jobs[g.front()];
      return o.release == jobs[j].release && o.deadline == jobs[j].deadline && o.size_a == jobs[j].size_a &&
             o.size_b == jobs[j].size_b;
    };
    auto it = std::find_if(groups.begin(), groups.end(), same);
    if (it == groups.end()) groups.push_back({j});
    else it->push_back(j);
  }

  std::vector<MachinePlan> plans;
  Cost total{0};
  for (const auto& group : groups) {
    const Job& proto = jobs[group.front()];
    const std::size_t count = group.size();
    struct Option {
      MachineType type;
      std::size_t jobs;
      Cost cost;
    };
    std::vector<Option> options;
    for (MachineType type : kMachineTypes) {
      Time first = std::max(proto.release, params.setup(type));
      Time room = proto.deadline - first;
      if (room < proto.size(type)) continue;
      auto capacity = static_cast<std::size_t>(floor_div(room, proto.size(type)));
      capacity = std::min(capacity, count);
      for (std::size_t k = 1; k <= capacity; ++k) {
        options.push_back(Option{type, k, params.cost(type) * (params.setup(type) + Rational(static_cast<std::int64_t>(k)) * proto.size(type))});
      }
    }
    if (options.empty()) return std::nullopt;
    std::vector<std::optional<Cost>> f(count + 1);
    std::vector<std::size_t> pick(count + 1, 0);
    f[0] = Cost{0};
    for (std::size_t c = 1; c <= count; ++c) {
      for (std::size_t o = 0; o < options.size(); ++o) {
        if (options[o].jobs > c || !f[c - options[o].jobs]) continue;
        Cost v = *f[c - options[o].jobs] + options[o].cost;
        if (!f[c] || v < *f[c]) {
          f[c] = v;
          pick[c] = o;
        }
      }
    }
    if (!f[count]) return std::nullopt;
    total += *f[count];
    std::size_t next = 0;
    for (std::size_t c = count; c > 0; c -= options[pick[c]].jobs) {
      const Option& opt = options[pick[c]];
      MachinePlan plan;
      plan.type = opt.type;
      Time x = std::max(proto.release, params.setup(opt.type));
      plan.open_at = x - params.setup(opt.type);
      for (std::size_t k = 0; k < opt.jobs; ++k) {
        plan.jobs.push_back(group[next++]);
        plan.starts.push_back(x);
        x += proto.size(opt.type);
      }
      plan.close_at = x;
      plan.cost = opt.cost;
      plans.push_back(std::move(plan));
    }
  }
  return Witness{total, detail::schedule_from_plans(jobs, plans)};
}

/// Cheapest of the available witnesses.
inline std::optional<Witness> best_witness(const Instance& instance) {
  std::optional<Witness> best;
  auto consider = [&](std::optional<Witness> w) {
    if (w && (!best || w->cost < best->cost)) best = std::move(w);
  };
  consider(group_packing_witness(instance));
  consider(single_machine_witness(instance, MachineType::A));
  consider(single_machine_witness(instance, MachineType::B));
  return best;
}

// ---------------------------------------------------------------------------
// Generators

inline const Rational kDefaultPerturbation{1, 8};
inline const Rational kDefaultFollowerOffset{1, 8};

namespace detail {

inline std::string job_name(std::size_t i, std::size_t total) {
  std::string digits = std::to_string(i);
  std::size_t width = std::to_string(total == 0 ? 0 : total - 1).size();
  return "j" + std::string(width - digits.size(), '0') + digits;
}

inline std::int64_t require_count(const Rational& x, const char* what) {
  if (x.denominator() != 1 || x.numerator() < 0) {
    throw ParameterError(std::string(what) + " must be a nonnegative integer, got " + to_string(x));
  }
  return x.numerator();
}

}  // namespace detail

/// Two-stage instance with minimum slack beta < s_B: a B-friendly job at 0
/// and a second job at time t that has only beta slack on B.
inline Instance gen_prop1(const MachineParams& params, const Time& beta, const Time& t) {
  params.check();
  if (beta < 0 || beta >= params.setup_b) throw ParameterError("prop1 needs 0 <= beta < s_B");
  if (t < 0) throw ParameterError("prop1 needs t >= 0");
  std::vector<Job> jobs;
  jobs.push_back(Job{"j0", Time{0}, params.setup_b + 1 + beta, params.setup_b - params.setup_a + 2 + beta, Time{1}});
  jobs.push_back(Job{"j1", t, t + 1 + beta, beta + 2, Time{1}});
  return Instance(params, std::move(jobs));
}

/// Burst size factor k := (1 + 2 eps) s / (2 eps s + delta).
inline Rational lb_mid_k(const Rational& eps, const Time& s, const Rational& delta) {
  return (1 + 2 * eps) * s / (2 * eps * s + delta);
}

/// Seed job at 0, then c*t*ceil(k) jobs at time t with p_B = eps*s,
/// p_A = 2 eps s + delta and common deadline t + p_B + beta, beta = (1+eps)s.
/// Both types have setup s.
inline Instance gen_lb_mid_eps(const Rational& eps, const Time& s, const Rational& c, const Time& t,
                               const Rational& delta = kDefaultPerturbation) {
  if (s <= 0 || eps * s < 1 || eps > 1) throw ParameterError("lb-mid needs 1/s <= eps <= 1");
  if (delta <= 0) throw ParameterError("delta must be positive");
  Rational k = lb_mid_k(eps, s, delta);
  Rational limit = (1 + 2 * eps) / (2 * eps);
  if (k <= limit - 1) throw ParameterError("delta too large: k drifts more than 1 from its limit");
  MachineParams params = MachineParams::make(s, s, c);
  Time beta = (1 + eps) * s;
  std::int64_t burst = detail::require_count(c * t, "c*t") * ceil_rational(k).numerator();
  std::size_t total = static_cast<std::size_t>(burst) + 1;
  std::vector<Job> jobs;
  jobs.push_back(Job{detail::job_name(0, total), Time{0}, s + 1 + beta, Time{1}, Time{1}});
  for (std::int64_t i = 0; i < burst; ++i) {
    jobs.push_back(Job{detail::job_name(static_cast<std::size_t>(i) + 1, total), t, t + eps * s + beta,
                       2 * eps * s + delta, eps * s});
  }
  return Instance(params, std::move(jobs));
}

inline Rational lb_small_a_k(const Rational& eps, const Time& s, const Rational& delta) {
  return (s + 1) / (1 + eps * s + delta);
}

/// Small-eps family against type A: burst of c*t*ceil(k) jobs with p_B = 1,
/// p_A = 1 + eps s + delta and deadline t + 1 + beta. Both setups equal s.
inline Instance gen_lb_small_eps_A(const Rational& eps, const Time& s, const Rational& c, const Time& t,
                                   const Rational& delta = kDefaultPerturbation) {
  if (s <= 0 || eps < 0 || eps * s >= 1) throw ParameterError("lb-small-a needs 0 <= eps < 1/s");
  if (delta <= 0) throw ParameterError("delta must be positive");
  MachineParams params = MachineParams::make(s, s, c);
  Time beta = (1 + eps) * s;
  Rational k = lb_small_a_k(eps, s, delta);
  std::int64_t burst = detail::require_count(c * t, "c*t") * ceil_rational(k).numerator();
  std::size_t total = static_cast<std::size_t>(burst) + 1;
  std::vector<Job> jobs;
  jobs.push_back(Job{detail::job_name(0, total), Time{0}, s + 1 + beta, Time{1}, Time{1}});
  for (std::int64_t i = 0; i < burst; ++i) {
    jobs.push_back(Job{detail::job_name(static_cast<std::size_t>(i) + 1, total), t, t + 1 + beta,
                       1 + eps * s + delta, Time{1}});
  }
  return Instance(params, std::move(jobs));
}

/// Small-eps family against type B: seed job, then t jobs at time t with
/// p_B = 1, p_A = s_B + 3 and deadline t + 1 + beta, beta = (1+eps) s_B.
inline Instance gen_lb_small_eps_B(const MachineParams& params, const Time& t, const Rational& eps = Rational{0}) {
  params.check();
  if (eps < 0 || eps * params.setup_b >= 1) throw ParameterError("lb-small-b needs 0 <= eps < 1/s_B");
  std::int64_t count = detail::require_count(t, "t");
  Time beta = (1 + eps) * params.setup_b;
  std::size_t total = static_cast<std::size_t>(count) + 1;
  std::vector<Job> jobs;
  jobs.push_back(Job{detail::job_name(0, total), Time{0}, params.setup_b + 1 + beta, Time{1}, Time{1}});
  for (std::int64_t i = 0; i < count; ++i) {
    jobs.push_back(Job{detail::job_name(static_cast<std::size_t>(i) + 1, total), t, t + 1 + beta,
                       params.setup_b + 3, Time{1}});
  }
  return Instance(params, std::move(jobs));
}

/// Convenience overload with s_A = 1, c = 1.
inline Instance gen_lb_small_eps_B(const Time& s, const Time& t) {
  return gen_lb_small_eps_B(MachineParams::make(Time{1}, s, Rational{1}), t);
}

/// Adversary against GreedyFit (s_A = 1, c = 1): j0 at 0 with deadline s_B^2,
/// p_A = s_B and p_B = x; then s_B - 1 followers at `offset` with p_A = s_B,
/// p_B = 1 and the same deadline.
inline Instance gen_greedyfit_adv(const Time& setup_b, const Time& x,
                                  const Time& offset = kDefaultFollowerOffset) {
  if (setup_b < 2 || setup_b.denominator() != 1) throw ParameterError("greedyfit adversary needs integer s_B >= 2");
  if (x < 1) throw ParameterError("greedyfit adversary needs x >= 1");
  if (offset <= 0) throw ParameterError("follower offset must be positive");
  MachineParams params = MachineParams::make(Time{1}, setup_b, Rational{1});
  Time deadline = setup_b * setup_b;
  std::size_t total = static_cast<std::size_t>(setup_b.numerator());
  std::vector<Job> jobs;
  jobs.push_back(Job{detail::job_name(0, total), Time{0}, deadline, setup_b, x});
  for (std::size_t i = 1; i < total; ++i) {
    jobs.push_back(Job{detail::job_name(i, total), offset, deadline, setup_b, Time{1}});
  }
  return Instance(params, std::move(jobs));
}

/// n jobs with p_B = 1 released one per time unit, each with exactly s_B of
/// slack on B and none on A, so exclusive B machines are forced on A1 while a
/// single B machine opened at 0 processes all of them.
inline Instance gen_stacked_b(const MachineParams& params, std::size_t n) {
  params.check();
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < n; ++k) {
    Time r(static_cast<std::int64_t>(k));
    Time d = r + params.setup_b + 1;
    jobs.push_back(Job{detail::job_name(k, n), r, d, d - r + params.setup_a + 1, Time{1}});
  }
  return Instance(params, std::move(jobs));
}

/// Seeded random instance. Sizes are integers in [1, 2 s_B], releases
/// integers in [0, 4 s_B]; each deadline is r + min size + beta + extra
/// with extra in [0, s_B], and one job gets extra = 0, so min_slack = beta.
inline Instance gen_random(std::uint64_t seed, std::size_t n, const MachineParams& params, const Time& beta) {
  params.check();
  if (beta < 0) throw ParameterError("beta must be >= 0");
  std::mt19937_64 rng(seed);
  std::int64_t top = std::max<std::int64_t>(1, floor_div(2 * params.setup_b, Rational{1}));
  std::int64_t horizon = floor_div(4 * params.setup_b, Rational{1});
  std::int64_t extra_top = floor_div(params.setup_b, Rational{1});
  auto draw = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    Job job;
    job.id = detail::job_name(i, n);
    job.release = Time(draw(0, horizon));
    job.size_a = Time(draw(1, top));
    job.size_b = Time(draw(1, top));
    job.deadline = job.release + std::min(job.size_a, job.size_b) + beta + Time(draw(0, extra_top));
    jobs.push_back(std::move(job));
  }
  if (n > 0) {
    Job& pinned = jobs[static_cast<std::size_t>(draw(0, static_cast<std::int64_t>(n) - 1))];
    pinned.deadline = pinned.release + std::min(pinned.size_a, pinned.size_b) + beta;
  }
  return Instance(params, std::move(jobs));
}

}  // namespace cloudsched
