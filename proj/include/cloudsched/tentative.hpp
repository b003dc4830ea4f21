#pragma once

// Tentative schedules: the batch subproblem in which setups cost money but
// take no time, and every job must finish at least s_B before its deadline.
//
// Jobs are split by size into four classes. A job whose size on a type is at
// least that type's setup runs on an exclusive machine there (one candidate,
// charged its processing cost). Otherwise it shares pooled machines of that
// type: a pool is keyed by the tau-interval of the job's release, each pooled
// machine is charged five setups (5 c_tau s_tau), and processing must stay
// within `kVirtualMachineSpan` tau-intervals from the start of the release
// interval. Candidate start points per pool come from an earliest-finish
// greedy on a virtual machine, which keeps the candidate count quadratic.

#include "cloudsched/core.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace cloudsched::tentative {

/// Width, in tau-intervals, of the processing window of a pooled machine,
/// measured from the start of the release interval [k s_tau, (k+1) s_tau).
/// Pooled machines are open for five intervals starting one interval before
/// the release interval, so processing fits in [k s_tau, (k+4) s_tau].
inline constexpr std::int64_t kVirtualMachineSpan = 4;

/// Charge of one pooled machine, in setup units: 5 c_tau s_tau.
inline constexpr std::int64_t kPooledMachineSetups = 5;

enum class SizeClass : std::uint8_t {
  BigBoth,    // p_A >= s_A and p_B >= s_B
  SmallBoth,  // p_A <  s_A and p_B <  s_B
  MixedA,     // p_A >= s_A and p_B <  s_B
  MixedB,     // p_A <  s_A and p_B >= s_B
};

inline std::string_view to_string(SizeClass c) {
  switch (c) {
    case SizeClass::BigBoth: return "BIG_BOTH";
    case SizeClass::SmallBoth: return "SMALL_BOTH";
    case SizeClass::MixedA: return "MIXED_A";
    case SizeClass::MixedB: return "MIXED_B";
  }
  return "?";
}

inline SizeClass size_classify(const Job& job, const MachineParams& params) {
  bool big_a = job.size_a >= params.setup_a;
  bool big_b = job.size_b >= params.setup_b;
  if (big_a && big_b) return SizeClass::BigBoth;
  if (!big_a && !big_b) return SizeClass::SmallBoth;
  return big_a ? SizeClass::MixedA : SizeClass::MixedB;
}

/// Whether a job of this class is processed on an exclusive machine of `type`.
inline bool runs_exclusive(SizeClass c, MachineType type) {
  switch (c) {
    case SizeClass::BigBoth: return true;
    case SizeClass::SmallBoth: return false;
    case SizeClass::MixedA: return type == MachineType::A;
    case SizeClass::MixedB: return type == MachineType::B;
  }
  return false;
}

/// Caller-imposed limits for one job.
struct Restriction {
  std::optional<Time> earliest_a;
  std::optional<Time> earliest_b;
  bool allow_a = true;
  bool allow_b = true;

  bool allows(MachineType type) const { return type == MachineType::A ? allow_a : allow_b; }
  const std::optional<Time>& earliest(MachineType type) const {
    return type == MachineType::A ? earliest_a : earliest_b;
  }

  static Restriction only(MachineType type) {
    Restriction r;
    r.allow_a = type == MachineType::A;
    r.allow_b = type == MachineType::B;
    return r;
  }
};

/// Pool of interchangeable pooled machines: the machine type plus the index
/// k of the tau-interval [k s_tau, (k+1) s_tau) in which its jobs are released.
struct Pool {
  MachineType type = MachineType::A;
  std::int64_t interval = 0;
  friend auto operator<=>(const Pool&, const Pool&) = default;
};

struct CandidateInterval {
  std::size_t job = 0;  // index into TentativeProblem::jobs
  MachineType type = MachineType::A;
  Time start{0};
  Time end{0};
  bool exclusive = false;
  Pool pool;       // meaningful when !exclusive
  Cost fixed{0};   // objective contribution independent of pooling
};

struct TentativeProblem {
  MachineParams params;
  std::vector<Job> jobs;
  std::vector<Restriction> restrictions;
  std::vector<std::vector<CandidateInterval>> candidates;  // per job
  std::map<Pool, std::vector<Time>> left_endpoints;        // L_B / L_i per pool

  std::size_t candidate_count() const {
    std::size_t n = 0;
    for (const auto& c : candidates) n += c.size();
    return n;
  }

  Cost machine_cost(const Pool& pool) const {
    return Rational(kPooledMachineSetups) * params.cost(pool.type) * params.setup(pool.type);
  }
};

struct TentativeSolution {
  std::vector<std::size_t> choice;   // candidate index per job
  std::map<Pool, int> machines;      // forced machine count per pool
  Cost objective{0};
  std::uint64_t nodes = 0;           // search nodes (exact solver)
  bool proven_optimal = false;       // exact search ran to completion

  const CandidateInterval& chosen(const TentativeProblem& p, std::size_t job) const {
    return p.candidates[job][choice[job]];
  }
};

namespace detail {

struct Window {
  Time lo;
  Time hi;  // latest completion
};

inline std::optional<Window> job_window(const Job& job, const Restriction& restriction,
                                        MachineType type, const MachineParams& params) {
  if (!restriction.allows(type)) return std::nullopt;
  Time lo = job.release;
  if (const auto& e = restriction.earliest(type)) lo = std::max(lo, *e);
  Time hi = job.deadline - params.setup_b;
  if (lo + job.size(type) > hi) return std::nullopt;
  return Window{lo, hi};
}

inline Pool pool_of(const Job& job, MachineType type, const MachineParams& params) {
  return Pool{type, floor_div(job.release, params.setup(type))};
}

inline Window pool_window(const Pool& pool, const MachineParams& params) {
  Time s = params.setup(pool.type);
  return Window{Rational(pool.interval) * s, Rational(pool.interval + kVirtualMachineSpan) * s};
}

/// Maximum number of intervals of `placed` (half-open [start, end)) that
/// contain any single point. Maxima occur at left endpoints.
inline int max_overlap(const std::vector<std::pair<Time, Time>>& placed) {
  int best = 0;
  for (const auto& [t, unused] : placed) {
    int n = 0;
    for (const auto& [s, e] : placed) {
      if (s <= t && t < e) ++n;
    }
    best = std::max(best, n);
  }
  return best;
}

}  // namespace detail

/// Builds the candidate intervals for a batch. Restrictions are per job
/// (parallel to `batch`); missing entries mean "unrestricted".
inline TentativeProblem generate_candidate_intervals(std::vector<Job> batch,
                                                     const MachineParams& params,
                                                     std::vector<Restriction> restrictions = {}) {
  params.check();
  if (!params.setup_b_multiple_of_a()) {
    throw ParameterError("setup_B must be an integer multiple of setup_A for tentative schedules");
  }
  restrictions.resize(batch.size());
  // keep restrictions attached to their jobs while sorting into canonical order
  std::vector<std::size_t> order(batch.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t l, std::size_t r) { return canonical_less(batch[l], batch[r]); });

  TentativeProblem problem;
  problem.params = params;
  for (std::size_t i : order) {
    problem.jobs.push_back(batch[i]);
    problem.restrictions.push_back(restrictions[i]);
  }
  const std::size_t n = problem.jobs.size();
  problem.candidates.resize(n);

  struct PoolMember {
    std::size_t job;
    detail::Window window;
  };
  std::map<Pool, std::vector<PoolMember>> pools;

  for (std::size_t j = 0; j < n; ++j) {
    const Job& job = problem.jobs[j];
    SizeClass size_class = size_classify(job, params);
    for (MachineType type : kMachineTypes) {
      auto window = detail::job_window(job, problem.restrictions[j], type, params);
      if (!window) continue;
      Time p = job.size(type);
      if (runs_exclusive(size_class, type)) {
        problem.candidates[j].push_back(CandidateInterval{j, type, window->lo, window->lo + p, true,
                                                          Pool{}, params.cost(type) * p});
        continue;
      }
      Pool pool = detail::pool_of(job, type, params);
      detail::Window pw = detail::pool_window(pool, params);
      detail::Window w{std::max(window->lo, pw.lo), std::min(window->hi, pw.hi)};
      if (w.lo + p <= w.hi) {
        pools[pool].push_back(PoolMember{j, w});
      } else {
        // Restriction pushed the job out of its pool's reach: a dedicated
        // machine, charged setup plus processing.
        problem.candidates[j].push_back(CandidateInterval{
            j, type, window->lo, window->lo + p, true, Pool{},
            params.cost(type) * (params.setup(type) + p)});
      }
    }
  }

  for (auto& [pool, members] : pools) {
    const MachineType type = pool.type;
    auto size = [&](std::size_t j) { return problem.jobs[j].size(type); };

    // Earliest-finish greedy on one virtual machine of the pool.
    Time cursor = detail::pool_window(pool, params).lo;
    std::vector<bool> scheduled(members.size(), false);
    std::set<Time> points;
    for (;;) {
      std::optional<std::size_t> pick;
      Time pick_finish{0};
      for (std::size_t m = 0; m < members.size(); ++m) {
        if (scheduled[m]) continue;
        Time finish = std::max(cursor, members[m].window.lo) + size(members[m].job);
        if (finish > members[m].window.hi) continue;
        if (!pick || finish < pick_finish) {
          pick = m;
          pick_finish = finish;
        }
      }
      if (!pick) break;
      scheduled[*pick] = true;
      cursor = pick_finish;
      points.insert(pick_finish);
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (scheduled[m]) continue;
      points.insert(members[m].window.lo);
      points.insert(members[m].window.hi);
    }

    std::vector<Time>& lefts = problem.left_endpoints[pool];
    for (const PoolMember& member : members) {
      Time p = size(member.job);
      std::set<Time> starts{member.window.lo};
      for (auto it = points.upper_bound(member.window.lo); it != points.end(); ++it) {
        if (*it + p > member.window.hi) break;
        starts.insert(*it);
      }
      for (const Time& s : starts) {
        problem.candidates[member.job].push_back(
            CandidateInterval{member.job, type, s, s + p, false, pool, Cost{0}});
        lefts.push_back(s);
      }
    }
    std::sort(lefts.begin(), lefts.end());
    lefts.erase(std::unique(lefts.begin(), lefts.end()), lefts.end());
  }

  for (auto& cands : problem.candidates) {
    std::stable_sort(cands.begin(), cands.end(),
                     [](const CandidateInterval& l, const CandidateInterval& r) {
                       return std::tie(l.fixed, l.start) < std::tie(r.fixed, r.start);
                     });
  }
  return problem;
}

/// Objective of a complete choice vector with forced (minimal) machine counts.
inline TentativeSolution evaluate(const TentativeProblem& problem,
                                  const std::vector<std::size_t>& choice) {
  TentativeSolution sol;
  sol.choice = choice;
  std::map<Pool, std::vector<std::pair<Time, Time>>> placed;
  for (std::size_t j = 0; j < choice.size(); ++j) {
    const CandidateInterval& c = problem.candidates[j][choice[j]];
    sol.objective += c.fixed;
    if (!c.exclusive) placed[c.pool].emplace_back(c.start, c.end);
  }
  for (const auto& [pool, intervals] : placed) {
    int z = detail::max_overlap(intervals);
    sol.machines[pool] = z;
    sol.objective += problem.machine_cost(pool) * Rational(z);
  }
  return sol;
}

/// True when the machine counts cover every pool's overlap at all of its
/// left endpoints and each job has exactly one candidate chosen.
inline bool satisfies_constraints(const TentativeProblem& problem, const TentativeSolution& sol) {
  if (sol.choice.size() != problem.jobs.size()) return false;
  std::map<Pool, std::vector<const CandidateInterval*>> chosen;
  for (std::size_t j = 0; j < sol.choice.size(); ++j) {
    if (sol.choice[j] >= problem.candidates[j].size()) return false;
    const CandidateInterval& c = problem.candidates[j][sol.choice[j]];
    if (!c.exclusive) chosen[c.pool].push_back(&c);
  }
  for (const auto& [pool, lefts] : problem.left_endpoints) {
    auto it = sol.machines.find(pool);
    int z = it == sol.machines.end() ? 0 : it->second;
    for (const Time& t : lefts) {
      int n = 0;
      for (const CandidateInterval* c : chosen[pool]) {
        if (c->start <= t && t < c->end) ++n;
      }
      if (n > z) return false;
    }
  }
  return true;
}

inline void require_candidates(const TentativeProblem& problem) {
  for (std::size_t j = 0; j < problem.jobs.size(); ++j) {
    if (problem.candidates[j].empty()) {
      throw InfeasibleError("infeasible tentative problem: job '" + problem.jobs[j].id +
                            "' has no candidate interval");
    }
  }
}

/// Greedy fallback: jobs in deadline order, each into the candidate with the
/// smallest objective increase (ties: earlier start, then candidate order).
inline TentativeSolution solve_firstfit(const TentativeProblem& problem) {
  require_candidates(problem);
  const std::size_t n = problem.jobs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return problem.jobs[l].deadline < problem.jobs[r].deadline;
  });

  std::map<Pool, std::vector<std::pair<Time, Time>>> placed;
  std::map<Pool, int> z;
  std::vector<std::size_t> choice(n, 0);
  for (std::size_t j : order) {
    std::optional<std::size_t> best;
    Cost best_delta{0};
    for (std::size_t k = 0; k < problem.candidates[j].size(); ++k) {
      const CandidateInterval& c = problem.candidates[j][k];
      Cost delta = c.fixed;
      if (!c.exclusive) {
        auto trial = placed[c.pool];
        trial.emplace_back(c.start, c.end);
        int grown = detail::max_overlap(trial) - z[c.pool];
        delta += problem.machine_cost(c.pool) * Rational(grown);
      }
      if (!best || delta < best_delta) {
        best = k;
        best_delta = delta;
      }
    }
    choice[j] = *best;
    const CandidateInterval& c = problem.candidates[j][*best];
    if (!c.exclusive) {
      placed[c.pool].emplace_back(c.start, c.end);
      z[c.pool] = detail::max_overlap(placed[c.pool]);
    }
  }
  return evaluate(problem, choice);
}

/// Exact optimum over the generated candidates by depth-first branch and
/// bound. Machine counts are forced to the overlap maxima, so only the
/// interval choice is searched. Jobs are branched fewest-candidates first.
/// A nonzero `node_limit` stops the search early and returns the best
/// solution found so far (with `proven_optimal` false).
inline TentativeSolution solve_exact(const TentativeProblem& problem, std::uint64_t node_limit = 0) {
  require_candidates(problem);
  const std::size_t n = problem.jobs.size();
  if (n == 0) {
    TentativeSolution empty;
    empty.proven_optimal = true;
    return empty;
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return problem.candidates[l].size() < problem.candidates[r].size();
  });

  // suffix_floor[d] = sum of cheapest fixed costs of jobs order[d..]
  std::vector<Cost> suffix_floor(n + 1, Cost{0});
  for (std::size_t d = n; d-- > 0;) {
    Cost cheapest = problem.candidates[order[d]].front().fixed;
    for (const auto& c : problem.candidates[order[d]]) cheapest = std::min(cheapest, c.fixed);
    suffix_floor[d] = suffix_floor[d + 1] + cheapest;
  }

  TentativeSolution best = solve_firstfit(problem);
  std::vector<std::size_t> choice(n, 0);
  std::map<Pool, std::vector<std::pair<Time, Time>>> placed;
  std::map<Pool, int> z;
  std::uint64_t nodes = 0;
  bool aborted = false;

  auto search = [&](auto&& self, std::size_t depth, Cost cost) -> void {
    if (aborted) return;
    if (node_limit != 0 && nodes >= node_limit) {
      aborted = true;
      return;
    }
    ++nodes;
    if (cost + suffix_floor[depth] >= best.objective) return;
    if (depth == n) {
      best = evaluate(problem, choice);
      return;
    }
    std::size_t j = order[depth];
    for (std::size_t k = 0; k < problem.candidates[j].size(); ++k) {
      const CandidateInterval& c = problem.candidates[j][k];
      choice[j] = k;
      if (c.exclusive) {
        self(self, depth + 1, cost + c.fixed);
        continue;
      }
      auto& list = placed[c.pool];
      int before = z[c.pool];
      list.emplace_back(c.start, c.end);
      int after = std::max(before, detail::max_overlap(list));
      z[c.pool] = after;
      self(self, depth + 1, cost + c.fixed + problem.machine_cost(c.pool) * Rational(after - before));
      z[c.pool] = before;
      list.pop_back();
    }
  };
  search(search, 0, Cost{0});
  best.nodes = nodes;
  best.proven_optimal = !aborted;
  return best;
}

/// Machine slot of every job within its pool (exclusive jobs get -1).
/// Intervals are placed by ascending start on the lowest-numbered machine
/// that is free, so each pool uses exactly its overlap maximum.
inline std::vector<int> pack_machines(const TentativeProblem& problem,
                                      const TentativeSolution& solution) {
  const std::size_t n = problem.jobs.size();
  std::vector<int> slot(n, -1);
  std::map<Pool, std::vector<std::size_t>> members;
  for (std::size_t j = 0; j < n; ++j) {
    const CandidateInterval& c = solution.chosen(problem, j);
    if (!c.exclusive) members[c.pool].push_back(j);
  }
  for (auto& [pool, jobs] : members) {
    std::stable_sort(jobs.begin(), jobs.end(), [&](std::size_t l, std::size_t r) {
      return solution.chosen(problem, l).start < solution.chosen(problem, r).start;
    });
    std::vector<Time> free_at;
    for (std::size_t j : jobs) {
      const CandidateInterval& c = solution.chosen(problem, j);
      int m = 0;
      while (m < static_cast<int>(free_at.size()) && free_at[static_cast<std::size_t>(m)] > c.start) ++m;
      if (m == static_cast<int>(free_at.size())) free_at.push_back(c.end);
      else free_at[static_cast<std::size_t>(m)] = c.end;
      slot[j] = m;
    }
  }
  return slot;
}

}  // namespace cloudsched::tentative
