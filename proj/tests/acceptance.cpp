// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "cloudsched/algorithms.hpp"
#include "cloudsched/bench.hpp"
#include "cloudsched/io.hpp"
#include "cloudsched/oracle.hpp"
#include "cloudsched/tentative.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace cloudsched;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_s;
  std::function<Outcome()> body;
};

Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

// ---------------------------------------------------------------- 1

struct Base {
  Instance instance;
  Schedule schedule;
};

/// Feasible schedule of n jobs back to back on one rental. Every job is
/// released by the time the rental is ready; deadlines leave random room.
Base mutation_base(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  MachineParams params = MachineParams::make(R(draw(1, 3)), R(draw(4, 8)), R(draw(1, 3)));
  MachineType type = seed % 2 ? MachineType::A : MachineType::B;
  std::size_t n = static_cast<std::size_t>(draw(2, 5));
  Time open = R(draw(0, 6));
  Time cursor = open + params.setup(type);
  std::vector<Job> jobs;
  Schedule schedule;
  RentalId id{3};
  for (std::size_t i = 0; i < n; ++i) {
    Time p = R(draw(2, 12), 2);
    Time start = cursor + R(draw(0, 2));
    Job job;
    job.id = "m" + std::to_string(i);
    job.release = std::max(R(0), open + params.setup(type) - R(draw(0, 3)));
    job.deadline = start + p + R(draw(0, 6));
    job.size_a = type == MachineType::A ? p : R(draw(1, 9));
    job.size_b = type == MachineType::B ? p : R(draw(1, 9));
    jobs.push_back(job);
    schedule.assignments.push_back(Assignment{job.id, id, start});
    cursor = start + p;
  }
  schedule.rentals.push_back(Rental{id, type, open, cursor});
  return Base{Instance(params, jobs), schedule};
}

Schedule mutate(const Base& base, ViolationKind kind, std::uint64_t seed) {
  Schedule s = base.schedule;
  const Instance& inst = base.instance;
  const MachineType type = s.rentals[0].type;
  std::size_t k = static_cast<std::size_t>(seed % s.assignments.size());
  auto size = [&](std::size_t i) { return inst.find(s.assignments[i].job_id)->size(type); };
  switch (kind) {
    case ViolationKind::Assignment:
      if (seed % 2) s.assignments.push_back(s.assignments[k]);
      else s.assignments.erase(s.assignments.begin() + static_cast<std::ptrdiff_t>(k));
      break;
    case ViolationKind::Window: {
      // move the whole machine later so the last job misses its deadline
      const Assignment& last = s.assignments.back();
      Time shift = inst.find(last.job_id)->deadline - (last.start + size(s.assignments.size() - 1)) + R(1, 2);
      s.rentals[0].open_at += shift;
      s.rentals[0].close_at += shift;
      for (Assignment& a : s.assignments) a.start += shift;
      break;
    }
    case ViolationKind::Setup:
      if (seed % 2) s.rentals[0].open_at = s.assignments[0].start - inst.params().setup(type) + R(1, 4);
      else s.rentals[0].close_at -= R(1, 4);
      break;
    case ViolationKind::Overlap: {
      std::size_t i = k + 1 < s.assignments.size() ? k : k - 1;
      s.assignments[i + 1].start = std::max(s.assignments[i].start + size(i) / R(2),
                                            inst.find(s.assignments[i + 1].job_id)->release);
      break;
    }
    case ViolationKind::DanglingRental:
      s.assignments[k].rental = RentalId{99};
      break;
  }
  return s;
}

Outcome criterion_validator() {
  const ViolationKind kinds[] = {ViolationKind::Assignment, ViolationKind::Window, ViolationKind::Setup,
                                 ViolationKind::Overlap, ViolationKind::DanglingRental};
  std::size_t good = 0, total = 0, base_ok = 0;
  std::string first_bad;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Base base = mutation_base(seed);
    base_ok += validate(base.schedule, base.instance).feasible() ? 1 : 0;
    for (ViolationKind kind : kinds) {
      ++total;
      auto found = validate(mutate(base, kind, seed), base.instance).kinds();
      if (found == std::set<ViolationKind>{kind}) {
        ++good;
      } else if (first_bad.empty()) {
        first_bad = " first miss: seed " + std::to_string(seed) + " class " + std::string(to_string(kind));
      }
    }
  }
  return Outcome{good == total && base_ok == 20,
                 std::to_string(base_ok) + "/20 bases feasible, " + std::to_string(good) + "/" +
                     std::to_string(total) + " mutations flagged exactly their class" + first_bad};
}

// ---------------------------------------------------------------- 2 and 8

struct OracleRun {
  std::size_t instances = 0;
  std::size_t compared = 0;
  std::size_t below_opt = 0;
  std::size_t bd_envelope_miss = 0;
  Rational worst_bd{0};
  std::string note;
};

const OracleRun& oracle_runs() {
  static const OracleRun result = [] {
    OracleRun out;
    const char* specs[] = {"a1", "greedyfit", "bd:1", "bd:1/2", "bd:1/4"};
    std::ofstream csv("acceptance_bd_ratios.csv");
    csv << "seed,n,setup_A,setup_B,cost_B,opt,bd_cost,ratio,bound,feasible\n";
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
      MachineParams params = MachineParams::make(seed % 2 ? R(1) : R(2), R(4),
                                                 R(1 + static_cast<std::int64_t>(seed % 3)));
      std::size_t n = 1 + seed % 6;
      Instance inst = gen_random(1000 + seed, n, params, params.setup_b * 2);
      Cost opt = brute_force_opt(inst).cost;
      ++out.instances;
      for (const char* spec : specs) {
        auto algo = make_algorithm(spec);
        RunReport report = run_online(*algo, inst, opt);
        if (report.feasible()) {
          ++out.compared;
          if (report.cost < opt) ++out.below_opt;
        }
        if (std::string(spec) == "bd:1") {
          Rational bound = R(50) * (params.cost_b + R(1));
          bool within = report.feasible() && report.ratio && *report.ratio <= bound;
          if (!within) ++out.bd_envelope_miss;
          if (report.ratio && *report.ratio > out.worst_bd) out.worst_bd = *report.ratio;
          csv << seed << ',' << n << ',' << to_decimal(params.setup_a) << ',' << to_decimal(params.setup_b) << ','
              << to_decimal(params.cost_b) << ',' << to_decimal(opt) << ',' << to_decimal(report.cost) << ','
              << (report.ratio ? to_decimal(*report.ratio) : "") << ',' << to_decimal(bound) << ','
              << (report.feasible() ? "true" : "false") << '\n';
        }
      }
    }
    return out;
  }();
  return result;
}

Outcome criterion_oracle_equivalence() {
  const OracleRun& r = oracle_runs();
  return Outcome{r.below_opt == 0 && r.compared > 0,
                 std::to_string(r.instances) + " instances, " + std::to_string(r.compared) +
                     " feasible schedules compared, " + std::to_string(r.below_opt) + " below the oracle"};
}

Outcome criterion_bd_envelope() {
  const OracleRun& r = oracle_runs();
  return Outcome{r.bd_envelope_miss == 0,
                 "worst bd:1 ratio " + to_decimal(r.worst_bd, 4) + " against bound 50(c+1), " +
                     std::to_string(r.bd_envelope_miss) + " misses; ratios in acceptance_bd_ratios.csv"};
}

// ---------------------------------------------------------------- 3

Cost exhaustive_tentative(const tentative::TentativeProblem& problem) {
  const std::size_t n = problem.jobs.size();
  std::vector<std::size_t> choice(n, 0);
  std::optional<Cost> best;
  auto objective = [&] {
    Cost total{0};
    std::map<tentative::Pool, std::vector<std::pair<Time, Time>>> by_pool;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& c = problem.candidates[j][choice[j]];
      total += c.fixed;
      if (!c.exclusive) by_pool[c.pool].emplace_back(c.start, c.end);
    }
    for (const auto& [pool, list] : by_pool) {
      int peak = 0;
      for (const auto& probe : list) {
        int k = 0;
        for (const auto& [s, e] : list) k += (s <= probe.first && probe.first < e) ? 1 : 0;
        peak = std::max(peak, k);
      }
      total += R(5) * problem.params.cost(pool.type) * problem.params.setup(pool.type) * R(peak);
    }
    return total;
  };
  for (;;) {
    Cost c = objective();
    if (!best || c < *best) best = c;
    std::size_t d = 0;
    while (d < n && ++choice[d] == problem.candidates[d].size()) choice[d++] = 0;
    if (d == n) break;
  }
  return best.value_or(Cost{0});
}

Outcome criterion_tentative_exact() {
  std::size_t equal = 0, within_count = 0;
  std::size_t max_candidates = 0;
  std::string first_bad;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Time sa = seed % 2 ? R(1) : R(2);
    Time sb = seed % 3 ? R(4) : R(8);
    MachineParams params = MachineParams::make(sa, sb, R(1 + static_cast<std::int64_t>(seed % 3)));
    std::size_t n = 1 + seed % 6;
    Instance inst = gen_random(5000 + seed, n, params, sb * R(3, 2));
    auto problem = tentative::generate_candidate_intervals(inst.jobs(), params);
    Cost exact = tentative::solve_exact(problem).objective;
    Cost enumerated = exhaustive_tentative(problem);
    if (exact == enumerated) ++equal;
    else if (first_bad.empty()) first_bad = " first mismatch: seed " + std::to_string(seed);
    max_candidates = std::max(max_candidates, problem.candidate_count());
    if (problem.candidate_count() <= 8 * n * n) ++within_count;
  }
  return Outcome{equal == 200 && within_count == 200,
                 std::to_string(equal) + "/200 objectives equal enumeration, " + std::to_string(within_count) +
                     "/200 within 8n^2 candidates (max " + std::to_string(max_candidates) + ")" + first_bad};
}

// ---------------------------------------------------------------- 4

Outcome criterion_bd_feasible() {
  std::size_t runs = 0, ok = 0, placed = 0;
  std::string first_bad;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Time sb = seed % 2 ? R(8) : R(4);
    Time sa = std::vector<Time>{R(1), R(2), R(4)}[seed % 3];
    MachineParams params = MachineParams::make(sa, sb, R(1 + static_cast<std::int64_t>(seed % 4)));
    std::size_t n = 1 + seed % 10;
    for (Rational eps : {R(1), R(1, 2), R(1, 4), R(1) / sb}) {
      Instance inst = gen_random(20000 + seed, n, params, (R(1) + eps) * sb);
      BatchedDispatch bd(eps);
      RunReport report = run_online(bd, inst);
      ++runs;
      placed += report.schedule.assignments.size();
      bool on_time = true;
      for (const Assignment& a : report.schedule.assignments) {
        const Job* j = inst.find(a.job_id);
        const Rental* r = report.schedule.find_rental(a.rental);
        if (j == nullptr || r == nullptr || a.start + j->size(r->type) > j->deadline) on_time = false;
      }
      if (report.feasible() && report.declined.empty() && on_time) {
        ++ok;
      } else if (first_bad.empty()) {
        first_bad = " first failure: seed " + std::to_string(seed) + " eps " + to_string(eps);
      }
    }
  }
  return Outcome{ok == runs, std::to_string(ok) + "/" + std::to_string(runs) + " runs valid, " +
                                 std::to_string(placed) + " jobs placed, every one done by its deadline" +
                                 first_bad};
}

// ---------------------------------------------------------------- 5

Outcome criterion_stacked_b() {
  std::string detail;
  bool pass = true;
  for (std::int64_t c : {2, 1}) {
    MachineParams params = MachineParams::make(R(1), R(8), R(c));
    Instance inst = gen_stacked_b(params, 16);
    A1 a1;
    RunReport report = run_online(a1, inst);
    auto witness = single_machine_witness(inst, MachineType::B);
    if (!witness || !report.feasible() || !validate(witness->schedule, inst).feasible()) {
      return Outcome{false, "witness or a1 schedule infeasible"};
    }
    Rational ratio = report.cost / witness->cost;
    detail += "c=" + std::to_string(c) + ": " + to_string(report.cost) + "/" + to_string(witness->cost) + " = " +
              to_decimal(ratio) + "; ";
    pass = pass && ratio == R(6) && ratio >= params.setup_b / R(2);
    if (c == 1) pass = pass && report.cost == R(144) && witness->cost == R(24);
  }
  return Outcome{pass, detail + "required ratio 6 >= s_B/2 = 4"};
}

// ---------------------------------------------------------------- 6

Outcome criterion_lb_mid_trend() {
  std::vector<Rational> ratios;
  std::string detail;
  for (Rational eps : {R(1), R(1, 2), R(1, 4)}) {
    Instance inst = gen_lb_mid_eps(eps, R(4), R(2), R(1));
    A1 a1;
    RunReport report = run_online(a1, inst);
    Cost reference = inst.size() <= kOracleDefaultLimit ? brute_force_opt(inst).cost : best_witness(inst)->cost;
    if (!report.feasible()) return Outcome{false, "a1 infeasible at eps " + to_string(eps)};
    ratios.push_back(report.cost / reference);
    detail += "eps=" + to_string(eps) + " n=" + std::to_string(inst.size()) + " ratio " +
              to_decimal(ratios.back(), 4) + "; ";
  }
  bool increasing = ratios[0] < ratios[1] && ratios[1] < ratios[2];
  return Outcome{increasing, detail + "strictly increasing as eps decreases"};
}

// ---------------------------------------------------------------- 7

Outcome criterion_greedyfit_adversary() {
  std::vector<Rational> ratios;
  std::string detail;
  bool pass = true;
  for (std::int64_t sb : {4, 6, 8}) {
    // case (a): the first probe size for which GreedyFit starts j0 on its own A machine
    std::optional<Instance> chosen;
    for (std::int64_t x = 1; x <= 2 * sb && !chosen; ++x) {
      Instance inst = gen_greedyfit_adv(R(sb), R(x));
      GreedyFit gf;
      RunReport probe = run_online(gf, inst);
      for (const Assignment& a : probe.schedule.assignments) {
        if (a.job_id == inst.jobs()[0].id && probe.schedule.find_rental(a.rental)->type == MachineType::A) {
          chosen = inst;
        }
      }
    }
    if (!chosen) return Outcome{false, "no case-(a) probe found at s_B " + std::to_string(sb)};
    GreedyFit gf;
    RunReport report = run_online(gf, *chosen, brute_force_opt(*chosen).cost);
    if (!report.feasible() || !report.ratio) return Outcome{false, "greedyfit infeasible"};
    ratios.push_back(*report.ratio);
    Cost opt = report.cost / *report.ratio;
    detail += "s_B=" + std::to_string(sb) + ": " + to_string(report.cost) + "/" + to_string(opt) + " = " +
              to_decimal(*report.ratio, 4) + "; ";
    if (sb == 4) pass = pass && report.cost >= R(17) && opt < R(16);
    pass = pass && *report.ratio > R(106, 100);
  }
  pass = pass && ratios[0] < ratios[1] && ratios[1] < ratios[2];
  return Outcome{pass, detail + "cost >= 17 and opt < 16 at s_B = 4, ratio > 1.06 and growing"};
}

// ---------------------------------------------------------------- 9

Outcome criterion_determinism() {
  std::string path = std::string(CLOUDSCHED_SAMPLES) + "/bench.json";
  BenchConfig config = bench_config_from_json(io::parse_json(io::read_file(path)));
  auto render = [](const BenchConfig& c) {
    std::ostringstream out;
    write_csv(out, run_bench(c));
    return out.str();
  };
  std::string first = render(config);
  std::string second = render(config);
  BenchConfig serial = config;
  serial.workers = 1;
  std::string third = render(serial);
  std::size_t rows = static_cast<std::size_t>(std::count(first.begin(), first.end(), '\n')) - 1;
  return Outcome{first == second && first == third,
                 "samples/bench.json, " + std::to_string(rows) + " rows, " + std::to_string(first.size()) +
                     " bytes; rerun and single-worker run identical: " +
                     (first == second && first == third ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "validator mutation suite", 1, criterion_validator},
      {2, "oracle equivalence", 300, criterion_oracle_equivalence},
      {3, "tentative exact solver", 300, criterion_tentative_exact},
      {4, "BatchedDispatch feasibility", 600, criterion_bd_feasible},
      {5, "stacked-B tightness", 1, criterion_stacked_b},
      {6, "lower-bound trend in eps", 60, criterion_lb_mid_trend},
      {7, "GreedyFit adversary", 60, criterion_greedyfit_adversary},
      {8, "BatchedDispatch ratio envelope", 300, criterion_bd_envelope},
      {9, "determinism", 60, criterion_determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = Outcome{false, std::string("exception: ") + e.what()};
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = seconds < c.budget_s;
    bool pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", seconds, c.budget_s);
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " " << c.title << ": " << outcome.detail
              << " [" << timing << (in_time ? "" : ", over budget") << "]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
