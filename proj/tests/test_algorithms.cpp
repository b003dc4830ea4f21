#include "cloudsched/algorithms.hpp"
#include "cloudsched/oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cloudsched;
using testing_support::job;
using testing_support::params;
using testing_support::R;

// ---------------------------------------------------------------- A1

TEST(A1Choose, Examples) {
  // 3 <= 9 and slack_A >= s_A
  EXPECT_EQ(a1_choose_type(job("j", R(0), R(12), R(2), R(1)), params(R(1), R(2), R(3))), MachineType::A);
  // slack_B = s_B - 1 forces A regardless of cost
  EXPECT_EQ(a1_choose_type(job("j", R(0), R(2), R(1), R(1)), params(R(1), R(2), R(1))), MachineType::A);
  // 11 > 3
  EXPECT_EQ(a1_choose_type(job("j", R(0), R(12), R(10), R(1)), params(R(1), R(2), R(1))), MachineType::B);
}

TEST(A1, SingleJobExclusiveMachine) {
  Instance inst(params(R(1), R(2), R(3)), {job("j", R(0), R(20), R(2), R(1))});
  A1 a1;
  RunReport report = run_online(a1, inst);
  ASSERT_TRUE(report.feasible());
  ASSERT_EQ(report.schedule.rentals.size(), 1u);
  EXPECT_EQ(report.schedule.rentals[0].open_at, R(0));
  EXPECT_EQ(report.schedule.rentals[0].close_at, R(3));
  EXPECT_EQ(report.schedule.assignments[0].start, R(1));
  EXPECT_EQ(report.cost, R(3));
}

TEST(A1, StackedBFamilyCost) {
  auto p = params(R(1), R(8), R(2));
  Instance inst = gen_stacked_b(p, 16);
  A1 a1;
  RunReport report = run_online(a1, inst);
  ASSERT_TRUE(report.feasible());
  EXPECT_EQ(report.cost, R(16) * p.cost_b * (p.setup_b + R(1)));
}

TEST(A1, DeclinesWhenChosenTypeMissesDeadline) {
  Instance inst(params(R(1), R(4), R(1)), {job("j", R(0), R(2), R(5), R(1))});
  A1 a1;
  RunReport report = run_online(a1, inst);
  ASSERT_EQ(report.declined.size(), 1u);
  EXPECT_NE(report.declined[0].reason.find("infeasible job"), std::string::npos);
}

TEST(A1, SingleJobOptimality) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto p = params(R(1 + static_cast<std::int64_t>(seed % 2)), R(4), R(1 + static_cast<std::int64_t>(seed % 3)));
    Instance inst = gen_random(seed, 1, p, R(4) + R(static_cast<std::int64_t>(seed % 5)));
    const Job& j = inst.jobs()[0];
    bool both = slack(j, MachineType::A) >= p.setup_a && slack(j, MachineType::B) >= p.setup_b;
    if (!both) continue;
    A1 a1;
    Cost best = std::min(p.setup_a + j.size_a, p.cost_b * (p.setup_b + j.size_b));
    EXPECT_EQ(run_online(a1, inst).cost, best) << "seed " << seed;
  }
}

// ---------------------------------------------------------------- GreedyFit

namespace {

RentalState rental(MachineType type, Time open, Time ready, Time committed) {
  return RentalState{RentalId{0}, type, open, ready, committed, 0, std::nullopt};
}

}  // namespace

TEST(GreedyFitReasonable, Examples) {
  auto p = params(R(1), R(2), R(2));
  // idle A machine: c_A p_A = 2 <= min(1 + 2, 2 (2 + 2)) = 3
  Job j = job("j", R(0), R(10), R(2), R(2));
  EXPECT_TRUE(greedyfit_reasonable(j, rental(MachineType::A, R(0), R(1), R(1)), R(1), p));
  // queue ends too late for the deadline
  EXPECT_FALSE(greedyfit_reasonable(j, rental(MachineType::A, R(0), R(1), R(9)), R(1), p));
  // B rental: c p_B = 2 * 3 = 6 > s_A + p_A = 1 + 2 = 3
  Job k = job("k", R(0), R(20), R(2), R(3));
  EXPECT_FALSE(greedyfit_reasonable(k, rental(MachineType::B, R(0), R(2), R(2)), R(2), p));
  // deadline met exactly
  Job e = job("e", R(0), R(5), R(2), R(2));
  EXPECT_TRUE(greedyfit_reasonable(e, rental(MachineType::A, R(0), R(1), R(3)), R(1), p));
}

TEST(GreedyFitPolicy, ParseAndFormat) {
  GreedyFitPolicy d = GreedyFitPolicy::parse("default");
  EXPECT_EQ(d.to_string(), "order=id,open=a1,fit=first,close=1");
  GreedyFitPolicy p = GreedyFitPolicy::parse("order=deadline,open=cheapest,fit=best,close=0");
  EXPECT_EQ(p.order, GreedyFitPolicy::Order::Deadline);
  EXPECT_EQ(p.open_choice, GreedyFitPolicy::OpenChoice::Cheapest);
  EXPECT_EQ(p.fit_choice, GreedyFitPolicy::FitChoice::Best);
  EXPECT_FALSE(p.close_on_idle);
  EXPECT_EQ(GreedyFitPolicy::parse(p.to_string()).to_string(), p.to_string());
  EXPECT_THROW(GreedyFitPolicy::parse("order=random"), InputError);
  EXPECT_THROW(GreedyFitPolicy::parse("color=red"), InputError);
  EXPECT_THROW(GreedyFitPolicy::parse("fit"), InputError);
}

TEST(GreedyFit, StackedJobsShareOneRental) {
  Instance inst(params(R(1), R(2), R(2)), {job("a", R(0), R(10), R(2), R(2)), job("b", R(0), R(10), R(2), R(2))});
  GreedyFit gf;
  RunReport report = run_online(gf, inst);
  ASSERT_TRUE(report.feasible());
  EXPECT_EQ(report.schedule.rentals.size(), 1u);
  EXPECT_EQ(report.schedule.assignments.size(), 2u);
  EXPECT_EQ(report.cost, R(5));
}

TEST(GreedyFit, SingleJobMatchesA1) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Instance inst = gen_random(seed, 1, params(R(1), R(4), R(2)), R(6));
    A1 a1;
    GreedyFit gf;
    RunReport x = run_online(a1, inst);
    RunReport y = run_online(gf, inst);
    EXPECT_EQ(x.schedule, y.schedule) << "seed " << seed;
  }
}

TEST(GreedyFit, AdversaryCostAtLeastSetupPlusSquare) {
  Instance inst = gen_greedyfit_adv(R(4), R(1));
  GreedyFit gf;
  RunReport report = run_online(gf, inst);
  ASSERT_TRUE(report.feasible());
  EXPECT_GE(report.cost, R(1) + R(16));
  EXPECT_EQ(report.cost, R(18));
}

TEST(GreedyFit, CloseOnIdleLeavesNoIdleMachines) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Instance inst = gen_random(seed, 7, params(R(1), R(3), R(2)), R(6));
    for (const char* spec : {"greedyfit", "greedyfit:order=deadline,open=cheapest,fit=best,close=1"}) {
      auto gf = make_algorithm(spec);
      RunReport report = run_online(*gf, inst, std::nullopt, true);
      ASSERT_TRUE(report.feasible()) << spec << " seed " << seed;
      for (const TraceEntry& t : report.trace) EXPECT_FALSE(t.automatic) << spec;
      for (const Rental& r : report.schedule.rentals) {
        Time last = r.open_at;
        for (const Assignment& a : report.schedule.assignments) {
          if (a.rental == r.id) last = std::max(last, a.start + inst.find(a.job_id)->size(r.type));
        }
        EXPECT_EQ(r.close_at, last) << spec << " seed " << seed;
      }
    }
  }
}

TEST(GreedyFit, PoliciesAreFeasibleOnSlackInstances) {
  const char* policies[] = {"greedyfit:order=id,open=a1,fit=first,close=0",
                            "greedyfit:order=deadline,open=a1,fit=best,close=1",
                            "greedyfit:order=id,open=cheapest,fit=first,close=1"};
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    Instance inst = gen_random(seed, 6, params(R(1), R(4), R(3)), R(8));
    for (const char* spec : policies) {
      auto gf = make_algorithm(spec);
      RunReport report = run_online(*gf, inst);
      EXPECT_TRUE(report.feasible()) << spec << " seed " << seed;
    }
  }
}

// ---------------------------------------------------------------- BatchedDispatch

TEST(BdClassify, Examples) {
  // eps = 1/2, s_B = 8, Delta = 2; deadlines are already reduced
  auto p = params(R(1), R(8), R(1));
  Time delta = R(2);
  ASSERT_FALSE(bd_condition(p, delta));
  Job j2{"j2", R(10), R(16), R(5), R(1)};  // slack_B 5, slack_A 1, p_A 5 > Delta
  EXPECT_EQ(bd_classify(j2, p, delta, false), SlackClass::J2_2);
  Job wide{"wide", R(10), R(20), R(5), R(1)};  // slack_A 5 >= 2 Delta
  EXPECT_EQ(bd_classify(wide, p, delta, false), SlackClass::J1);
  Job boundary{"boundary", R(0), R(5), R(1), R(1)};  // slack_B 4 = 2 Delta
  EXPECT_EQ(bd_classify(boundary, p, delta, false), SlackClass::J1);
}

TEST(BdClassify, ConditionAndSplit) {
  EXPECT_TRUE(bd_condition(params(R(4), R(8), R(1)), R(2)));
  EXPECT_FALSE(bd_condition(params(R(4), R(8), R(2)), R(2)));  // s_A / c = 2 not > 2
  EXPECT_FALSE(bd_condition(params(R(7), R(8), R(1)), R(2)));  // 8 < 7 + 2

  // not C: a J2 job with c p_B = s_A lands in J2_2, above it in J2_1
  auto p = params(R(2), R(8), R(2));
  Time delta = R(2);
  ASSERT_FALSE(bd_condition(p, delta));
  Job eq{"eq", R(0), R(10), R(9), R(1)};  // slack_A 1 < 4, p_A 9 > 2, slack_B 9 >= 4, c p_B = 2 = s_A
  EXPECT_EQ(bd_classify(eq, p, delta, false), SlackClass::J2_2);
  Job above{"above", R(0), R(12), R(11), R(2)};  // c p_B = 4 > 2
  EXPECT_EQ(bd_classify(above, p, delta, false), SlackClass::J2_1);
  // under C every J2 job is J2_1
  EXPECT_EQ(bd_classify(eq, p, delta, true), SlackClass::J2_1);

  Job j1{"j1", R(0), R(20), R(3), R(3)};
  EXPECT_EQ(bd_classify(j1, p, delta, false), SlackClass::J1);
  Job j1_small{"j1s", R(0), R(10), R(2), R(1)};  // slack_A 8, p_A <= Delta anyway
  EXPECT_EQ(bd_classify(j1_small, p, delta, false), SlackClass::J1);
  Job j3{"j3", R(0), R(10), R(1), R(9)};  // slack_B 1 < 4, slack_A 9
  EXPECT_EQ(bd_classify(j3, p, delta, false), SlackClass::J3);
  Job none{"none", R(0), R(4), R(3), R(3)};
  EXPECT_FALSE(bd_classify(none, p, delta, false).has_value());
}

TEST(BdClassify, TotalOnSlackInstances) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Time sb = seed % 2 ? R(8) : R(4);
    auto p = params(seed % 3 ? R(1) : R(2), sb, R(1 + static_cast<std::int64_t>(seed % 3)));
    for (Rational eps : {R(1), R(1, 2), R(1, 4), R(1) / sb}) {
      Time delta = eps * sb / R(2);
      Instance inst = gen_random(seed, 8, p, (R(1) + eps) * sb);
      for (Job j : inst.jobs()) {
        j.deadline -= sb;
        EXPECT_TRUE(bd_classify(j, p, delta, bd_condition(p, delta)).has_value()) << "seed " << seed;
      }
    }
  }
}

TEST(BatchedDispatch, RejectsParametersOutOfRange) {
  Instance inst(params(R(1), R(4), R(2)), {job("j", R(0), R(20), R(2), R(2))});
  BatchedDispatch low(R(1, 8));  // below 1/s_B
  EXPECT_THROW(run_online(low, inst), ParameterError);
  Instance odd(params(R(3), R(8), R(2)), {job("j", R(0), R(30), R(2), R(2))});
  BatchedDispatch ok(R(1));
  EXPECT_THROW(run_online(ok, odd), ParameterError);
  EXPECT_THROW(make_algorithm("bd:0"), ParameterError);
  EXPECT_THROW(make_algorithm("bd:3/2"), ParameterError);
  EXPECT_THROW(make_algorithm("bd:x"), InputError);
  EXPECT_THROW(make_algorithm("nope"), InputError);
}

TEST(BatchedDispatch, SingleJ1JobShiftedBySetup) {
  // eps = 1, s_B = 4, Delta = 2; job released at 1 joins phase 1 (ends at 2)
  auto p = params(R(1), R(4), R(3));
  Instance inst(p, {job("j", R(1), R(20), R(2), R(2))});
  BatchedDispatch bd(R(1));
  RunReport report = run_online(bd, inst);
  ASSERT_TRUE(report.feasible());
  ASSERT_EQ(report.schedule.rentals.size(), 1u);
  const Rental& r = report.schedule.rentals[0];
  EXPECT_EQ(r.open_at, R(2));
  const Assignment& a = report.schedule.assignments[0];
  EXPECT_GE(a.start, R(2) + p.setup(r.type));
  EXPECT_LE(a.start + inst.jobs()[0].size(r.type), inst.jobs()[0].deadline);
}

TEST(BatchedDispatch, PrecautionaryRentalWithoutC) {
  // s_A = 2, s_B = 8, c = 2, eps = 1: Delta = 4, C fails (s_A / c = 1)
  auto p = params(R(2), R(8), R(2));
  // reduced deadline 13: slack_B 10 >= 8, slack_A 1, p_A 11 > 4, c p_B = 4 > s_A
  Job j{"j", R(1), R(21), R(11), R(2)};
  Instance inst(p, {j});
  BatchedDispatch bd(R(1));
  RunReport report = run_online(bd, inst, std::nullopt, true);
  ASSERT_TRUE(report.feasible());
  ASSERT_FALSE(report.schedule.rentals.empty());
  // the first rental is the precautionary type-A machine opened at release
  EXPECT_EQ(report.schedule.rentals[0].type, MachineType::A);
  EXPECT_EQ(report.schedule.rentals[0].open_at, R(1));
  for (const Assignment& a : report.schedule.assignments) {
    const Rental* r = report.schedule.find_rental(a.rental);
    ASSERT_NE(r, nullptr);
    EXPECT_GE(a.start, r->open_at + p.setup(r->type));
  }
}

namespace {

/// Checks the realization invariants of one BatchedDispatch run.
void expect_realization_invariants(const Instance& inst, const RunReport& report, const BatchedDispatch& bd,
                                   const std::string& where) {
  const MachineParams& p = inst.params();
  std::set<Time> precautionary_opens;
  for (const Job& j : inst.jobs()) precautionary_opens.insert(j.release);
  for (const Rental& r : report.schedule.rentals) {
    Rational phase = r.open_at / bd.delta();
    bool boundary = phase.denominator() == 1;
    bool precaution = r.type == MachineType::A && precautionary_opens.count(r.open_at) != 0;
    EXPECT_TRUE(boundary || precaution) << where << " rental opened at " << to_string(r.open_at);
  }
  for (const Assignment& a : report.schedule.assignments) {
    const Job* j = inst.find(a.job_id);
    const Rental* r = report.schedule.find_rental(a.rental);
    ASSERT_NE(r, nullptr);
    EXPECT_LE(a.start + j->size(r->type), j->deadline) << where;
    Job reduced = *j;
    reduced.deadline -= p.setup_b;
    auto cls = bd_classify(reduced, p, bd.delta(), bd.condition());
    ASSERT_TRUE(cls.has_value());
    if (*cls == SlackClass::J1 || *cls == SlackClass::J2_2 || *cls == SlackClass::J3) {
      Time boundary = (floor_rational(j->release / bd.delta()) + R(1)) * bd.delta();
      EXPECT_GE(a.start, boundary + p.setup(r->type)) << where << " job " << j->id;
    }
  }
}

}  // namespace

TEST(BatchedDispatch, RealizationInvariantsOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Time sb = seed % 2 ? R(8) : R(4);
    Time sa = seed % 3 == 0 ? R(2) : R(1);
    auto p = params(sa, sb, R(1 + static_cast<std::int64_t>(seed % 3)));
    for (Rational eps : {R(1), R(1, 2), R(1, 4)}) {
      Instance inst = gen_random(seed, 7, p, (R(1) + eps) * sb);
      BatchedDispatch bd(eps);
      RunReport report = run_online(bd, inst);
      std::string where = "seed " + std::to_string(seed) + " eps " + to_string(eps);
      EXPECT_TRUE(report.feasible()) << where;
      EXPECT_TRUE(report.declined.empty()) << where;
      expect_realization_invariants(inst, report, bd, where);
    }
  }
}

TEST(BatchedDispatch, SixJobInstanceHasFiniteRatio) {
  Instance inst = gen_random(42, 6, params(R(1), R(4), R(2)), R(8));
  BatchedDispatch bd(R(1));
  RunReport report = run_online(bd, inst, brute_force_opt(inst).cost);
  ASSERT_TRUE(report.feasible());
  ASSERT_TRUE(report.ratio.has_value());
  EXPECT_GE(*report.ratio, R(1));
}

TEST(MakeAlgorithm, Names) {
  EXPECT_EQ(make_algorithm("a1")->name(), "a1");
  EXPECT_EQ(make_algorithm("greedyfit")->name(), "greedyfit:order=id,open=a1,fit=first,close=1");
  EXPECT_EQ(make_algorithm("bd:0.5")->name(), "bd:1/2");
  EXPECT_EQ(make_algorithm("bd:1/4:firstfit")->name(), "bd:1/4:firstfit");
}
