#pragma once

// Problem data model: two rentable machine types with setup times and rates,
// jobs with release times, deadlines and type-dependent sizes, and schedules
// made of rentals plus job assignments. `validate` is the single feasibility
// authority every algorithm's output is checked against.

#include "cloudsched/rational.hpp"

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cloudsched {

enum class MachineType : std::uint8_t { A, B };

inline constexpr std::array<MachineType, 2> kMachineTypes{MachineType::A, MachineType::B};

inline std::string_view to_string(MachineType type) { return type == MachineType::A ? "A" : "B"; }

inline MachineType other(MachineType type) {
  return type == MachineType::A ? MachineType::B : MachineType::A;
}

/// Setup times and rates of the two machine types. Type A is the unit-rate
/// type; type B costs `cost_b` per time unit and has the longer setup.
struct MachineParams {
  Time setup_a{1};
  Time setup_b{1};
  Rational cost_b{1};

  static MachineParams make(Time setup_a, Time setup_b, Rational cost_b) {
    MachineParams p{setup_a, setup_b, cost_b};
    p.check();
    return p;
  }

  void check() const {
    if (setup_a <= 0) throw ParameterError("setup_A must be positive");
    if (setup_b < setup_a) throw ParameterError("setup_B must be >= setup_A");
    if (cost_b < 1) throw ParameterError("cost_B must be >= 1");
  }

  Time setup(MachineType type) const { return type == MachineType::A ? setup_a : setup_b; }
  Rational cost(MachineType type) const { return type == MachineType::A ? Rational(1) : cost_b; }

  /// True when setup_B is an integer multiple of setup_A.
  bool setup_b_multiple_of_a() const { return (setup_b / setup_a).denominator() == 1; }

  friend bool operator==(const MachineParams&, const MachineParams&) = default;
};

struct Job {
  std::string id;
  Time release{0};
  Time deadline{1};
  Time size_a{1};
  Time size_b{1};

  Time size(MachineType type) const { return type == MachineType::A ? size_a : size_b; }

  friend bool operator==(const Job&, const Job&) = default;
};

/// Jobs are kept in canonical order: ascending release, ties by id.
inline bool canonical_less(const Job& lhs, const Job& rhs) {
  if (lhs.release != rhs.release) return lhs.release < rhs.release;
  return lhs.id < rhs.id;
}

class Instance {
 public:
  Instance() = default;

  Instance(MachineParams params, std::vector<Job> jobs) : params_(params), jobs_(std::move(jobs)) {
    params_.check();
    std::set<std::string> seen;
    for (const Job& job : jobs_) {
      if (job.id.empty()) throw InputError("job id must not be empty");
      if (!seen.insert(job.id).second) throw InputError("duplicate job id '" + job.id + "'");
      if (job.release < 0) throw InputError("job '" + job.id + "': release must be >= 0");
      if (job.deadline <= job.release) {
        throw InputError("job '" + job.id + "': deadline must exceed release");
      }
      if (job.size_a < 1 || job.size_b < 1) {
        throw InputError("job '" + job.id + "': sizes must be >= 1");
      }
    }
    std::sort(jobs_.begin(), jobs_.end(), canonical_less);
    for (std::size_t i = 0; i < jobs_.size(); ++i) index_.emplace(jobs_[i].id, i);
  }

  const MachineParams& params() const { return params_; }
  const std::vector<Job>& jobs() const { return jobs_; }
  std::size_t size() const { return jobs_.size(); }
  bool empty() const { return jobs_.empty(); }

  const Job* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &jobs_[it->second];
  }

  friend bool operator==(const Instance& lhs, const Instance& rhs) {
    return lhs.params_ == rhs.params_ && lhs.jobs_ == rhs.jobs_;
  }

 private:
  MachineParams params_;
  std::vector<Job> jobs_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RentalId {
  std::uint32_t value = 0;
  friend auto operator<=>(const RentalId&, const RentalId&) = default;
};

inline std::string to_string(RentalId id) { return "M" + std::to_string(id.value); }

struct Rental {
  RentalId id;
  MachineType type = MachineType::A;
  Time open_at{0};
  Time close_at{0};

  friend bool operator==(const Rental&, const Rental&) = default;
};

struct Assignment {
  std::string job_id;
  RentalId rental;
  Time start{0};

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct Schedule {
  std::vector<Rental> rentals;
  std::vector<Assignment> assignments;

  const Rental* find_rental(RentalId id) const {
    for (const Rental& r : rentals) {
      if (r.id == id) return &r;
    }
    return nullptr;
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// d_j - r_j - p_{j,type}; negative when the job cannot fit on that type at all.
inline Time slack(const Job& job, MachineType type) {
  return job.deadline - job.release - job.size(type);
}

inline Time max_slack(const Job& job) {
  return std::max(slack(job, MachineType::A), slack(job, MachineType::B));
}

/// Largest beta such that every job has some type with slack >= beta.
inline Time min_slack(const Instance& instance) {
  if (instance.empty()) throw InputError("empty instance");
  Time beta = max_slack(instance.jobs().front());
  for (const Job& job : instance.jobs()) beta = std::min(beta, max_slack(job));
  return beta;
}

inline Cost rental_cost(const Rental& rental, const MachineParams& params) {
  if (rental.close_at < rental.open_at + params.setup(rental.type)) {
    throw InputError("rental shorter than setup");
  }
  return params.cost(rental.type) * (rental.close_at - rental.open_at);
}

inline Cost total_cost(const Schedule& schedule, const MachineParams& params) {
  Cost sum{0};
  for (const Rental& r : schedule.rentals) sum += params.cost(r.type) * (r.close_at - r.open_at);
  return sum;
}

enum class ViolationKind : std::uint8_t {
  Assignment,      // job missing, assigned more than once, or unknown
  Window,          // processing interval leaves [r_j, d_j]
  Setup,           // interval starts before setup completes / rental too short
  Overlap,         // two distinct jobs share interior time on one rental
  DanglingRental,  // reference to a rental that does not exist (or is ambiguous)
};

inline constexpr std::array<ViolationKind, 5> kViolationKinds{
    ViolationKind::Assignment, ViolationKind::Window, ViolationKind::Setup, ViolationKind::Overlap,
    ViolationKind::DanglingRental};

inline std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Assignment: return "assignment";
    case ViolationKind::Window: return "window";
    case ViolationKind::Setup: return "setup";
    case ViolationKind::Overlap: return "overlap";
    case ViolationKind::DanglingRental: return "dangling_rental";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind = ViolationKind::Assignment;
  std::string job_id;                 // empty for rental-level entries
  std::optional<RentalId> rental;
  std::string other_job_id;           // second job of an overlap
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }

  std::size_t count(ViolationKind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
  }

  std::set<ViolationKind> kinds() const {
    std::set<ViolationKind> out;
    for (const Violation& v : violations) out.insert(v.kind);
    return out;
  }

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

inline ValidationReport validate(const Schedule& schedule, const Instance& instance) {
  const MachineParams& params = instance.params();
  ValidationReport report;
  auto add = [&report](ViolationKind kind, std::string job, std::optional<RentalId> rental,
                       std::string detail, std::string other = {}) {
    report.violations.push_back(
        Violation{kind, std::move(job), rental, std::move(other), std::move(detail)});
  };

  std::map<RentalId, const Rental*> rentals;
  std::set<RentalId> ambiguous;
  for (const Rental& r : schedule.rentals) {
    if (!rentals.emplace(r.id, &r).second) ambiguous.insert(r.id);
    if (r.open_at < 0) add(ViolationKind::Setup, {}, r.id, "rental opens before time 0");
    if (r.close_at < r.open_at + params.setup(r.type)) {
      add(ViolationKind::Setup, {}, r.id, "rental shorter than setup");
    }
  }
  for (RentalId id : ambiguous) add(ViolationKind::DanglingRental, {}, id, "duplicate rental id");

  std::map<std::string, int> assigned;
  struct Placed {
    std::string job;
    Time start;
    Time end;
  };
  std::map<RentalId, std::vector<Placed>> per_rental;

  for (const Assignment& a : schedule.assignments) {
    const Job* job = instance.find(a.job_id);
    if (job == nullptr) {
      add(ViolationKind::Assignment, a.job_id, a.rental, "assignment of unknown job");
      continue;
    }
    ++assigned[a.job_id];
    auto it = rentals.find(a.rental);
    if (it == rentals.end() || ambiguous.count(a.rental) != 0) {
      add(ViolationKind::DanglingRental, a.job_id, a.rental, "unknown rental");
      continue;
    }
    const Rental& rental = *it->second;
    Time end = a.start + job->size(rental.type);
    if (a.start < job->release || end > job->deadline) {
      add(ViolationKind::Window, a.job_id, a.rental,
          "interval [" + to_string(a.start) + ", " + to_string(end) + "] outside window [" +
              to_string(job->release) + ", " + to_string(job->deadline) + "]");
    }
    Time ready = rental.open_at + params.setup(rental.type);
    if (a.start < ready || end > rental.close_at) {
      add(ViolationKind::Setup, a.job_id, a.rental,
          "interval [" + to_string(a.start) + ", " + to_string(end) + "] outside usable [" +
              to_string(ready) + ", " + to_string(rental.close_at) + "]");
    }
    per_rental[a.rental].push_back(Placed{a.job_id, a.start, end});
  }

  for (const Job& job : instance.jobs()) {
    int n = assigned.count(job.id) ? assigned[job.id] : 0;
    if (n == 0) add(ViolationKind::Assignment, job.id, std::nullopt, "job not assigned");
    if (n > 1) {
      add(ViolationKind::Assignment, job.id, std::nullopt,
          "job assigned " + std::to_string(n) + " times");
    }
  }

  for (auto& [id, placed] : per_rental) {
    std::stable_sort(placed.begin(), placed.end(),
                     [](const Placed& l, const Placed& r) { return l.start < r.start; });
    for (std::size_t i = 0; i < placed.size(); ++i) {
      for (std::size_t k = i + 1; k < placed.size() && placed[k].start < placed[i].end; ++k) {
        if (placed[k].job == placed[i].job) continue;
        // closed intervals may touch; interiors must be disjoint
        if (placed[k].start < placed[i].end && placed[i].start < placed[k].end) {
          add(ViolationKind::Overlap, placed[i].job, id, "processing intervals overlap",
              placed[k].job);
        }
      }
    }
  }
  return report;
}

}  // namespace cloudsched
