#pragma once

// JSON reading and writing.
//
// Numbers are read exactly: a JSON number's source text is kept and parsed
// as a rational, so "0.1" is 1/10. Fields accept integers, decimal numbers
// or strings ("0.125", "1/8"). Non-integers are written as strings.

#include "cloudsched/harness.hpp"
#include "cloudsched/oracle.hpp"
#include "cloudsched/tentative.hpp"

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

namespace cloudsched::io {

using json = nlohmann::json;

namespace detail {

// DOM builder that stores floating-point literals as their source text.
class ExactSax : public nlohmann::detail::json_sax_dom_parser<json> {
 public:
  using nlohmann::detail::json_sax_dom_parser<json>::json_sax_dom_parser;

  bool number_float(json::number_float_t /*value*/, const json::string_t& text) {
    json::string_t copy = text;
    return this->string(copy);
  }
};

}  // namespace detail

/// Parses JSON text, keeping decimal literals exact.
inline json parse_json(std::string_view text) {
  json result;
  detail::ExactSax sax(result);
  try {
    json::sax_parse(text.begin(), text.end(), &sax);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Reads a rational from an integer, a decimal literal or a string.
inline Rational to_rational(const json& value, const std::string& path) {
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const InputError& e) {
      throw InputError(path + ": " + e.what());
    }
  }
  throw InputError(path + ": expected a number");
}

/// Integers as JSON numbers, other values as exact strings.
inline json from_rational(const Rational& x) {
  if (x.denominator() == 1) return json(x.numerator());
  if (is_terminating_decimal(x)) {
    std::int64_t d = x.denominator();
    int digits = 0;
    while (d > 1 && digits <= 9) {
      if (d % 10 == 0) d /= 10;
      else if (d % 2 == 0) d /= 2;
      else d /= 5;
      ++digits;
    }
    if (digits <= 9) return json(to_decimal(x, digits));
  }
  return json(to_string(x));
}

/// Time quantum from SCHED_TIME_QUANTUM, if set.
inline std::optional<Rational> quantum_from_env() {
  const char* raw = std::getenv("SCHED_TIME_QUANTUM");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  Rational q = parse_rational(raw);
  if (q <= 0) throw ParameterError("SCHED_TIME_QUANTUM must be positive");
  return q;
}

struct ReadOptions {
  std::optional<Rational> quantum;  // snap all times to multiples of this
};

namespace detail {

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "." + key + ": missing field");
  return *it;
}

inline Time time_field(const json& obj, const char* key, const std::string& path, const ReadOptions& opts) {
  Rational v = to_rational(field(obj, key, path), path + "." + key);
  return opts.quantum ? snap_to_quantum(v, *opts.quantum) : v;
}

inline std::string id_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw InputError(path + "." + key + ": expected a string id");
}

inline MachineType type_from(const json& v, const std::string& path) {
  if (v == "A") return MachineType::A;
  if (v == "B") return MachineType::B;
  throw InputError(path + ": machine type must be \"A\" or \"B\"");
}

inline RentalId rental_id_from(const json& v, const std::string& path) {
  std::int64_t n = -1;
  if (v.is_number_integer()) {
    n = v.get<std::int64_t>();
  } else if (v.is_string()) {
    std::string s = v.get<std::string>();
    std::string_view digits = s;
    if (!digits.empty() && digits.front() == 'M') digits.remove_prefix(1);
    try {
      n = cloudsched::detail::parse_int(digits, s);
    } catch (const InputError&) {
      n = -1;
    }
  }
  if (n < 0 || n > std::numeric_limits<std::uint32_t>::max()) {
    throw InputError(path + ": rental id must be \"M<n>\" or a nonnegative integer");
  }
  return RentalId{static_cast<std::uint32_t>(n)};
}

inline std::vector<Job> jobs_from(const json& doc, const ReadOptions& opts) {
  const json& list = field(doc, "jobs", "$");
  if (!list.is_array()) throw InputError("$.jobs: expected an array");
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    std::string path = "$.jobs[" + std::to_string(i) + "]";
    const json& j = list[i];
    Job job;
    job.id = id_field(j, "id", path);
    job.release = time_field(j, "release", path, opts);
    job.deadline = time_field(j, "deadline", path, opts);
    job.size_a = time_field(j, "p_A", path, opts);
    job.size_b = time_field(j, "p_B", path, opts);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

inline MachineParams params_from(const json& doc, const ReadOptions& opts) {
  const json& types = field(doc, "machine_types", "$");
  const json& a = field(types, "A", "$.machine_types");
  const json& b = field(types, "B", "$.machine_types");
  MachineParams params;
  params.setup_a = time_field(a, "setup", "$.machine_types.A", opts);
  params.setup_b = time_field(b, "setup", "$.machine_types.B", opts);
  params.cost_b = to_rational(field(b, "cost", "$.machine_types.B"), "$.machine_types.B.cost");
  if (a.contains("cost") && to_rational(a["cost"], "$.machine_types.A.cost") != Rational(1)) {
    throw ParameterError("$.machine_types.A.cost: the cost of type A is fixed at 1");
  }
  try {
    params.check();
  } catch (const ParameterError& e) {
    throw ParameterError(std::string("$.machine_types: ") + e.what());
  }
  return params;
}

}  // namespace detail

inline Instance instance_from_json(const json& doc, const ReadOptions& opts = {}) {
  return Instance(detail::params_from(doc, opts), detail::jobs_from(doc, opts));
}

inline Instance parse_instance(std::string_view text, const ReadOptions& opts = {}) {
  return instance_from_json(parse_json(text), opts);
}

inline Instance read_instance(const std::string& path, const ReadOptions& opts = {}) {
  return parse_instance(read_file(path), opts);
}

inline json job_to_json(const Job& job) {
  return json{{"id", job.id},
              {"release", from_rational(job.release)},
              {"deadline", from_rational(job.deadline)},
              {"p_A", from_rational(job.size_a)},
              {"p_B", from_rational(job.size_b)}};
}

inline json instance_to_json(const Instance& instance) {
  const MachineParams& p = instance.params();
  json jobs = json::array();
  for (const Job& job : instance.jobs()) jobs.push_back(job_to_json(job));
  return json{{"machine_types",
               {{"A", {{"setup", from_rational(p.setup_a)}, {"cost", 1}}},
                {"B", {{"setup", from_rational(p.setup_b)}, {"cost", from_rational(p.cost_b)}}}}},
              {"jobs", std::move(jobs)}};
}

inline json schedule_to_json(const Schedule& schedule) {
  json rentals = json::array();
  for (const Rental& r : schedule.rentals) {
    rentals.push_back(json{{"id", to_string(r.id)},
                           {"type", std::string(to_string(r.type))},
                           {"open", from_rational(r.open_at)},
                           {"close", from_rational(r.close_at)}});
  }
  json assignments = json::array();
  for (const Assignment& a : schedule.assignments) {
    assignments.push_back(
        json{{"job", a.job_id}, {"rental", to_string(a.rental)}, {"start", from_rational(a.start)}});
  }
  return json{{"rentals", std::move(rentals)}, {"assignments", std::move(assignments)}};
}

inline Schedule schedule_from_json(const json& doc, const ReadOptions& opts = {}) {
  Schedule schedule;
  const json& rentals = detail::field(doc, "rentals", "$");
  const json& assignments = detail::field(doc, "assignments", "$");
  if (!rentals.is_array()) throw InputError("$.rentals: expected an array");
  if (!assignments.is_array()) throw InputError("$.assignments: expected an array");
  for (std::size_t i = 0; i < rentals.size(); ++i) {
    std::string path = "$.rentals[" + std::to_string(i) + "]";
    const json& r = rentals[i];
    schedule.rentals.push_back(Rental{detail::rental_id_from(detail::field(r, "id", path), path + ".id"),
                                      detail::type_from(detail::field(r, "type", path), path + ".type"),
                                      detail::time_field(r, "open", path, opts),
                                      detail::time_field(r, "close", path, opts)});
  }
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    std::string path = "$.assignments[" + std::to_string(i) + "]";
    const json& a = assignments[i];
    schedule.assignments.push_back(
        Assignment{detail::id_field(a, "job", path),
                   detail::rental_id_from(detail::field(a, "rental", path), path + ".rental"),
                   detail::time_field(a, "start", path, opts)});
  }
  return schedule;
}

inline json validation_to_json(const ValidationReport& report) {
  json list = json::array();
  for (const Violation& v : report.violations) {
    json entry{{"kind", std::string(to_string(v.kind))}, {"detail", v.detail}};
    if (!v.job_id.empty()) entry["job"] = v.job_id;
    if (v.rental) entry["rental"] = to_string(*v.rental);
    if (!v.other_job_id.empty()) entry["other_job"] = v.other_job_id;
    list.push_back(std::move(entry));
  }
  return json{{"feasible", report.feasible()}, {"violations", std::move(list)}};
}

inline json action_to_json(const AlgorithmAction& action) {
  struct Visitor {
    json operator()(const OpenMachine& a) const {
      return {{"action", "open"}, {"rental", to_string(a.rental)}, {"type", std::string(to_string(a.type))},
              {"at", from_rational(a.at)}};
    }
    json operator()(const CloseMachine& a) const {
      return {{"action", "close"}, {"rental", to_string(a.rental)}, {"at", from_rational(a.at)}};
    }
    json operator()(const AssignJob& a) const {
      return {{"action", "assign"}, {"job", a.job_id}, {"rental", to_string(a.rental)},
              {"start", from_rational(a.start)}};
    }
    json operator()(const RequestWakeUp& a) const {
      return {{"action", "wakeup"}, {"at", from_rational(a.at)}, {"tag", a.tag}};
    }
    json operator()(const DeclareInfeasible& a) const {
      return {{"action", "infeasible"}, {"job", a.job_id}, {"reason", a.reason}};
    }
  };
  return std::visit(Visitor{}, action);
}

inline json trace_to_json(const std::vector<TraceEntry>& trace) {
  json list = json::array();
  for (const TraceEntry& e : trace) {
    json entry = action_to_json(e.action);
    entry["now"] = from_rational(e.now);
    if (e.automatic) entry["automatic"] = true;
    list.push_back(std::move(entry));
  }
  return list;
}

inline json report_to_json(const RunReport& report) {
  json declined = json::array();
  for (const DeclinedJob& d : report.declined) {
    declined.push_back(json{{"job", d.job_id}, {"at", from_rational(d.at)}, {"reason", d.reason}});
  }
  json out{{"algorithm", report.algorithm},
           {"cost", from_rational(report.cost)},
           {"feasible", report.feasible()},
           {"validation", validation_to_json(report.validation)},
           {"declined", std::move(declined)},
           {"schedule", schedule_to_json(report.schedule)}};
  if (report.ratio) out["ratio"] = from_rational(*report.ratio);
  if (!report.trace.empty()) out["trace"] = trace_to_json(report.trace);
  return out;
}

inline json opt_to_json(const OptResult& result) {
  return json{{"cost", from_rational(result.cost)},
              {"partitions", result.partitions},
              {"schedule", schedule_to_json(result.schedule)}};
}

inline json tentative_to_json(const tentative::TentativeProblem& problem,
                              const tentative::TentativeSolution& solution) {
  json intervals = json::array();
  for (std::size_t j = 0; j < problem.jobs.size(); ++j) {
    const tentative::CandidateInterval& c = solution.chosen(problem, j);
    json entry{{"job", problem.jobs[j].id},
               {"type", std::string(to_string(c.type))},
               {"start", from_rational(c.start)},
               {"end", from_rational(c.end)},
               {"exclusive", c.exclusive},
               {"size_class", std::string(tentative::to_string(tentative::size_classify(problem.jobs[j], problem.params)))}};
    if (!c.exclusive) entry["pool"] = c.pool.interval;
    intervals.push_back(std::move(entry));
  }
  json machines = json::array();
  for (const auto& [pool, count] : solution.machines) {
    machines.push_back(
        json{{"type", std::string(to_string(pool.type))}, {"pool", pool.interval}, {"count", count}});
  }
  return json{{"objective", from_rational(solution.objective)},
              {"candidates", problem.candidate_count()},
              {"nodes", solution.nodes},
              {"proven_optimal", solution.proven_optimal},
              {"machines", std::move(machines)},
              {"intervals", std::move(intervals)}};
}

}  // namespace cloudsched::io
