// Command-line front end.
//
// Exit codes: 0 ok, 1 infeasible result, 2 input or parameter error.

#include "cloudsched/algorithms.hpp"
#include "cloudsched/bench.hpp"
#include "cloudsched/io.hpp"
#include "cloudsched/oracle.hpp"
#include "cloudsched/tentative.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace cloudsched;

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kInputError = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

io::ReadOptions read_options() { return io::ReadOptions{io::quantum_from_env()}; }

void print_validation(const ValidationReport& report) {
  if (report.feasible()) {
    std::cout << "validation: ok\n";
    return;
  }
  std::cout << "validation: " << report.violations.size() << " violation(s)\n";
  for (const Violation& v : report.violations) {
    std::cout << "  " << to_string(v.kind);
    if (!v.job_id.empty()) std::cout << " job=" << v.job_id;
    if (v.rental) std::cout << " rental=" << to_string(*v.rental);
    if (!v.other_job_id.empty()) std::cout << " other=" << v.other_job_id;
    std::cout << ": " << v.detail << '\n';
  }
}

int cmd_run(const std::string& instance_path, const std::string& algo_spec, bool with_opt, bool trace,
            const std::string& json_path) {
  Instance instance = io::read_instance(instance_path, read_options());
  auto algorithm = make_algorithm(algo_spec);
  std::optional<Cost> opt;
  if (with_opt) opt = brute_force_opt(instance).cost;
  RunReport report = run_online(*algorithm, instance, opt, trace);
  std::cout << "algorithm: " << report.algorithm << '\n';
  std::cout << "cost: " << to_string(report.cost) << " (" << to_decimal(report.cost) << ")\n";
  if (report.ratio) std::cout << "ratio: " << to_decimal(*report.ratio) << '\n';
  for (const DeclinedJob& d : report.declined) {
    std::cout << "declined: " << d.job_id << " at " << to_string(d.at) << ": " << d.reason << '\n';
  }
  print_validation(report.validation);
  if (!json_path.empty()) write_text(json_path, io::report_to_json(report).dump(2) + "\n");
  return report.feasible() && report.declined.empty() ? kOk : kInfeasible;
}

int cmd_opt(const std::string& instance_path, std::size_t limit, const std::string& json_path) {
  Instance instance = io::read_instance(instance_path, read_options());
  OptResult result = brute_force_opt(instance, limit);
  ValidationReport check = validate(result.schedule, instance);
  std::cout << "opt: " << to_string(result.cost) << " (" << to_decimal(result.cost) << ")\n";
  std::cout << "partitions: " << result.partitions << '\n';
  print_validation(check);
  if (!json_path.empty()) {
    write_text(json_path, io::opt_to_json(result).dump(2) + "\n");
    if (json_path != "-") std::cout << "witness: " << json_path << '\n';
  }
  return check.feasible() ? kOk : kInfeasible;
}

int cmd_tentative(const std::string& batch_path, const std::string& solver) {
  Instance batch = io::read_instance(batch_path, read_options());
  auto problem = tentative::generate_candidate_intervals(batch.jobs(), batch.params());
  tentative::TentativeSolution solution;
  if (solver == "exact") solution = tentative::solve_exact(problem);
  else if (solver == "firstfit") solution = tentative::solve_firstfit(problem);
  else throw InputError("unknown solver '" + solver + "'");
  std::cout << io::tentative_to_json(problem, solution).dump(2) << '\n';
  return kOk;
}

int cmd_gen(const std::string& family, const std::vector<std::string>& assignments, const std::string& out) {
  FamilyArgs args;
  for (const std::string& item : assignments) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("generator argument '" + item + "' is not key=value");
    args[item.substr(0, eq)] = parse_rational(item.substr(eq + 1));
  }
  Instance instance = generate_family(family, args);
  write_text(out, io::instance_to_json(instance).dump(2) + "\n");
  return kOk;
}

int cmd_bench(const std::string& config_path, std::optional<std::size_t> workers, const std::string& out) {
  BenchConfig config = bench_config_from_json(io::parse_json(io::read_file(config_path)));
  if (workers) config.workers = std::max<std::size_t>(1, *workers);
  std::vector<BenchRow> rows = run_bench(config);
  std::ostringstream csv;
  write_csv(csv, rows);
  write_text(out, csv.str());
  return kOk;
}

int cmd_validate(const std::string& instance_path, const std::string& schedule_path) {
  io::ReadOptions opts = read_options();
  Instance instance = io::read_instance(instance_path, opts);
  Schedule schedule = io::schedule_from_json(io::parse_json(io::read_file(schedule_path)), opts);
  ValidationReport report = validate(schedule, instance);
  print_validation(report);
  if (report.feasible()) {
    std::cout << "cost: " << to_string(total_cost(schedule, instance.params())) << '\n';
  }
  return report.feasible() ? kOk : kInfeasible;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online cloud rental scheduling: simulate, solve, generate and benchmark"};
  app.require_subcommand(1);

  std::string instance_path, algo_spec, json_path, schedule_path, config_path, out_path, family;
  std::string solver = "exact";
  bool with_opt = false, trace = false;
  std::size_t limit = kOracleDefaultLimit;
  std::optional<std::size_t> workers;
  std::vector<std::string> gen_args;

  auto* run = app.add_subcommand("run", "Run an online algorithm on an instance");
  run->add_option("instance", instance_path, "Instance JSON")->required();
  run->add_option("algorithm", algo_spec, "a1 | greedyfit[:policy] | bd:<epsilon>[:exact|:firstfit]")->required();
  run->add_flag("--opt", with_opt, "Also compute the oracle cost and ratio");
  run->add_flag("--trace", trace, "Include the action trace in the JSON report");
  run->add_option("--json", json_path, "Write the JSON report here ('-' for stdout)");

  auto* opt = app.add_subcommand("opt", "Exact offline optimum of a small instance");
  opt->add_option("instance", instance_path, "Instance JSON")->required();
  opt->add_option("--limit", limit, "Maximum number of jobs");
  opt->add_option("--json", json_path, "Write cost and witness schedule here ('-' for stdout)");

  auto* tent = app.add_subcommand("tentative", "Solve the tentative schedule problem for a batch");
  tent->add_option("batch", instance_path, "Batch JSON (instance schema)")->required();
  tent->add_option("--solver", solver, "exact | firstfit");

  auto* gen = app.add_subcommand("gen", "Generate an instance of a named family");
  gen->add_option("family", family, "prop1 | lb-mid | lb-small-a | lb-small-b | greedyfit | stacked-b | random")
      ->required();
  gen->add_option("args", gen_args, "Family parameters as key=value");
  gen->add_option("-o,--out", out_path, "Output path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep and emit CSV");
  bench->add_option("config", config_path, "Sweep config JSON")->required();
  bench->add_option("-o,--out", out_path, "Output path (default stdout)");
  bench->add_option("--workers", workers, "Worker threads");

  auto* check = app.add_subcommand("validate", "Validate a schedule against an instance");
  check->add_option("instance", instance_path, "Instance JSON")->required();
  check->add_option("schedule", schedule_path, "Schedule JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*run) return cmd_run(instance_path, algo_spec, with_opt, trace, json_path);
    if (*opt) return cmd_opt(instance_path, limit, json_path);
    if (*tent) return cmd_tentative(instance_path, solver);
    if (*gen) return cmd_gen(family, gen_args, out_path);
    if (*bench) return cmd_bench(config_path, workers, out_path);
    if (*check) return cmd_validate(instance_path, schedule_path);
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInfeasible;
  }
  return kOk;
}
