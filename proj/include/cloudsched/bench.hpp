#pragma once

// Benchmark sweeps: named instance families, a JSON sweep config, and CSV
// rows of (instance, algorithm) results computed on a worker pool.

#include "cloudsched/algorithms.hpp"
#include "cloudsched/io.hpp"
#include "cloudsched/oracle.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cloudsched {

using FamilyArgs = std::map<std::string, Rational>;

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"prop1",     "lb-mid",    "lb-small-a", "lb-small-b",
                                              "greedyfit", "stacked-b", "random"};
  return names;
}

/// Builds an instance of a named family. Missing arguments take defaults;
/// unknown ones are rejected.
inline Instance generate_family(const std::string& family, const FamilyArgs& args) {
  std::set<std::string> used;
  auto get = [&](const std::string& key, Rational fallback) {
    used.insert(key);
    auto it = args.find(key);
    return it == args.end() ? fallback : it->second;
  };
  auto count = [](const Rational& v, const char* key) {
    if (v.denominator() != 1 || v.numerator() < 0) {
      throw ParameterError(std::string(key) + " must be a nonnegative integer");
    }
    return v.numerator();
  };
  auto params = [&](Rational sa, Rational sb, Rational c) {
    return MachineParams::make(get("setup_A", sa), get("setup_B", sb), get("cost_B", c));
  };

  std::optional<Instance> out;
  if (family == "prop1") {
    MachineParams p = params(1, 4, 2);
    out = gen_prop1(p, get("beta", 0), get("t", 100));
  } else if (family == "lb-mid") {
    out = gen_lb_mid_eps(get("epsilon", 1), get("s", 4), get("c", 2), get("t", 8),
                         get("delta", kDefaultPerturbation));
  } else if (family == "lb-small-a") {
    out = gen_lb_small_eps_A(get("epsilon", 0), get("s", 4), get("c", 2), get("t", 8),
                             get("delta", kDefaultPerturbation));
  } else if (family == "lb-small-b") {
    MachineParams p = params(1, 4, 1);
    out = gen_lb_small_eps_B(p, get("t", 8), get("epsilon", 0));
  } else if (family == "greedyfit") {
    out = gen_greedyfit_adv(get("setup_B", 4), get("x", 1), get("offset", kDefaultFollowerOffset));
  } else if (family == "stacked-b") {
    MachineParams p = params(1, 8, 2);
    out = gen_stacked_b(p, static_cast<std::size_t>(count(get("n", 16), "n")));
  } else if (family == "random") {
    MachineParams p = params(1, 4, 2);
    std::uint64_t seed = static_cast<std::uint64_t>(count(get("seed", 0), "seed"));
    std::size_t n = static_cast<std::size_t>(count(get("n", 6), "n"));
    out = gen_random(seed, n, p, get("beta", 2 * p.setup_b));
  } else {
    throw InputError("unknown family '" + family + "'");
  }
  for (const auto& [key, value] : args) {
    if (used.count(key) == 0) throw InputError("family '" + family + "' has no parameter '" + key + "'");
  }
  return *out;
}

/// "lb-mid:c=2;epsilon=1/2" (arguments sorted by name).
inline std::string family_label(const std::string& family, const FamilyArgs& args) {
  std::string label = family;
  char sep = ':';
  for (const auto& [key, value] : args) {
    label += sep + key + "=" + to_string(value);
    sep = ';';
  }
  return label;
}

struct BenchCase {
  std::string label;
  std::string family;
  FamilyArgs args;
};

struct BenchConfig {
  std::vector<std::string> algorithms;
  std::vector<BenchCase> cases;
  std::size_t workers = 1;
  std::size_t oracle_limit = 6;
  bool record_time = false;
};

struct BenchRow {
  std::string instance;
  std::string algorithm;
  std::optional<Rational> epsilon;
  std::optional<Time> beta;
  std::size_t n = 0;
  std::optional<Cost> cost;
  std::optional<Cost> opt;
  std::optional<Rational> ratio;
  bool feasible = false;
  std::optional<double> ms;
};

inline constexpr std::string_view kBenchHeader = "instance,algo,epsilon,beta,n,cost,opt,ratio,feasible,ms";

namespace detail {

inline std::string csv_cell(const std::optional<Rational>& v) { return v ? to_decimal(*v) : std::string(); }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string to_csv_line(const BenchRow& row) {
  std::string ms;
  if (row.ms) {
    std::ostringstream buf;
    buf.imbue(std::locale::classic());
    buf.setf(std::ios::fixed);
    buf.precision(3);
    buf << *row.ms;
    ms = buf.str();
  }
  return detail::csv_quote(row.instance) + "," + detail::csv_quote(row.algorithm) + "," +
         detail::csv_cell(row.epsilon) + "," + detail::csv_cell(row.beta) + "," + std::to_string(row.n) + "," +
         detail::csv_cell(row.cost) + "," + detail::csv_cell(row.opt) + "," + detail::csv_cell(row.ratio) + "," +
         (row.feasible ? "true" : "false") + "," + ms;
}

inline void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchHeader << '\n';
  for (const BenchRow& row : rows) out << to_csv_line(row) << '\n';
}

namespace detail {

inline FamilyArgs args_from(const io::json& obj, const std::string& path,
                            std::vector<std::pair<std::string, std::vector<Rational>>>& lists) {
  FamilyArgs fixed;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (it.key() == "family" || it.key() == "count") continue;
    std::string p = path + "." + it.key();
    if (it->is_array()) {
      std::vector<Rational> values;
      for (std::size_t i = 0; i < it->size(); ++i) {
        values.push_back(io::to_rational((*it)[i], p + "[" + std::to_string(i) + "]"));
      }
      lists.emplace_back(it.key(), std::move(values));
    } else {
      fixed[it.key()] = io::to_rational(*it, p);
    }
  }
  return fixed;
}

}  // namespace detail

/// Config: {"algorithms": [...], "workers": n, "oracle_limit": n,
/// "record_time": bool, "sweeps": [{"family": name, <arg>: value | [values],
/// "count": n}]}. List-valued arguments expand to their cartesian product;
/// "count" repeats a random sweep over consecutive seeds.
inline BenchConfig bench_config_from_json(const io::json& doc) {
  if (!doc.is_object()) throw InputError("$: expected an object");
  BenchConfig config;
  if (doc.contains("algorithms")) {
    const io::json& algos = doc["algorithms"];
    if (!algos.is_array()) throw InputError("$.algorithms: expected an array");
    for (std::size_t i = 0; i < algos.size(); ++i) {
      if (!algos[i].is_string()) throw InputError("$.algorithms[" + std::to_string(i) + "]: expected a string");
      std::string spec = algos[i].get<std::string>();
      try {
        make_algorithm(spec);
      } catch (const InputError& e) {
        throw InputError("$.algorithms[" + std::to_string(i) + "]: " + e.what());
      }
      config.algorithms.push_back(spec);
    }
  }
  auto count_field = [&](const char* key, std::size_t fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number_unsigned()) throw InputError(std::string("$.") + key + ": expected a count");
    return doc[key].get<std::size_t>();
  };
  config.workers = std::max<std::size_t>(1, count_field("workers", 1));
  config.oracle_limit = count_field("oracle_limit", 6);
  if (doc.contains("record_time")) {
    if (!doc["record_time"].is_boolean()) throw InputError("$.record_time: expected a boolean");
    config.record_time = doc["record_time"].get<bool>();
  }
  if (!doc.contains("sweeps")) return config;
  const io::json& sweeps = doc["sweeps"];
  if (!sweeps.is_array()) throw InputError("$.sweeps: expected an array");
  for (std::size_t s = 0; s < sweeps.size(); ++s) {
    std::string path = "$.sweeps[" + std::to_string(s) + "]";
    const io::json& sweep = sweeps[s];
    if (!sweep.is_object() || !sweep.contains("family") || !sweep["family"].is_string()) {
      throw InputError(path + ".family: missing family name");
    }
    std::string family = sweep["family"].get<std::string>();
    std::vector<std::pair<std::string, std::vector<Rational>>> lists;
    FamilyArgs fixed = detail::args_from(sweep, path, lists);
    std::size_t repeat = 1;
    if (sweep.contains("count")) {
      if (!sweep["count"].is_number_unsigned()) throw InputError(path + ".count: expected a count");
      repeat = sweep["count"].get<std::size_t>();
    }

    std::vector<FamilyArgs> expanded{fixed};
    for (const auto& [key, values] : lists) {
      std::vector<FamilyArgs> next;
      for (const FamilyArgs& base : expanded) {
        for (const Rational& v : values) {
          FamilyArgs a = base;
          a[key] = v;
          next.push_back(std::move(a));
        }
      }
      expanded = std::move(next);
    }
    for (const FamilyArgs& base : expanded) {
      Rational seed0 = base.count("seed") ? base.at("seed") : Rational(0);
      for (std::size_t r = 0; r < repeat; ++r) {
        FamilyArgs a = base;
        if (repeat > 1 || base.count("seed")) a["seed"] = seed0 + Rational(static_cast<std::int64_t>(r));
        try {
          generate_family(family, a);
        } catch (const Error& e) {
          throw InputError(path + ": " + e.what());
        }
        config.cases.push_back(BenchCase{family_label(family, a), family, std::move(a)});
      }
    }
  }
  return config;
}

/// Reference cost: the oracle when the instance is small enough, otherwise
/// the cheapest constructed witness.
inline std::optional<Cost> reference_cost(const Instance& instance, std::size_t oracle_limit) {
  if (instance.size() <= oracle_limit) {
    try {
      return brute_force_opt(instance, oracle_limit).cost;
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  }
  auto w = best_witness(instance);
  return w ? std::optional<Cost>(w->cost) : std::nullopt;
}

inline BenchRow bench_one(const std::string& label, const Instance& instance, const std::string& algo_spec,
                          const std::optional<Cost>& opt, bool record_time) {
  BenchRow row;
  row.instance = label;
  row.algorithm = algo_spec;
  row.n = instance.size();
  if (!instance.empty()) row.beta = min_slack(instance);
  row.opt = opt;
  auto algorithm = make_algorithm(algo_spec);
  if (auto* bd = dynamic_cast<BatchedDispatch*>(algorithm.get())) row.epsilon = bd->epsilon();
  auto t0 = std::chrono::steady_clock::now();
  try {
    RunReport report = run_online(*algorithm, instance);
    row.cost = report.cost;
    row.feasible = report.feasible();
    if (opt && *opt > 0) row.ratio = competitive_ratio(report.cost, *opt);
  } catch (const Error&) {
    row.feasible = false;
  }
  if (record_time) {
    row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return row;
}

/// Rows in (case, algorithm) order regardless of the worker count.
inline std::vector<BenchRow> run_bench(const BenchConfig& config) {
  const std::size_t per_case = config.algorithms.size();
  std::vector<BenchRow> rows(config.cases.size() * per_case);
  if (rows.empty()) return rows;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < config.cases.size(); c = next++) {
      const BenchCase& bc = config.cases[c];
      Instance instance = generate_family(bc.family, bc.args);
      std::optional<Cost> opt = reference_cost(instance, config.oracle_limit);
      for (std::size_t a = 0; a < per_case; ++a) {
        rows[c * per_case + a] = bench_one(bc.label, instance, config.algorithms[a], opt, config.record_time);
      }
    }
  };
  std::size_t threads = std::min(config.workers, config.cases.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  return rows;
}

}  // namespace cloudsched
