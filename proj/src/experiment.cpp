#include "mpsros/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mpsros/coupling.hpp"
#include "mpsros/ctmc.hpp"
#include "mpsros/engines.hpp"
#include "mpsros/parallel.hpp"
#include "mpsros/rng.hpp"
#include "mpsros/stats.hpp"

namespace mpsros {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Engine streams under the master seed.
constexpr std::uint64_t kMpsStream = 0;
constexpr std::uint64_t kMrosStream = 1;

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Cap parse_cap(const json& value) {
  if (value.is_string()) {
    std::string s = value.get<std::string>();
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "inf" || s == "infinity") return kUnbounded;
    throw ConfigError(fmt::format("invalid cap \"{}\": expected a positive integer or \"inf\"",
                                  value.get<std::string>()));
  }
  if (value.is_number_integer()) {
    const auto v = value.get<std::int64_t>();
    if (v < 0 || v > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError(fmt::format("invalid cap {}", v));
    }
    return static_cast<std::uint32_t>(v);
  }
  throw ConfigError("invalid cap: expected a positive integer or \"inf\"");
}

ordered_json cap_to_json(Cap cap) { return cap ? ordered_json(*cap) : ordered_json("inf"); }

template <typename T>
void read_if_present(const json& section, const char* key, T& target) {
  if (section.contains(key)) target = section.at(key).get<T>();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError(fmt::format("cannot open {} for writing", path.string()));
  out << content;
  if (!out) throw OutputError(fmt::format("failed writing {}", path.string()));
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

void prepare_out_dir(const ExperimentSpec& spec) {
  std::error_code ec;
  std::filesystem::create_directories(spec.out_dir, ec);
  if (ec) {
    throw OutputError(fmt::format("cannot create {}: {}", spec.out_dir.string(), ec.message()));
  }
}

StateVector initial_state(const ExperimentSpec& spec, std::size_t num_classes) {
  if (spec.initial.empty()) return StateVector(num_classes);
  return StateVector(spec.initial);
}

constexpr std::size_t kBatches = 100;

ordered_json mean_json(const std::vector<double>& samples, double confidence) {
  ordered_json j;
  j["samples"] = samples.size();
  if (samples.size() < 2) {
    j["mean"] = nullptr;
    j["standard_error"] = nullptr;
    j["ci_halfwidth"] = nullptr;
    return j;
  }
  const MeanEstimate est = mean_with_ci(samples, confidence);
  j["mean"] = est.mean;
  j["standard_error"] = est.standard_error;
  j["ci_halfwidth"] = est.halfwidth;
  if (samples.size() >= 2 * kBatches) {
    const MeanEstimate batched = batch_mean_with_ci(samples, kBatches, confidence);
    j["batch_standard_error"] = batched.standard_error;
    j["batch_ci_halfwidth"] = batched.halfwidth;
  } else {
    j["batch_standard_error"] = nullptr;
    j["batch_ci_halfwidth"] = nullptr;
  }
  return j;
}

ordered_json ks_json(const KsResult& ks) {
  ordered_json j;
  j["statistic"] = ks.statistic;
  j["critical_value"] = ks.critical_value;
  j["p_value"] = ks.p_value;
  j["passed"] = ks.passed;
  return j;
}

ordered_json solution_json(const StationaryDistribution& d) {
  ordered_json j;
  j["states"] = d.probabilities.size();
  j["iterations"] = d.iterations;
  j["residual"] = d.residual;
  j["truncation_mass"] = d.truncation_mass;
  return j;
}

SimulationOptions engine_options(const ExperimentSpec& spec, std::uint64_t stream) {
  SimulationOptions options;
  options.num_events = spec.customers;
  options.warmup = spec.warmup;
  options.stride = spec.stride;
  options.seed = Rng::derive_seed(*spec.seed, stream);
  return options;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spec handling

ExperimentSpec spec_from_json(const json& document) {
  ExperimentSpec spec;
  try {
    if (!document.is_object() || !document.contains("system")) {
      throw ConfigError("config must be an object with a \"system\" section");
    }
    const json& system = document.at("system");
    spec.system.arrival_rates = system.at("lambda").get<std::vector<double>>();
    spec.system.weights = system.at("p").get<std::vector<double>>();
    spec.system.service_rate = system.at("mu").get<double>();
    spec.system.caps.clear();
    if (system.contains("alpha")) {
      for (const auto& a : system.at("alpha")) spec.system.caps.push_back(parse_cap(a));
    } else {
      spec.system.caps.assign(spec.system.arrival_rates.size(), kUnbounded);
    }
    if (system.contains("N") &&
        system.at("N").get<std::size_t>() != spec.system.arrival_rates.size()) {
      throw ConfigError("system.N does not match the length of system.lambda");
    }

    if (document.contains("run")) {
      const json& run = document.at("run");
      read_if_present(run, "truncation", spec.truncation);
      read_if_present(run, "tol", spec.tolerance);
      read_if_present(run, "lemma_tolerance", spec.lemma_tolerance);
      read_if_present(run, "max_iterations", spec.max_iterations);
      read_if_present(run, "customers", spec.customers);
      read_if_present(run, "warmup", spec.warmup);
      read_if_present(run, "stride", spec.stride);
      read_if_present(run, "confidence", spec.confidence);
      read_if_present(run, "delta", spec.delta);
      read_if_present(run, "slack", spec.slack);
      read_if_present(run, "grid_size", spec.grid_size);
      read_if_present(run, "replications", spec.replications);
      read_if_present(run, "ks_alpha", spec.ks_alpha);
      read_if_present(run, "initial", spec.initial);
      read_if_present(run, "class", spec.tagged_class);
      read_if_present(run, "policy", spec.policy);
      if (run.contains("seed")) spec.seed = run.at("seed").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  return spec;
}

ordered_json spec_to_json(const ExperimentSpec& spec) {
  ordered_json system;
  system["N"] = spec.system.arrival_rates.size();
  system["lambda"] = spec.system.arrival_rates;
  system["p"] = spec.system.weights;
  ordered_json caps = ordered_json::array();
  for (Cap c : spec.system.caps) caps.push_back(cap_to_json(c));
  system["alpha"] = caps;
  system["mu"] = spec.system.service_rate;

  ordered_json run;
  run["truncation"] = spec.truncation;
  run["tol"] = spec.tolerance;
  run["lemma_tolerance"] = spec.lemma_tolerance;
  run["max_iterations"] = spec.max_iterations;
  run["customers"] = spec.customers;
  run["warmup"] = spec.warmup;
  run["stride"] = spec.stride;
  run["confidence"] = spec.confidence;
  run["delta"] = spec.delta;
  run["slack"] = spec.slack;
  run["grid_size"] = spec.grid_size;
  run["replications"] = spec.replications;
  run["ks_alpha"] = spec.ks_alpha;
  std::vector<std::uint32_t> initial = spec.initial;
  if (initial.empty()) initial.assign(spec.system.arrival_rates.size(), 0);
  run["initial"] = initial;
  run["class"] = spec.tagged_class;
  run["policy"] = spec.policy;
  run["seed"] = spec.seed ? ordered_json(*spec.seed) : ordered_json(nullptr);

  ordered_json doc;
  doc["system"] = system;
  doc["run"] = run;
  return doc;
}

SystemConfig resolve_system(const ExperimentSpec& spec) {
  SystemConfig config = SystemConfig::validate(spec.system);
  const std::size_t n = config.num_classes();
  if (!spec.seed) throw ConfigError("a seed is required (--seed or run.seed)");
  if (spec.truncation == 0) throw ConfigError("truncation must be at least 1");
  if (!(spec.tolerance > 0.0)) throw ConfigError("tol must be positive");
  if (!(spec.lemma_tolerance > 0.0)) throw ConfigError("lemma_tolerance must be positive");
  if (spec.max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (spec.customers == 0) throw ConfigError("customers must be positive");
  if (spec.customers <= spec.warmup) throw ConfigError("customers must exceed warmup");
  if (spec.stride == 0) throw ConfigError("stride must be at least 1");
  if (!(spec.confidence > 0.0 && spec.confidence < 1.0)) {
    throw ConfigError("confidence must lie in (0, 1)");
  }
  if (!(spec.delta > 0.0 && spec.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(spec.slack >= 1.0)) throw ConfigError("slack must be at least 1");
  if (spec.grid_size < 2) throw ConfigError("grid_size must be at least 2");
  if (!(spec.ks_alpha > 0.0 && spec.ks_alpha < 1.0)) {
    throw ConfigError("ks_alpha must lie in (0, 1)");
  }
  if (spec.tagged_class < 1 || spec.tagged_class > n) {
    throw ConfigError(fmt::format("class must lie in 1..{}", n));
  }
  if (!spec.initial.empty() && spec.initial.size() != n) {
    throw ConfigError(fmt::format("initial state needs {} entries", n));
  }
  if (spec.policy != "mps" && spec.policy != "mros") {
    throw ConfigError(fmt::format("unknown policy \"{}\" (expected mps or mros)", spec.policy));
  }
  return config;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_solve(const ExperimentSpec& spec, std::ostream& log) {
  const SystemConfig config = resolve_system(spec);
  prepare_out_dir(spec);

  SolverOptions options;
  options.tolerance = spec.tolerance;
  options.max_iterations = spec.max_iterations;
  const LemmaReport report = verify_lemma(config, spec.truncation, options);

  const TruncatedStateSpace mps_space(config.num_classes(), spec.truncation, false);
  const TruncatedStateSpace mros_space(config.num_classes(), spec.truncation, true);
  std::ostringstream mps_csv;
  std::ostringstream mros_csv;
  write_distribution_csv(mps_csv, mps_space, report.mps);
  write_distribution_csv(mros_csv, mros_space, report.mros);
  write_text(spec.out_dir / "mps_distribution.csv", mps_csv.str());
  write_text(spec.out_dir / "mros_distribution.csv", mros_csv.str());

  const bool passed = report.lemma_residual <= spec.lemma_tolerance;
  ordered_json summary;
  summary["command"] = "solve";
  summary["spec"] = spec_to_json(spec);
  summary["rho"] = report.rho;
  summary["truncation"] = report.truncation;
  summary["interior_limit"] = report.interior_limit;
  summary["lemma_residual"] = report.lemma_residual;
  summary["idle_residual"] = report.idle_residual;
  summary["geometric_residual"] = report.geometric_residual;
  summary["substitution_residual"] = report.substitution_residual;
  summary["mps"] = solution_json(report.mps);
  summary["mros"] = solution_json(report.mros);
  summary["passed"] = passed;
  write_json(spec.out_dir / "solve_summary.json", summary);

  log << fmt::format("solve: lemma residual {:.3e} (tolerance {:.1e}), idle residual {:.3e} -> {}\n",
                     report.lemma_residual, spec.lemma_tolerance, report.idle_residual,
                     passed ? "pass" : "FAIL");
  return passed ? kExitPass : kExitCheckFailed;
}

int cmd_simulate(const ExperimentSpec& spec, std::ostream& log) {
  const SystemConfig config = resolve_system(spec);
  prepare_out_dir(spec);
  const StateVector initial = initial_state(spec, config.num_classes());
  const bool mps = spec.policy == "mps";
  const SimulationResult result =
      mps ? simulate_mps(config, initial, engine_options(spec, kMpsStream))
          : simulate_mros(config, initial, engine_options(spec, kMrosStream));

  std::string csv = "class,value\n";
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    for (double v : result.samples[i]) csv += fmt::format("{},{}\n", i + 1, v);
  }
  write_text(spec.out_dir / fmt::format("{}_samples.csv", spec.policy), csv);

  ordered_json summary;
  summary["command"] = "simulate";
  summary["spec"] = spec_to_json(spec);
  summary["policy"] = spec.policy;
  summary["quantity"] = mps ? "sojourn" : "waiting";
  summary["engine_seed"] = result.seed;
  summary["customers_generated"] = result.customers_generated;
  summary["warmup_discarded"] = result.warmup_discarded;
  summary["final_clock"] = result.final_clock;
  ordered_json classes = ordered_json::array();
  std::vector<double> pooled;
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    ordered_json c = mean_json(result.samples[i], spec.confidence);
    c["class"] = i + 1;
    classes.push_back(c);
    pooled.insert(pooled.end(), result.samples[i].begin(), result.samples[i].end());
  }
  summary["classes"] = classes;
  summary["overall"] = mean_json(pooled, spec.confidence);
  if (!mps) {
    summary["arrivals_observed"] = result.arrivals_observed;
    summary["busy_fraction"] = result.busy_fraction();
  }
  write_json(spec.out_dir / fmt::format("{}_summary.json", spec.policy), summary);

  log << fmt::format("simulate {}: {} samples over {} customers\n", spec.policy,
                     result.total_samples(), result.customers_generated);
  return kExitPass;
}

int cmd_compare(const ExperimentSpec& spec, std::ostream& log) {
  const SystemConfig config = resolve_system(spec);
  prepare_out_dir(spec);
  const StateVector initial = initial_state(spec, config.num_classes());

  SimulationResult sojourn;
  SimulationResult waiting;
  parallel_for(2, spec.threads, [&](std::uint64_t task) {
    if (task == 0) {
      sojourn = simulate_mps(config, initial, engine_options(spec, kMpsStream));
    } else {
      waiting = simulate_mros(config, initial, engine_options(spec, kMrosStream));
    }
  });

  const double rho = config.load();
  std::string csv = "class,t,scaled_sojourn_tail,waiting_tail,discrepancy\n";
  ordered_json classes = ordered_json::array();
  bool all_passed = true;
  for (std::size_t i = 0; i < config.num_classes(); ++i) {
    if (sojourn.samples[i].empty() || waiting.samples[i].empty()) {
      throw ConfigError(fmt::format("class {} received no samples; increase customers", i + 1));
    }
    const auto s_tail = EmpiricalTail::from_samples(sojourn.samples[i]);
    const auto w_tail = EmpiricalTail::from_samples(waiting.samples[i]);
    const TailComparisonReport report = theorem_check(
        s_tail, w_tail, rho, spec.delta, spec.slack, static_cast<std::size_t>(spec.grid_size));
    for (std::size_t k = 0; k < report.grid.size(); ++k) {
      csv += fmt::format("{},{},{},{},{}\n", i + 1, report.grid[k], report.scaled_sojourn_tail[k],
                         report.waiting_tail[k], report.discrepancy[k]);
    }

    std::vector<double> positive_flags;
    positive_flags.reserve(waiting.samples[i].size());
    for (double w : waiting.samples[i]) positive_flags.push_back(w > 0.0 ? 1.0 : 0.0);
    const double positive = w_tail.survival(0.0);
    const double se = positive_flags.size() >= 2 * kBatches
                          ? batch_mean_with_ci(positive_flags, kBatches).standard_error
                          : std::sqrt(rho * (1.0 - rho) / static_cast<double>(w_tail.size()));

    ordered_json c;
    c["class"] = i + 1;
    c["sojourn_samples"] = s_tail.size();
    c["waiting_samples"] = w_tail.size();
    c["sup_discrepancy"] = report.sup_discrepancy;
    c["threshold"] = report.threshold;
    c["passed"] = report.passed;
    c["waiting_positive_fraction"] = positive;
    c["waiting_positive_standard_error"] = se;
    c["waiting_positive_within_3se"] = std::abs(positive - rho) <= 3.0 * se;
    classes.push_back(c);
    all_passed = all_passed && report.passed;

    log << fmt::format("compare class {}: sup |rho*S - W| = {:.4f}, threshold {:.4f} -> {}\n",
                       i + 1, report.sup_discrepancy, report.threshold,
                       report.passed ? "pass" : "FAIL");
  }
  write_text(spec.out_dir / "compare_tails.csv", csv);

  ordered_json summary;
  summary["command"] = "compare";
  summary["spec"] = spec_to_json(spec);
  summary["rho"] = rho;
  summary["mps_seed"] = sojourn.seed;
  summary["mros_seed"] = waiting.seed;
  summary["busy_fraction"] = waiting.busy_fraction();
  summary["classes"] = classes;
  summary["passed"] = all_passed;
  write_json(spec.out_dir / "compare_summary.json", summary);
  return all_passed ? kExitPass : kExitCheckFailed;
}

int cmd_couple(const ExperimentSpec& spec, std::ostream& log) {
  const SystemConfig config = resolve_system(spec);
  if (spec.replications < 2) {
    throw ConfigError("couple needs at least two replications");
  }
  prepare_out_dir(spec);
  const StateVector initial = initial_state(spec, config.num_classes());
  const std::size_t tagged = static_cast<std::size_t>(spec.tagged_class - 1);

  const ConditionalLawReport report = conditional_law_check(
      config, initial, tagged, spec.replications, *spec.seed, spec.ks_alpha, spec.threads);

  std::string csv = "replication,sojourn,waiting,completion_epochs\n";
  std::uint64_t mismatches = 0;
  for (std::size_t r = 0; r < report.coupled_runs.size(); ++r) {
    const auto& run = report.coupled_runs[r];
    if (run.tagged_sojourn != run.tagged_waiting) ++mismatches;
    csv += fmt::format("{},{},{},{}\n", r, run.tagged_sojourn, run.tagged_waiting,
                       run.completion_epochs);
  }
  write_text(spec.out_dir / "couple_runs.csv", csv);

  std::vector<double> coupled;
  for (const auto& run : report.coupled_runs) coupled.push_back(run.tagged_sojourn);

  ordered_json summary;
  summary["command"] = "couple";
  summary["spec"] = spec_to_json(spec);
  summary["replications"] = spec.replications;
  summary["mismatches"] = mismatches;
  summary["all_equal"] = report.all_equal;
  summary["coupled"] = mean_json(coupled, spec.confidence);
  summary["uncoupled_sojourn"] = mean_json(report.uncoupled_sojourn, spec.confidence);
  summary["uncoupled_waiting"] = mean_json(report.uncoupled_waiting, spec.confidence);
  summary["sojourn_ks"] = ks_json(report.sojourn_ks);
  summary["waiting_ks"] = ks_json(report.waiting_ks);
  summary["passed"] = report.passed();
  write_json(spec.out_dir / "couple_summary.json", summary);

  log << fmt::format("couple: {} runs, {} mismatches, KS sojourn D={:.4f} waiting D={:.4f} "
                     "(critical {:.4f}) -> {}\n",
                     spec.replications, mismatches, report.sojourn_ks.statistic,
                     report.waiting_ks.statistic, report.sojourn_ks.critical_value,
                     report.passed() ? "pass" : "FAIL");
  return report.passed() ? kExitPass : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::uint32_t> truncation;
  std::optional<double> tolerance;
  std::optional<std::uint64_t> customers;
  std::optional<std::uint64_t> warmup;
  std::optional<std::uint64_t> stride;
  std::optional<double> delta;
  std::optional<double> slack;
  std::optional<std::uint64_t> replications;
  std::optional<std::string> policy;
  std::optional<std::string> initial;
  std::optional<std::uint64_t> tagged_class;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment file")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out-dir", o.out_dir, "output directory (default ./results)");
  cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores");
}

std::vector<std::uint32_t> parse_initial(const std::string& text) {
  std::vector<std::uint32_t> counts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      counts.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("invalid --initial entry \"{}\"", item));
    }
  }
  return counts;
}

ExperimentSpec load_spec(const Overrides& o) {
  std::ifstream in(o.config_path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", o.config_path));
  json document;
  try {
    document = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config {}: {}", o.config_path, e.what()));
  }
  ExperimentSpec spec = spec_from_json(document);
  if (o.seed) spec.seed = *o.seed;
  if (o.out_dir) spec.out_dir = *o.out_dir;
  if (o.threads) spec.threads = *o.threads;
  if (o.truncation) spec.truncation = *o.truncation;
  if (o.tolerance) spec.tolerance = *o.tolerance;
  if (o.customers) spec.customers = *o.customers;
  if (o.warmup) spec.warmup = *o.warmup;
  if (o.stride) spec.stride = *o.stride;
  if (o.delta) spec.delta = *o.delta;
  if (o.slack) spec.slack = *o.slack;
  if (o.replications) spec.replications = *o.replications;
  if (o.policy) spec.policy = *o.policy;
  if (o.initial) spec.initial = parse_initial(*o.initial);
  if (o.tagged_class) spec.tagged_class = *o.tagged_class;
  return spec;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiclass processor-sharing / random-order-service experiments"};
  app.require_subcommand(1);
  Overrides o;

  auto* solve = app.add_subcommand("solve", "exact truncated-chain comparison");
  add_common(solve, o);
  solve->add_option("--truncation", o.truncation, "maximum total customers K");
  solve->add_option("--tol", o.tolerance, "solver residual tolerance");

  auto* simulate = app.add_subcommand("simulate", "run one engine");
  add_common(simulate, o);
  simulate->add_option("--policy", o.policy, "mps or mros");
  simulate->add_option("--customers", o.customers, "departures / service starts, incl. warmup");
  simulate->add_option("--warmup", o.warmup, "events discarded before sampling");
  simulate->add_option("--stride", o.stride, "keep every k-th sample");
  simulate->add_option("--initial", o.initial, "initial counts n1,n2,...");

  auto* compare = app.add_subcommand("compare", "tail comparison of both engines");
  add_common(compare, o);
  compare->add_option("--customers", o.customers, "events per engine, incl. warmup");
  compare->add_option("--warmup", o.warmup, "events discarded before sampling");
  compare->add_option("--stride", o.stride, "keep every k-th sample");
  compare->add_option("--delta", o.delta, "DKW confidence parameter");
  compare->add_option("--slack", o.slack, "threshold multiplier");

  auto* couple = app.add_subcommand("couple", "coupled tagged-customer runs");
  add_common(couple, o);
  couple->add_option("--replications", o.replications, "number of coupled runs");
  couple->add_option("--initial", o.initial, "initial counts n1,n2,...");
  couple->add_option("--class", o.tagged_class, "tagged class (1-based)");

  std::vector<const char*> argv{"mpsros_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
  }

  try {
    const ExperimentSpec spec = load_spec(o);
    if (solve->parsed()) return cmd_solve(spec, out);
    if (simulate->parsed()) return cmd_simulate(spec, out);
    if (compare->parsed()) return cmd_compare(spec, out);
    return cmd_couple(spec, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace mpsros
