#ifndef MPSROS_EXPERIMENT_HPP
#define MPSROS_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpsros/model.hpp"

namespace mpsros {

enum ExitCode : int {
  kExitPass = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitInternal = 3,
};

/// Everything a subcommand needs. Class indices in this struct are 1-based,
/// as in the config file and on the command line.
struct ExperimentSpec {
  RawConfig system;

  std::uint32_t truncation = 40;
  double tolerance = 1e-12;
  double lemma_tolerance = 1e-8;
  std::uint64_t max_iterations = 1'000'000;

  std::uint64_t customers = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t stride = 16;
  double confidence = 0.95;

  double delta = 0.01;
  double slack = 3.0;
  std::uint64_t grid_size = 200;

  std::uint64_t replications = 10'000;
  double ks_alpha = 0.01;
  std::vector<std::uint32_t> initial;  // empty means the empty state
  std::uint64_t tagged_class = 1;

  std::string policy = "mps";
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = "results";
  unsigned threads = 0;
};

/// Reads the `system` and `run` sections. Missing run keys keep defaults.
/// Throws ConfigError on malformed content.
ExperimentSpec spec_from_json(const nlohmann::json& document);

/// Fully resolved spec for provenance. Output location and thread count are
/// left out so summaries do not depend on where or how they were produced.
nlohmann::ordered_json spec_to_json(const ExperimentSpec& spec);

/// Checks knob ranges shared by all subcommands and returns the validated
/// system. Throws ConfigError.
SystemConfig resolve_system(const ExperimentSpec& spec);

int cmd_solve(const ExperimentSpec& spec, std::ostream& log);
int cmd_simulate(const ExperimentSpec& spec, std::ostream& log);
int cmd_compare(const ExperimentSpec& spec, std::ostream& log);
int cmd_couple(const ExperimentSpec& spec, std::ostream& log);

/// Full command-line entry point: parses flags, loads the config, dispatches
/// and maps errors to exit codes.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpsros

#endif  // MPSROS_EXPERIMENT_HPP
