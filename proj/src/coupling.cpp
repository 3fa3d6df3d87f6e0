#include "mpsros/coupling.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include <fmt/format.h>

#include "mpsros/engines.hpp"
#include "mpsros/parallel.hpp"
#include "mpsros/rng.hpp"

namespace mpsros {
namespace {

// Stream indices under the master seed of conditional_law_check.
constexpr std::uint64_t kCoupledStream = 0;
constexpr std::uint64_t kSojournStream = 1;
constexpr std::uint64_t kWaitingStream = 2;

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t rep) {
  return Rng::derive_seed(Rng::derive_seed(master, stream), rep);
}

// Both systems keep their own queues of customer ids; pair k is the MPS
// customer k and the waiting MROS customer k.
struct CoupledSystems {
  std::vector<std::deque<std::uint64_t>> mps;
  std::vector<std::deque<std::uint64_t>> mros_waiting;
  StateVector pairs;

  explicit CoupledSystems(std::size_t n) : mps(n), mros_waiting(n), pairs(n) {}

  void add_pair(std::size_t cls, std::uint64_t id) {
    mps[cls].push_back(id);
    mros_waiting[cls].push_back(id);
    pairs.increment(cls);
  }

  CouplingSnapshot snapshot(double clock) const {
    CouplingSnapshot snap;
    snap.clock = clock;
    for (const auto& q : mps) snap.mps_queues.emplace_back(q.begin(), q.end());
    for (const auto& q : mros_waiting) snap.mros_waiting.emplace_back(q.begin(), q.end());
    snap.pair_counts = pairs;
    return snap;
  }
};

}  // namespace

CoupledRunResult run_coupled(const SystemConfig& config, const StateVector& initial,
                             std::size_t tagged_class, std::uint64_t seed,
                             const CouplingOptions& options) {
  const std::size_t n = config.num_classes();
  if (initial.num_classes() != n) {
    throw std::invalid_argument(fmt::format("initial state has {} classes, config has {}",
                                            initial.num_classes(), n));
  }
  if (tagged_class >= n) {
    throw std::invalid_argument(
        fmt::format("tagged class {} out of range (N = {})", tagged_class + 1, n));
  }

  Rng rng(seed);
  CoupledSystems systems(n);
  std::uint64_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint32_t k = 0; k < initial[i]; ++k) systems.add_pair(i, next_id++);
  }
  const std::uint64_t tagged = next_id++;
  systems.add_pair(tagged_class, tagged);

  // The unpaired MROS customer in service at clock 0 is implicit: the first
  // completion gap is its residual service time.
  double clock = 0.0;
  double next_arrival = rng.exponential(config.total_arrival_rate());
  double next_completion = rng.exponential(config.service_rate());
  std::vector<double> masses(n);

  CoupledRunResult result;
  result.seed = seed;
  if (options.observer) options.observer(systems.snapshot(clock));

  while (result.completion_epochs < options.epoch_cap) {
    if (next_arrival < next_completion) {
      clock = next_arrival;
      systems.add_pair(rng.categorical(config.arrival_rates()), next_id++);
      next_arrival = clock + rng.exponential(config.total_arrival_rate());
      if (options.observer) options.observer(systems.snapshot(clock));
      continue;
    }

    clock = next_completion;
    next_completion = clock + rng.exponential(config.service_rate());
    ++result.completion_epochs;
    if (systems.pairs.empty()) continue;  // no pair event; the gap is consumed

    const ServiceProfile profile = beta(systems.pairs, config);
    for (std::size_t i = 0; i < n; ++i) masses[i] = config.weight(i) * profile.beta[i];
    const std::size_t cls = rng.categorical(masses);
    const auto pos = static_cast<std::ptrdiff_t>(rng.index(profile.beta[cls]));

    auto& mps_queue = systems.mps[cls];
    auto& mros_queue = systems.mros_waiting[cls];
    const std::uint64_t mps_id = mps_queue[pos];
    const std::uint64_t mros_id = mros_queue[pos];
    if (mps_id != mros_id) {
      throw std::logic_error("coupled customers lost their common queue position");
    }
    // MPS member departs; MROS member is taken into service.
    mps_queue.erase(mps_queue.begin() + pos);
    const double mps_departure = clock;
    mros_queue.erase(mros_queue.begin() + pos);
    const double mros_service_start = clock;
    systems.pairs.decrement(cls);
    if (options.observer) options.observer(systems.snapshot(clock));

    if (mps_id == tagged) {
      result.tagged_sojourn = mps_departure;
      result.tagged_waiting = mros_service_start;
      return result;
    }
  }
  throw std::runtime_error(
      fmt::format("coupled run exceeded the epoch cap of {}", options.epoch_cap));
}

ConditionalLawReport conditional_law_check(const SystemConfig& config,
                                           const StateVector& initial,
                                           std::size_t tagged_class,
                                           std::uint64_t replications, std::uint64_t seed,
                                           double alpha, unsigned threads) {
  if (replications < 2) {
    throw std::invalid_argument("conditional_law_check: need at least two replications");
  }
  if (tagged_class >= config.num_classes()) {
    throw std::invalid_argument(fmt::format("tagged class {} out of range (N = {})",
                                            tagged_class + 1, config.num_classes()));
  }

  ConditionalLawReport report;
  report.coupled_runs.resize(replications);
  report.uncoupled_sojourn.resize(replications);
  report.uncoupled_waiting.resize(replications);

  parallel_for(replications, threads, [&](std::uint64_t r) {
    report.coupled_runs[r] =
        run_coupled(config, initial, tagged_class, replication_seed(seed, kCoupledStream, r));
    report.uncoupled_sojourn[r] = tagged_sojourn_mps_reference(
        config, initial, tagged_class, Rng(replication_seed(seed, kSojournStream, r)));
    report.uncoupled_waiting[r] = tagged_waiting_mros(
        config, initial, tagged_class, Rng(replication_seed(seed, kWaitingStream, r)));
  });

  std::vector<double> coupled_sojourn;
  std::vector<double> coupled_waiting;
  coupled_sojourn.reserve(replications);
  coupled_waiting.reserve(replications);
  report.all_equal = true;
  for (const auto& run : report.coupled_runs) {
    coupled_sojourn.push_back(run.tagged_sojourn);
    coupled_waiting.push_back(run.tagged_waiting);
    report.all_equal = report.all_equal && run.tagged_sojourn == run.tagged_waiting;
  }

  report.sojourn_ks = two_sample_ks(EmpiricalTail::from_samples(coupled_sojourn),
                                    EmpiricalTail::from_samples(report.uncoupled_sojourn), alpha);
  report.waiting_ks = two_sample_ks(EmpiricalTail::from_samples(coupled_waiting),
                                    EmpiricalTail::from_samples(report.uncoupled_waiting), alpha);
  return report;
}

}  // namespace mpsros
