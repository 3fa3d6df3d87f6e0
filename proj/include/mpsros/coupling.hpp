#ifndef MPSROS_COUPLING_HPP
#define MPSROS_COUPLING_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "mpsros/model.hpp"
#include "mpsros/stats.hpp"

namespace mpsros {

/// One MPS customer and one waiting MROS customer sharing class and queue
/// position. Pair ids are shared: the MPS member and MROS member of pair k
/// both carry id k.
struct CoupledPair {
  std::uint64_t mps_customer_id = 0;
  std::uint64_t mros_customer_id = 0;
  std::size_t class_index = 0;
  std::size_t pair_position = 0;
  bool tagged = false;
};

struct CoupledRunResult {
  double tagged_sojourn = 0.0;
  double tagged_waiting = 0.0;
  std::uint64_t completion_epochs = 0;
  std::uint64_t seed = 0;
};

/// View of both systems after an event, for invariant checks.
struct CouplingSnapshot {
  double clock = 0.0;
  /// MPS per-class FIFOs of customer ids.
  std::vector<std::vector<std::uint64_t>> mps_queues;
  /// MROS per-class FIFOs of waiting customer ids.
  std::vector<std::vector<std::uint64_t>> mros_waiting;
  StateVector pair_counts;
};

struct CouplingOptions {
  std::uint64_t epoch_cap = 1'000'000'000ULL;
  std::function<void(const CouplingSnapshot&)> observer;
};

/// Drives MPS(alpha, n) and MROS(alpha, n) on one probability space until the
/// tagged pair is selected at a completion epoch. Throws std::runtime_error
/// if the epoch cap is hit and std::invalid_argument on bad inputs.
CoupledRunResult run_coupled(const SystemConfig& config, const StateVector& initial,
                             std::size_t tagged_class, std::uint64_t seed,
                             const CouplingOptions& options = {});

struct ConditionalLawReport {
  std::vector<CoupledRunResult> coupled_runs;
  std::vector<double> uncoupled_sojourn;
  std::vector<double> uncoupled_waiting;
  KsResult sojourn_ks;
  KsResult waiting_ks;
  bool all_equal = false;
  bool passed() const { return all_equal && sojourn_ks.passed && waiting_ks.passed; }
};

/// Compares the coupled tagged times with the uncoupled engines started from
/// the same state: the reference MPS engine for the sojourn, the MROS engine
/// for the waiting time. Replications run on `threads` workers; results do
/// not depend on the worker count.
ConditionalLawReport conditional_law_check(const SystemConfig& config,
                                           const StateVector& initial,
                                           std::size_t tagged_class,
                                           std::uint64_t replications, std::uint64_t seed,
                                           double alpha = 0.01, unsigned threads = 0);

}  // namespace mpsros

#endif  // MPSROS_COUPLING_HPP
