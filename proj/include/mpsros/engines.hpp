#ifndef MPSROS_ENGINES_HPP
#define MPSROS_ENGINES_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "mpsros/model.hpp"
#include "mpsros/rng.hpp"

namespace mpsros {

using CustomerId = std::uint64_t;

struct CustomerRecord {
  CustomerId id = 0;
  std::size_t class_index = 0;
  double arrival_epoch = 0.0;
  std::optional<double> service_start_epoch;
  std::optional<double> departure_epoch;
  /// Present at clock 0 to realize a prescribed initial state; never sampled.
  bool initial = false;
};

struct QueueSnapshot {
  double clock = 0.0;
  /// Per-class FIFO order, head first. For MROS these are waiting customers.
  std::vector<std::vector<CustomerId>> queues;
  /// MPS: customers per class currently receiving service.
  std::vector<std::uint32_t> in_service_counts;
  /// MROS: the customer holding the server, if any.
  std::optional<CustomerId> in_service_id;
  /// Engine's own bookkeeping of n (MPS: all present, MROS: waiting only).
  StateVector tracked_state;
};

using SnapshotObserver = std::function<void(const QueueSnapshot&)>;

struct SimulationOptions {
  /// Departures (MPS) or service starts (MROS) to process, warmup included.
  std::uint64_t num_events = 0;
  std::uint64_t warmup = 0;
  /// Keep every stride-th post-warmup sample.
  std::uint64_t stride = 1;
  std::uint64_t seed = 0;
  /// Called after every event when set. Intended for invariant checks.
  SnapshotObserver observer;
};

struct SimulationResult {
  /// Per class: sojourn times (MPS) or waiting times (MROS).
  std::vector<std::vector<double>> samples;
  std::uint64_t customers_generated = 0;
  std::uint64_t warmup_discarded = 0;
  std::uint64_t seed = 0;
  /// Post-warmup Poisson arrivals, and how many of them found the server busy.
  std::uint64_t arrivals_observed = 0;
  std::uint64_t arrivals_found_busy = 0;
  double final_clock = 0.0;

  double busy_fraction() const;
  std::size_t total_samples() const;
};

/// MPS(alpha) driven by the aggregated jump chain: while the system is
/// non-empty the next event comes at rate total_arrival + mu, and a completion
/// picks class i with probability class_selection_weight and a customer
/// uniformly among the first beta_i of that class.
class MpsJumpEngine {
 public:
  MpsJumpEngine(const SystemConfig& config, const StateVector& initial, Rng rng);

  /// Appends a class-i customer at the current clock.
  CustomerId admit(std::size_t class_index);
  /// Processes one event; returns the departing customer on a departure.
  std::optional<CustomerRecord> step();

  double clock() const { return clock_; }
  const StateVector& state() const { return state_; }
  std::uint64_t arrivals() const { return arrivals_; }
  QueueSnapshot snapshot() const;

 private:
  struct Entry {
    CustomerId id;
    double arrival;
    bool initial;
  };

  CustomerId push(std::size_t class_index, bool initial);

  SystemConfig config_;
  Rng rng_;
  double clock_ = 0.0;
  CustomerId next_id_ = 0;
  std::uint64_t arrivals_ = 0;
  StateVector state_;
  std::vector<std::deque<Entry>> queues_;
  std::vector<double> weights_buffer_;
};

/// Reference MPS engine: every customer carries an exponential(mu) amount of
/// work that is depleted at its current share between events. No use is made
/// of memorylessness beyond the Poisson arrival stream.
class MpsResidualWorkEngine {
 public:
  MpsResidualWorkEngine(const SystemConfig& config, const StateVector& initial, Rng rng);

  CustomerId admit(std::size_t class_index);
  std::optional<CustomerRecord> step();

  double clock() const { return clock_; }
  const StateVector& state() const { return state_; }
  std::uint64_t arrivals() const { return arrivals_; }
  QueueSnapshot snapshot() const;

 private:
  struct Entry {
    CustomerId id;
    double arrival;
    double remaining_work;
    bool initial;
  };

  CustomerId push(std::size_t class_index, bool initial);

  SystemConfig config_;
  Rng rng_;
  double clock_ = 0.0;
  double next_arrival_ = 0.0;
  CustomerId next_id_ = 0;
  std::uint64_t arrivals_ = 0;
  StateVector state_;
  std::vector<std::deque<Entry>> queues_;
};

/// Single-server MROS(alpha). On completion the next customer is drawn from
/// the first beta_i waiting customers of each class with per-customer
/// probability weight_i / normalizer.
class MrosEngine {
 public:
  /// `initial_waiting` must be empty unless `busy` is set; a busy start puts
  /// one extra initial customer in service.
  MrosEngine(const SystemConfig& config, const StateVector& initial_waiting, bool busy,
             Rng rng);

  /// Arrival at the current clock without preemption.
  CustomerId admit(std::size_t class_index);
  /// Processes one event; returns the customer entering service, if any.
  std::optional<CustomerRecord> step();

  double clock() const { return clock_; }
  const StateVector& waiting_state() const { return waiting_; }
  bool busy() const { return in_service_.has_value(); }
  std::uint64_t arrivals() const { return arrivals_; }
  std::uint64_t arrivals_found_busy() const { return arrivals_found_busy_; }
  QueueSnapshot snapshot() const;

 private:
  struct Entry {
    CustomerId id;
    double arrival;
    bool initial;
  };

  CustomerRecord start_service(std::size_t class_index, const Entry& entry);

  SystemConfig config_;
  Rng rng_;
  double clock_ = 0.0;
  double next_arrival_ = 0.0;
  double next_completion_ = 0.0;
  CustomerId next_id_ = 0;
  std::uint64_t arrivals_ = 0;
  std::uint64_t arrivals_found_busy_ = 0;
  StateVector waiting_;
  std::vector<std::deque<Entry>> queues_;
  std::optional<Entry> in_service_;
  std::vector<double> weights_buffer_;
};

/// Stationary-run drivers. Throw std::invalid_argument unless
/// num_events > warmup and stride >= 1.
SimulationResult simulate_mps(const SystemConfig& config, const StateVector& initial,
                              const SimulationOptions& options);
SimulationResult simulate_mps_reference(const SystemConfig& config, const StateVector& initial,
                                        const SimulationOptions& options);
SimulationResult simulate_mros(const SystemConfig& config, const StateVector& initial,
                               const SimulationOptions& options);

/// Conditional experiments: a tagged class-i customer arrives at clock 0 to a
/// system holding `initial` (MPS: all present, MROS: waiting behind a busy
/// server). Return the tagged sojourn or waiting time.
inline constexpr std::uint64_t kDefaultEventCap = 1'000'000'000ULL;

double tagged_sojourn_mps(const SystemConfig& config, const StateVector& initial,
                          std::size_t tagged_class, Rng rng,
                          std::uint64_t event_cap = kDefaultEventCap);
double tagged_sojourn_mps_reference(const SystemConfig& config, const StateVector& initial,
                                    std::size_t tagged_class, Rng rng,
                                    std::uint64_t event_cap = kDefaultEventCap);
double tagged_waiting_mros(const SystemConfig& config, const StateVector& initial,
                           std::size_t tagged_class, Rng rng,
                           std::uint64_t event_cap = kDefaultEventCap);

}  // namespace mpsros

#endif  // MPSROS_ENGINES_HPP
