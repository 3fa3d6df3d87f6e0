#include "mpsros/engines.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace mpsros {
namespace {

std::uint32_t capped(std::uint32_t n, Cap cap) { return cap ? std::min(n, *cap) : n; }

// Fills `weights` with class_selection_weight for every class (unnormalized:
// weight_i * beta_i) and returns their sum.
double selection_masses(const SystemConfig& config, const StateVector& state,
                        std::vector<double>& weights) {
  weights.resize(state.num_classes());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = config.weight(i) * capped(state[i], config.cap(i));
    total += weights[i];
  }
  return total;
}

void check_initial(const SystemConfig& config, const StateVector& initial) {
  if (initial.num_classes() != config.num_classes()) {
    throw std::invalid_argument(fmt::format("initial state has {} classes, config has {}",
                                            initial.num_classes(), config.num_classes()));
  }
}

void check_class(const SystemConfig& config, std::size_t class_index) {
  if (class_index >= config.num_classes()) {
    throw std::invalid_argument(fmt::format("class index {} out of range (N = {})",
                                            class_index + 1, config.num_classes()));
  }
}

void check_options(const SimulationOptions& options) {
  if (options.num_events == 0) {
    throw std::invalid_argument("simulation needs at least one event");
  }
  if (options.num_events <= options.warmup) {
    throw std::invalid_argument("number of events must exceed warmup");
  }
  if (options.stride == 0) {
    throw std::invalid_argument("stride must be at least 1");
  }
}

template <typename Queues>
std::vector<std::vector<CustomerId>> queue_ids(const Queues& queues) {
  std::vector<std::vector<CustomerId>> ids(queues.size());
  for (std::size_t i = 0; i < queues.size(); ++i) {
    for (const auto& e : queues[i]) ids[i].push_back(e.id);
  }
  return ids;
}

// Keeps every stride-th post-warmup sample of non-initial customers.
class SampleSink {
 public:
  SampleSink(std::size_t num_classes, const SimulationOptions& options)
      : options_(options), samples_(num_classes) {}

  void record(const CustomerRecord& record, double value) {
    ++events_;
    if (events_ <= options_.warmup) return;
    if (record.initial) return;
    if (eligible_++ % options_.stride == 0) {
      samples_[record.class_index].push_back(value);
    }
  }

  bool warm() const { return events_ >= options_.warmup; }
  bool done() const { return events_ >= options_.num_events; }
  std::uint64_t events() const { return events_; }
  std::vector<std::vector<double>> take() { return std::move(samples_); }

 private:
  const SimulationOptions& options_;
  std::vector<std::vector<double>> samples_;
  std::uint64_t events_ = 0;
  std::uint64_t eligible_ = 0;
};

template <typename Engine>
SimulationResult run_mps(Engine& engine, std::size_t num_classes,
                         const SimulationOptions& options) {
  SampleSink sink(num_classes, options);
  while (!sink.done()) {
    auto departed = engine.step();
    if (departed) {
      sink.record(*departed, *departed->departure_epoch - departed->arrival_epoch);
    }
    if (options.observer) options.observer(engine.snapshot());
  }
  SimulationResult result;
  result.samples = sink.take();
  result.customers_generated = engine.arrivals();
  result.warmup_discarded = options.warmup;
  result.seed = options.seed;
  result.final_clock = engine.clock();
  return result;
}

template <typename Engine>
double run_until_departure(Engine& engine, CustomerId tagged, std::uint64_t event_cap) {
  for (std::uint64_t events = 0; events < event_cap; ++events) {
    auto departed = engine.step();
    if (departed && departed->id == tagged) {
      return *departed->departure_epoch - departed->arrival_epoch;
    }
  }
  throw std::runtime_error("tagged customer did not leave within the event cap");
}

}  // namespace

double SimulationResult::busy_fraction() const {
  return arrivals_observed == 0
             ? 0.0
             : static_cast<double>(arrivals_found_busy) / static_cast<double>(arrivals_observed);
}

std::size_t SimulationResult::total_samples() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.size();
  return n;
}

// ---------------------------------------------------------------------------
// MpsJumpEngine

MpsJumpEngine::MpsJumpEngine(const SystemConfig& config, const StateVector& initial, Rng rng)
    : config_(config),
      rng_(std::move(rng)),
      state_(config.num_classes()),
      queues_(config.num_classes()) {
  check_initial(config, initial);
  for (std::size_t i = 0; i < initial.num_classes(); ++i) {
    for (std::uint32_t k = 0; k < initial[i]; ++k) push(i, true);
  }
}

CustomerId MpsJumpEngine::push(std::size_t class_index, bool initial) {
  const CustomerId id = next_id_++;
  queues_[class_index].push_back({id, clock_, initial});
  state_.increment(class_index);
  return id;
}

CustomerId MpsJumpEngine::admit(std::size_t class_index) {
  check_class(config_, class_index);
  return push(class_index, false);
}

std::optional<CustomerRecord> MpsJumpEngine::step() {
  const double arrival_rate = config_.total_arrival_rate();
  const double mu = config_.service_rate();
  bool arrival = true;
  if (state_.empty()) {
    clock_ += rng_.exponential(arrival_rate);
  } else {
    clock_ += rng_.exponential(arrival_rate + mu);
    arrival = rng_.uniform() * (arrival_rate + mu) < arrival_rate;
  }
  if (arrival) {
    push(rng_.categorical(config_.arrival_rates()), false);
    ++arrivals_;
    return std::nullopt;
  }
  selection_masses(config_, state_, weights_buffer_);
  const std::size_t cls = rng_.categorical(weights_buffer_);
  const std::uint32_t served = capped(state_[cls], config_.cap(cls));
  auto& queue = queues_[cls];
  const auto pos = static_cast<std::ptrdiff_t>(rng_.index(served));
  const Entry entry = queue[pos];
  queue.erase(queue.begin() + pos);
  state_.decrement(cls);

  CustomerRecord record;
  record.id = entry.id;
  record.class_index = cls;
  record.arrival_epoch = entry.arrival;
  record.departure_epoch = clock_;
  record.initial = entry.initial;
  return record;
}

QueueSnapshot MpsJumpEngine::snapshot() const {
  QueueSnapshot snap;
  snap.clock = clock_;
  snap.queues = queue_ids(queues_);
  snap.tracked_state = state_;
  snap.in_service_counts.resize(queues_.size());
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    snap.in_service_counts[i] = capped(state_[i], config_.cap(i));
  }
  return snap;
}

// ---------------------------------------------------------------------------
// MpsResidualWorkEngine

MpsResidualWorkEngine::MpsResidualWorkEngine(const SystemConfig& config,
                                             const StateVector& initial, Rng rng)
    : config_(config),
      rng_(std::move(rng)),
      state_(config.num_classes()),
      queues_(config.num_classes()) {
  check_initial(config, initial);
  for (std::size_t i = 0; i < initial.num_classes(); ++i) {
    for (std::uint32_t k = 0; k < initial[i]; ++k) push(i, true);
  }
  next_arrival_ = rng_.exponential(config_.total_arrival_rate());
}

CustomerId MpsResidualWorkEngine::push(std::size_t class_index, bool initial) {
  const CustomerId id = next_id_++;
  const double work = rng_.exponential(config_.service_rate());
  queues_[class_index].push_back({id, clock_, work, initial});
  state_.increment(class_index);
  return id;
}

CustomerId MpsResidualWorkEngine::admit(std::size_t class_index) {
  check_class(config_, class_index);
  return push(class_index, false);
}

std::optional<CustomerRecord> MpsResidualWorkEngine::step() {
  if (state_.empty()) {
    clock_ = next_arrival_;
    push(rng_.categorical(config_.arrival_rates()), false);
    ++arrivals_;
    next_arrival_ = clock_ + rng_.exponential(config_.total_arrival_rate());
    return std::nullopt;
  }

  const std::size_t n_classes = queues_.size();
  std::vector<std::uint32_t> served(n_classes);
  double normalizer = 0.0;
  for (std::size_t i = 0; i < n_classes; ++i) {
    served[i] = capped(state_[i], config_.cap(i));
    normalizer += config_.weight(i) * served[i];
  }

  // Earliest completion among in-service customers at current shares.
  double min_time = std::numeric_limits<double>::infinity();
  std::size_t min_class = 0;
  std::size_t min_pos = 0;
  for (std::size_t i = 0; i < n_classes; ++i) {
    const double share = config_.weight(i) / normalizer;
    for (std::size_t k = 0; k < served[i]; ++k) {
      const double t = queues_[i][k].remaining_work / share;
      if (t < min_time) {
        min_time = t;
        min_class = i;
        min_pos = k;
      }
    }
  }

  const bool arrival_first = next_arrival_ < clock_ + min_time;
  const double dt = arrival_first ? next_arrival_ - clock_ : min_time;
  for (std::size_t i = 0; i < n_classes; ++i) {
    const double depleted = dt * (config_.weight(i) / normalizer);
    for (std::size_t k = 0; k < served[i]; ++k) {
      auto& work = queues_[i][k].remaining_work;
      work = std::max(0.0, work - depleted);
    }
  }

  if (arrival_first) {
    clock_ = next_arrival_;
    push(rng_.categorical(config_.arrival_rates()), false);
    ++arrivals_;
    next_arrival_ = clock_ + rng_.exponential(config_.total_arrival_rate());
    return std::nullopt;
  }

  clock_ += min_time;
  auto& queue = queues_[min_class];
  const Entry entry = queue[min_pos];
  queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(min_pos));
  state_.decrement(min_class);

  CustomerRecord record;
  record.id = entry.id;
  record.class_index = min_class;
  record.arrival_epoch = entry.arrival;
  record.departure_epoch = clock_;
  record.initial = entry.initial;
  return record;
}

QueueSnapshot MpsResidualWorkEngine::snapshot() const {
  QueueSnapshot snap;
  snap.clock = clock_;
  snap.queues = queue_ids(queues_);
  snap.tracked_state = state_;
  snap.in_service_counts.resize(queues_.size());
  // Count customers that actually deplete work: the FIFO prefix of each class.
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    snap.in_service_counts[i] = capped(static_cast<std::uint32_t>(queues_[i].size()),
                                       config_.cap(i));
  }
  return snap;
}

// ---------------------------------------------------------------------------
// MrosEngine

MrosEngine::MrosEngine(const SystemConfig& config, const StateVector& initial_waiting,
                       bool busy, Rng rng)
    : config_(config),
      rng_(std::move(rng)),
      waiting_(config.num_classes()),
      queues_(config.num_classes()) {
  check_initial(config, initial_waiting);
  if (!busy && !initial_waiting.empty()) {
    throw std::invalid_argument("MROS cannot hold waiting customers with an idle server");
  }
  if (busy) {
    // Its class never matters; only the residual service time does.
    in_service_ = Entry{next_id_++, 0.0, true};
    next_completion_ = rng_.exponential(config_.service_rate());
  }
  for (std::size_t i = 0; i < initial_waiting.num_classes(); ++i) {
    for (std::uint32_t k = 0; k < initial_waiting[i]; ++k) {
      queues_[i].push_back({next_id_++, 0.0, true});
      waiting_.increment(i);
    }
  }
  next_arrival_ = rng_.exponential(config_.total_arrival_rate());
}

CustomerRecord MrosEngine::start_service(std::size_t class_index, const Entry& entry) {
  in_service_ = entry;
  next_completion_ = clock_ + rng_.exponential(config_.service_rate());
  CustomerRecord record;
  record.id = entry.id;
  record.class_index = class_index;
  record.arrival_epoch = entry.arrival;
  record.service_start_epoch = clock_;
  record.initial = entry.initial;
  return record;
}

CustomerId MrosEngine::admit(std::size_t class_index) {
  check_class(config_, class_index);
  const CustomerId id = next_id_++;
  if (busy()) {
    queues_[class_index].push_back({id, clock_, false});
    waiting_.increment(class_index);
  } else {
    start_service(class_index, {id, clock_, false});
  }
  return id;
}

std::optional<CustomerRecord> MrosEngine::step() {
  if (busy() && next_completion_ <= next_arrival_) {
    clock_ = next_completion_;
    in_service_.reset();
    if (waiting_.empty()) return std::nullopt;
    selection_masses(config_, waiting_, weights_buffer_);
    const std::size_t cls = rng_.categorical(weights_buffer_);
    const std::uint32_t eligible = capped(waiting_[cls], config_.cap(cls));
    auto& queue = queues_[cls];
    const auto pos = static_cast<std::ptrdiff_t>(rng_.index(eligible));
    const Entry entry = queue[pos];
    queue.erase(queue.begin() + pos);
    waiting_.decrement(cls);
    return start_service(cls, entry);
  }

  clock_ = next_arrival_;
  next_arrival_ = clock_ + rng_.exponential(config_.total_arrival_rate());
  const std::size_t cls = rng_.categorical(config_.arrival_rates());
  ++arrivals_;
  const Entry entry{next_id_++, clock_, false};
  if (busy()) {
    ++arrivals_found_busy_;
    queues_[cls].push_back(entry);
    waiting_.increment(cls);
    return std::nullopt;
  }
  return start_service(cls, entry);
}

QueueSnapshot MrosEngine::snapshot() const {
  QueueSnapshot snap;
  snap.clock = clock_;
  snap.queues = queue_ids(queues_);
  snap.tracked_state = waiting_;
  if (in_service_) snap.in_service_id = in_service_->id;
  return snap;
}

// ---------------------------------------------------------------------------
// Drivers

SimulationResult simulate_mps(const SystemConfig& config, const StateVector& initial,
                              const SimulationOptions& options) {
  check_options(options);
  MpsJumpEngine engine(config, initial, Rng(options.seed));
  return run_mps(engine, config.num_classes(), options);
}

SimulationResult simulate_mps_reference(const SystemConfig& config, const StateVector& initial,
                                        const SimulationOptions& options) {
  check_options(options);
  MpsResidualWorkEngine engine(config, initial, Rng(options.seed));
  return run_mps(engine, config.num_classes(), options);
}

SimulationResult simulate_mros(const SystemConfig& config, const StateVector& initial,
                               const SimulationOptions& options) {
  check_options(options);
  MrosEngine engine(config, initial, !initial.empty(), Rng(options.seed));
  SampleSink sink(config.num_classes(), options);
  std::uint64_t arrivals_at_warm = 0;
  std::uint64_t busy_at_warm = 0;
  bool warm_marked = sink.warm();
  while (!sink.done()) {
    auto started = engine.step();
    if (started) {
      sink.record(*started, *started->service_start_epoch - started->arrival_epoch);
    }
    if (!warm_marked && sink.warm()) {
      warm_marked = true;
      arrivals_at_warm = engine.arrivals();
      busy_at_warm = engine.arrivals_found_busy();
    }
    if (options.observer) options.observer(engine.snapshot());
  }
  SimulationResult result;
  result.samples = sink.take();
  result.customers_generated = engine.arrivals();
  result.warmup_discarded = options.warmup;
  result.seed = options.seed;
  result.arrivals_observed = engine.arrivals() - arrivals_at_warm;
  result.arrivals_found_busy = engine.arrivals_found_busy() - busy_at_warm;
  result.final_clock = engine.clock();
  return result;
}

double tagged_sojourn_mps(const SystemConfig& config, const StateVector& initial,
                          std::size_t tagged_class, Rng rng, std::uint64_t event_cap) {
  MpsJumpEngine engine(config, initial, std::move(rng));
  const CustomerId tagged = engine.admit(tagged_class);
  return run_until_departure(engine, tagged, event_cap);
}

double tagged_sojourn_mps_reference(const SystemConfig& config, const StateVector& initial,
                                    std::size_t tagged_class, Rng rng,
                                    std::uint64_t event_cap) {
  MpsResidualWorkEngine engine(config, initial, std::move(rng));
  const CustomerId tagged = engine.admit(tagged_class);
  return run_until_departure(engine, tagged, event_cap);
}

double tagged_waiting_mros(const SystemConfig& config, const StateVector& initial,
                           std::size_t tagged_class, Rng rng, std::uint64_t event_cap) {
  MrosEngine engine(config, initial, true, std::move(rng));
  const CustomerId tagged = engine.admit(tagged_class);
  for (std::uint64_t events = 0; events < event_cap; ++events) {
    auto started = engine.step();
    if (started && started->id == tagged) {
      return *started->service_start_epoch - started->arrival_epoch;
    }
  }
  throw std::runtime_error("tagged customer did not enter service within the event cap");
}

}  // namespace mpsros
