#ifndef MPSROS_MODEL_HPP
#define MPSROS_MODEL_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpsros {

/// Thrown for any parameter set that does not describe a stable, well-formed
/// multiclass system.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-class service-slot cap. An empty value means "no cap" (every present
/// customer of the class is in service / eligible).
using Cap = std::optional<std::uint32_t>;

inline constexpr Cap kUnbounded = std::nullopt;

/// Unvalidated user input. Class indices are 0-based everywhere in the API.
struct RawConfig {
  std::vector<double> arrival_rates;
  std::vector<double> weights;
  std::vector<Cap> caps;
  double service_rate = 1.0;
};

class SystemConfig {
 public:
  /// Validates the raw parameters and derives total arrival rate and loads.
  /// Throws ConfigError on arity mismatch, N = 0, non-finite or non-positive
  /// rates/weights, a zero cap, or total arrival rate >= service rate.
  static SystemConfig validate(RawConfig raw);

  std::size_t num_classes() const { return raw_.arrival_rates.size(); }
  double arrival_rate(std::size_t i) const { return raw_.arrival_rates[i]; }
  double weight(std::size_t i) const { return raw_.weights[i]; }
  Cap cap(std::size_t i) const { return raw_.caps[i]; }
  double service_rate() const { return raw_.service_rate; }

  const std::vector<double>& arrival_rates() const { return raw_.arrival_rates; }
  const std::vector<double>& weights() const { return raw_.weights; }
  const std::vector<Cap>& caps() const { return raw_.caps; }

  double total_arrival_rate() const { return total_arrival_rate_; }
  double load() const { return load_; }
  double class_load(std::size_t i) const { return raw_.arrival_rates[i] / raw_.service_rate; }

  const RawConfig& raw() const { return raw_; }

 private:
  explicit SystemConfig(RawConfig raw);

  RawConfig raw_;
  double total_arrival_rate_ = 0.0;
  double load_ = 0.0;
};

/// Per-class customer counts. For MPS this is everyone in the system, for
/// MROS it is the waiting customers only.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(std::size_t num_classes) : counts_(num_classes, 0) {}
  explicit StateVector(std::vector<std::uint32_t> counts);

  std::size_t num_classes() const { return counts_.size(); }
  std::uint32_t operator[](std::size_t i) const { return counts_[i]; }
  std::uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  void increment(std::size_t i);
  void decrement(std::size_t i);

  friend bool operator==(const StateVector&, const StateVector&) = default;
  friend auto operator<=>(const StateVector& a, const StateVector& b) {
    return a.counts_ <=> b.counts_;
  }

  std::string to_string() const;

 private:
  std::vector<std::uint32_t> counts_;
  std::uint64_t total_ = 0;
};

struct ServiceProfile {
  std::vector<std::uint32_t> beta;
  /// Sum over classes of weight * beta.
  double normalizer = 0.0;
};

/// beta_i = min(n_i, alpha_i); an unbounded cap leaves n_i unchanged.
ServiceProfile beta(const StateVector& state, const SystemConfig& config);

/// Rate fraction received by one in-service class-i customer (MPS), which is
/// also the probability that one particular eligible class-i customer is
/// picked next (MROS). Throws std::invalid_argument if the state is empty or
/// class i has no in-service customer.
double per_customer_share(std::size_t class_index, const StateVector& state,
                          const SystemConfig& config);

/// Probability that the next completion / selection concerns class i:
/// weight_i * beta_i / normalizer. Sums to one over classes.
double class_selection_weight(std::size_t class_index, const StateVector& state,
                              const SystemConfig& config);

/// All class weights at once, avoiding N recomputations of the profile.
std::vector<double> class_selection_weights(const StateVector& state,
                                            const SystemConfig& config);

}  // namespace mpsros

#endif  // MPSROS_MODEL_HPP
