#include "mpsros/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace mpsros {

SystemConfig::SystemConfig(RawConfig raw) : raw_(std::move(raw)) {
  total_arrival_rate_ =
      std::accumulate(raw_.arrival_rates.begin(), raw_.arrival_rates.end(), 0.0);
  load_ = total_arrival_rate_ / raw_.service_rate;
}

SystemConfig SystemConfig::validate(RawConfig raw) {
  const std::size_t n = raw.arrival_rates.size();
  if (n == 0) {
    throw ConfigError("invalid config: at least one class is required");
  }
  if (raw.weights.size() != n || raw.caps.size() != n) {
    throw ConfigError(fmt::format(
        "invalid config: expected {} weights and caps, got {} and {}", n,
        raw.weights.size(), raw.caps.size()));
  }
  auto positive_finite = [](double x) { return std::isfinite(x) && x > 0.0; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!positive_finite(raw.arrival_rates[i])) {
      throw ConfigError(fmt::format("invalid config: arrival rate of class {} must be "
                                    "positive and finite",
                                    i + 1));
    }
    if (!positive_finite(raw.weights[i])) {
      throw ConfigError(fmt::format(
          "invalid config: weight of class {} must be positive and finite", i + 1));
    }
    if (raw.caps[i].has_value() && *raw.caps[i] == 0) {
      throw ConfigError(fmt::format("invalid config: cap of class {} must be >= 1", i + 1));
    }
  }
  if (!positive_finite(raw.service_rate)) {
    throw ConfigError("invalid config: service rate must be positive and finite");
  }
  SystemConfig config(std::move(raw));
  if (!(config.total_arrival_rate_ < config.raw_.service_rate)) {
    throw ConfigError("unstable: Λ ≥ μ");
  }
  return config;
}

StateVector::StateVector(std::vector<std::uint32_t> counts) : counts_(std::move(counts)) {
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void StateVector::increment(std::size_t i) {
  ++counts_[i];
  ++total_;
}

void StateVector::decrement(std::size_t i) {
  if (counts_[i] == 0) {
    throw std::logic_error("StateVector::decrement on empty class");
  }
  --counts_[i];
  --total_;
}

std::string StateVector::to_string() const { return fmt::format("{}", fmt::join(counts_, ",")); }

ServiceProfile beta(const StateVector& state, const SystemConfig& config) {
  ServiceProfile profile;
  profile.beta.resize(state.num_classes());
  for (std::size_t i = 0; i < state.num_classes(); ++i) {
    const Cap cap = config.cap(i);
    profile.beta[i] = cap ? std::min(state[i], *cap) : state[i];
    profile.normalizer += config.weight(i) * profile.beta[i];
  }
  return profile;
}

double per_customer_share(std::size_t class_index, const StateVector& state,
                          const SystemConfig& config) {
  if (state.empty()) {
    throw std::invalid_argument("per_customer_share: empty state");
  }
  const ServiceProfile profile = beta(state, config);
  if (profile.beta.at(class_index) == 0) {
    throw std::invalid_argument(
        fmt::format("per_customer_share: class {} has no customer in service", class_index + 1));
  }
  return config.weight(class_index) / profile.normalizer;
}

double class_selection_weight(std::size_t class_index, const StateVector& state,
                              const SystemConfig& config) {
  if (state.empty()) {
    throw std::invalid_argument("class_selection_weight: empty state");
  }
  const ServiceProfile profile = beta(state, config);
  return profile.beta.at(class_index) * (config.weight(class_index) / profile.normalizer);
}

std::vector<double> class_selection_weights(const StateVector& state,
                                            const SystemConfig& config) {
  if (state.empty()) {
    throw std::invalid_argument("class_selection_weights: empty state");
  }
  const ServiceProfile profile = beta(state, config);
  std::vector<double> w(state.num_classes());
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = profile.beta[i] * (config.weight(i) / profile.normalizer);
  }
  return w;
}

}  // namespace mpsros
