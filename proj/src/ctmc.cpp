#include "mpsros/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mpsros {
namespace {

// Appends every composition of `total` into parts.size() - start parts, in
// lexicographic order.
void enumerate_level(std::vector<std::uint32_t>& parts, std::size_t start, std::uint32_t total,
                     std::vector<StateVector>& out) {
  if (start + 1 == parts.size()) {
    parts[start] = total;
    out.emplace_back(parts);
    return;
  }
  for (std::uint32_t k = 0; k <= total; ++k) {
    parts[start] = k;
    enumerate_level(parts, start + 1, total - k, out);
  }
}

StateVector shifted(const StateVector& s, std::size_t cls, int delta) {
  std::vector<std::uint32_t> counts = s.counts();
  counts[cls] = static_cast<std::uint32_t>(static_cast<int>(counts[cls]) + delta);
  return StateVector(std::move(counts));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Every state reachable from state 0 along transitions, forwards or backwards
// depending on `reverse`.
std::vector<bool> reachable(const SparseGenerator& q, bool reverse) {
  std::vector<std::vector<std::size_t>> adj(q.dimension());
  for (const auto& t : q.transitions()) {
    if (reverse) {
      adj[t.to].push_back(t.from);
    } else {
      adj[t.from].push_back(t.to);
    }
  }
  std::vector<bool> seen(q.dimension(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const std::size_t s = stack.back();
    stack.pop_back();
    for (std::size_t t : adj[s]) {
      if (!seen[t]) {
        seen[t] = true;
        stack.push_back(t);
      }
    }
  }
  return seen;
}

void normalize(std::vector<double>& pi) {
  double sum = 0.0;
  for (double p : pi) sum += p;
  for (double& p : pi) p /= sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// TruncatedStateSpace

std::uint64_t TruncatedStateSpace::count_states(std::size_t num_classes,
                                                std::uint32_t truncation) {
  // C(K + N, N) built incrementally; each partial product is itself a binomial.
  std::uint64_t c = 1;
  for (std::uint64_t k = 1; k <= num_classes; ++k) {
    const std::uint64_t num = truncation + k;
    if (c > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    c = c * num / k;
  }
  return c;
}

TruncatedStateSpace::TruncatedStateSpace(std::size_t num_classes, std::uint32_t truncation,
                                         bool with_idle, std::size_t max_states)
    : num_classes_(num_classes), truncation_(truncation), with_idle_(with_idle) {
  if (num_classes == 0) {
    throw std::invalid_argument("state space needs at least one class");
  }
  if (truncation == 0) {
    throw std::invalid_argument("truncation level must be at least 1");
  }
  const std::uint64_t count = count_states(num_classes, truncation);
  if (count > max_states) {
    throw std::invalid_argument(fmt::format(
        "truncated state space has {} states, above the budget of {}", count, max_states));
  }
  states_.reserve(count);
  std::vector<std::uint32_t> parts(num_classes, 0);
  for (std::uint32_t level = 0; level <= truncation; ++level) {
    enumerate_level(parts, 0, level, states_);
  }
  const std::size_t offset = with_idle_ ? 1 : 0;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    index_.emplace(states_[i].counts(), i + offset);
  }
}

const StateVector& TruncatedStateSpace::state(std::size_t index) const {
  if (is_idle(index)) {
    throw std::invalid_argument("idle marker has no count vector");
  }
  return states_.at(index - (with_idle_ ? 1 : 0));
}

std::optional<std::size_t> TruncatedStateSpace::index_of(const StateVector& state) const {
  auto it = index_.find(state.counts());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// SparseGenerator

void SparseGenerator::add(std::size_t from, std::size_t to, double rate) {
  if (from == to) {
    throw std::invalid_argument("generator entries must be off-diagonal");
  }
  if (from >= dimension() || to >= dimension()) {
    throw std::out_of_range("generator entry outside the state space");
  }
  if (!(std::isfinite(rate) && rate > 0.0)) {
    throw std::invalid_argument("generator rates must be positive and finite");
  }
  transitions_.push_back({from, to, rate});
  out_rate_[from] += rate;
}

double SparseGenerator::max_out_rate() const {
  return out_rate_.empty() ? 0.0 : *std::max_element(out_rate_.begin(), out_rate_.end());
}

double SparseGenerator::max_row_sum_error() const {
  std::vector<double> row(dimension(), 0.0);
  for (const auto& t : transitions_) row[t.from] += t.rate;
  for (std::size_t i = 0; i < row.size(); ++i) row[i] -= out_rate_[i];
  return max_abs(row);
}

std::vector<double> SparseGenerator::left_multiply(const std::vector<double>& x) const {
  std::vector<double> y(dimension(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = -out_rate_[i] * x[i];
  for (const auto& t : transitions_) y[t.to] += x[t.from] * t.rate;
  return y;
}

// ---------------------------------------------------------------------------
// Generators

MarkovChain build_mps_generator(const SystemConfig& config, std::uint32_t truncation) {
  TruncatedStateSpace space(config.num_classes(), truncation, false);
  SparseGenerator q(space.size());
  const double mu = config.service_rate();
  for (std::size_t s = 0; s < space.size(); ++s) {
    const StateVector& n = space.state(s);
    if (n.total() < truncation) {
      for (std::size_t i = 0; i < n.num_classes(); ++i) {
        q.add(s, *space.index_of(shifted(n, i, +1)), config.arrival_rate(i));
      }
    }
    if (!n.empty()) {
      const auto w = class_selection_weights(n, config);
      for (std::size_t i = 0; i < n.num_classes(); ++i) {
        if (w[i] > 0.0) q.add(s, *space.index_of(shifted(n, i, -1)), mu * w[i]);
      }
    }
    if (n.total() + 1 >= truncation) q.boundary_states.push_back(s);
  }
  return {std::move(space), std::move(q)};
}

MarkovChain build_mros_generator(const SystemConfig& config, std::uint32_t truncation) {
  TruncatedStateSpace space(config.num_classes(), truncation, true);
  SparseGenerator q(space.size());
  const double mu = config.service_rate();
  const std::size_t idle = *space.idle_index();
  const std::size_t busy_empty = *space.index_of(StateVector(config.num_classes()));

  q.add(idle, busy_empty, config.total_arrival_rate());
  q.add(busy_empty, idle, mu);
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (space.is_idle(s)) continue;
    const StateVector& n = space.state(s);
    if (n.total() < truncation) {
      for (std::size_t i = 0; i < n.num_classes(); ++i) {
        q.add(s, *space.index_of(shifted(n, i, +1)), config.arrival_rate(i));
      }
    }
    if (!n.empty()) {
      const auto w = class_selection_weights(n, config);
      for (std::size_t i = 0; i < n.num_classes(); ++i) {
        if (w[i] > 0.0) q.add(s, *space.index_of(shifted(n, i, -1)), mu * w[i]);
      }
    }
    if (n.total() + 1 >= truncation) q.boundary_states.push_back(s);
  }
  return {std::move(space), std::move(q)};
}

// ---------------------------------------------------------------------------
// Solver

StationaryDistribution solve_stationary(const SparseGenerator& generator,
                                        const SolverOptions& options) {
  const std::size_t d = generator.dimension();
  if (d == 0) {
    throw std::invalid_argument("solve_stationary: empty generator");
  }
  if (!(options.tolerance > 0.0)) {
    throw std::invalid_argument("solve_stationary: tolerance must be positive");
  }
  const auto forward = reachable(generator, false);
  const auto backward = reachable(generator, true);
  for (std::size_t s = 0; s < d; ++s) {
    if (!forward[s] || !backward[s]) {
      throw SolverError(fmt::format("reducible chain: state {} is not in the class of state 0", s));
    }
  }

  StationaryDistribution result;
  std::vector<double> pi(d, 1.0 / static_cast<double>(d));
  result.residual = max_abs(generator.left_multiply(pi));

  if (options.method == SolverMethod::kGaussSeidel) {
    // Incoming transitions per target state.
    std::vector<std::size_t> start(d + 1, 0);
    for (const auto& t : generator.transitions()) ++start[t.to + 1];
    for (std::size_t j = 0; j < d; ++j) start[j + 1] += start[j];
    std::vector<std::size_t> source(generator.transitions().size());
    std::vector<double> rate(generator.transitions().size());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (const auto& t : generator.transitions()) {
      source[fill[t.to]] = t.from;
      rate[fill[t.to]++] = t.rate;
    }
    while (result.residual > options.tolerance && result.iterations < options.max_iterations) {
      for (std::size_t j = 0; j < d; ++j) {
        double inflow = 0.0;
        for (std::size_t k = start[j]; k < start[j + 1]; ++k) inflow += pi[source[k]] * rate[k];
        if (generator.out_rate(j) > 0.0) pi[j] = inflow / generator.out_rate(j);
      }
      normalize(pi);
      ++result.iterations;
      result.residual = max_abs(generator.left_multiply(pi));
    }
  } else {
    const double uniformization = generator.max_out_rate();
    while (result.residual > options.tolerance && result.iterations < options.max_iterations) {
      const auto flow = generator.left_multiply(pi);
      for (std::size_t j = 0; j < d; ++j) pi[j] += flow[j] / uniformization;
      normalize(pi);
      ++result.iterations;
      result.residual = max_abs(generator.left_multiply(pi));
    }
  }

  if (result.residual > options.tolerance) {
    throw SolverError(fmt::format("no convergence after {} iterations (residual {:.3e})",
                                  result.iterations, result.residual));
  }
  for (std::size_t s : generator.boundary_states) result.truncation_mass += pi[s];
  result.probabilities = std::move(pi);
  return result;
}

// ---------------------------------------------------------------------------
// Comparing the two chains

std::vector<double> total_count_marginal(const TruncatedStateSpace& space,
                                         const StationaryDistribution& distribution) {
  std::vector<double> marginal(space.truncation() + 1, 0.0);
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (space.is_idle(s)) continue;
    marginal[space.state(s).total()] += distribution.probabilities[s];
  }
  return marginal;
}

LemmaReport verify_lemma(const SystemConfig& config, std::uint32_t truncation,
                         const SolverOptions& options) {
  const MarkovChain mps = build_mps_generator(config, truncation);
  const MarkovChain mros = build_mros_generator(config, truncation);

  LemmaReport report;
  report.truncation = truncation;
  report.rho = config.load();
  report.mps = solve_stationary(mps.generator, options);
  report.mros = solve_stationary(mros.generator, options);

  const double rho = report.rho;
  const bool has_interior = truncation >= 10;
  report.interior_limit = has_interior ? truncation - 10 : 0;
  const std::size_t idle = *mros.space.idle_index();
  report.idle_residual = std::abs(report.mros.probabilities[idle] - (1.0 - rho));

  std::vector<double> substituted(mros.space.size(), 0.0);
  substituted[idle] = 1.0 - rho;
  for (std::size_t s = 0; s < mps.space.size(); ++s) {
    const StateVector& n = mps.space.state(s);
    const std::size_t t = *mros.space.index_of(n);
    substituted[t] = rho * report.mps.probabilities[s];
    if (has_interior && n.total() <= report.interior_limit) {
      report.lemma_residual =
          std::max(report.lemma_residual,
                   std::abs(report.mros.probabilities[t] - rho * report.mps.probabilities[s]));
    }
  }

  if (has_interior) {
    const auto balance = mros.generator.left_multiply(substituted);
    for (std::size_t t = 0; t < mros.space.size(); ++t) {
      if (!mros.space.is_idle(t) && mros.space.state(t).total() > report.interior_limit) continue;
      report.substitution_residual = std::max(report.substitution_residual, std::abs(balance[t]));
    }

    const auto marginal = total_count_marginal(mps.space, report.mps);
    for (std::uint32_t n = 0; n <= report.interior_limit; ++n) {
      const double geometric = (1.0 - rho) * std::pow(rho, n);
      report.geometric_residual =
          std::max(report.geometric_residual, std::abs(marginal[n] - geometric));
    }
  }
  return report;
}

void write_distribution_csv(std::ostream& out, const TruncatedStateSpace& space,
                            const StationaryDistribution& distribution) {
  out << "state;probability\n";
  const std::string idle_label =
      fmt::format("0,{}", fmt::join(std::vector<int>(space.num_classes(), 0), ","));
  for (std::size_t s = 0; s < space.size(); ++s) {
    const double p = distribution.probabilities[s];
    if (space.is_idle(s)) {
      out << fmt::format("{};{}\n", idle_label, p);
    } else if (space.has_idle()) {
      out << fmt::format("1,{};{}\n", space.state(s).to_string(), p);
    } else {
      out << fmt::format("{};{}\n", space.state(s).to_string(), p);
    }
  }
}

}  // namespace mpsros
