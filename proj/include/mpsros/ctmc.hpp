#ifndef MPSROS_CTMC_HPP
#define MPSROS_CTMC_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "mpsros/model.hpp"

namespace mpsros {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All n with |n| <= K in graded lexicographic order (total count first,
/// then lexicographic), optionally preceded by an idle marker state.
class TruncatedStateSpace {
 public:
  /// Throws std::invalid_argument if K == 0 or the space would exceed
  /// `max_states`.
  TruncatedStateSpace(std::size_t num_classes, std::uint32_t truncation, bool with_idle,
                      std::size_t max_states = 5'000'000);

  std::size_t size() const { return states_.size() + (with_idle_ ? 1 : 0); }
  std::size_t num_classes() const { return num_classes_; }
  std::uint32_t truncation() const { return truncation_; }

  bool has_idle() const { return with_idle_; }
  /// Idle state is always ordinal 0 when present.
  std::optional<std::size_t> idle_index() const {
    return with_idle_ ? std::optional<std::size_t>(0) : std::nullopt;
  }

  bool is_idle(std::size_t index) const { return with_idle_ && index == 0; }
  /// Count vector of a non-idle ordinal.
  const StateVector& state(std::size_t index) const;
  /// Ordinal of a count vector, or nullopt when |n| > K.
  std::optional<std::size_t> index_of(const StateVector& state) const;

  /// Number of states with |n| <= K, excluding the idle marker: C(K+N, N).
  static std::uint64_t count_states(std::size_t num_classes, std::uint32_t truncation);

 private:
  std::size_t num_classes_;
  std::uint32_t truncation_;
  bool with_idle_;
  std::vector<StateVector> states_;
  std::map<std::vector<std::uint32_t>, std::size_t> index_;
};

struct Transition {
  std::size_t from = 0;
  std::size_t to = 0;
  double rate = 0.0;
};

/// Off-diagonal generator entries; the diagonal is minus the row's out-rate.
class SparseGenerator {
 public:
  explicit SparseGenerator(std::size_t dimension) : out_rate_(dimension, 0.0) {}

  /// Adds rate to entry (from, to). Throws on a diagonal entry or a
  /// non-positive / non-finite rate.
  void add(std::size_t from, std::size_t to, double rate);

  std::size_t dimension() const { return out_rate_.size(); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  double out_rate(std::size_t state) const { return out_rate_[state]; }
  double max_out_rate() const;

  /// Largest |row sum| including the implied diagonal.
  double max_row_sum_error() const;

  /// (x Q)_j for every j.
  std::vector<double> left_multiply(const std::vector<double>& x) const;

  /// States whose probability is reported as truncation mass (|n| >= K - 1).
  std::vector<std::size_t> boundary_states;

 private:
  std::vector<Transition> transitions_;
  std::vector<double> out_rate_;
};

struct MarkovChain {
  TruncatedStateSpace space;
  SparseGenerator generator;
};

/// MPS(alpha) on n-states with arrivals censored at |n| = K.
MarkovChain build_mps_generator(const SystemConfig& config, std::uint32_t truncation);
/// MROS(alpha) on the idle state plus busy states (1, n) with |n| <= K.
MarkovChain build_mros_generator(const SystemConfig& config, std::uint32_t truncation);

enum class SolverMethod { kGaussSeidel, kPower };

struct SolverOptions {
  double tolerance = 1e-12;
  std::uint64_t max_iterations = 1'000'000;
  SolverMethod method = SolverMethod::kGaussSeidel;
};

struct StationaryDistribution {
  std::vector<double> probabilities;
  /// ||pi Q||_inf at return.
  double residual = 0.0;
  std::uint64_t iterations = 0;
  /// Mass on the generator's boundary states.
  double truncation_mass = 0.0;
};

/// Iterative stationary solve. Throws SolverError when the chain is reducible
/// or the residual does not reach the tolerance within max_iterations.
StationaryDistribution solve_stationary(const SparseGenerator& generator,
                                        const SolverOptions& options = {});

struct LemmaReport {
  std::uint32_t truncation = 0;
  /// Largest total count included in the residual comparisons.
  std::uint32_t interior_limit = 0;
  double rho = 0.0;
  /// max over interior n of |pi_mros(1, n) - rho pi_mps(n)|.
  double lemma_residual = 0.0;
  /// |pi_mros(0, 0) - (1 - rho)|.
  double idle_residual = 0.0;
  /// max over interior n of |P(total = n) - (1 - rho) rho^n| under MPS.
  double geometric_residual = 0.0;
  /// max over interior MROS states of |(x Q_mros)_j| with
  /// x(1, n) = rho pi_mps(n), x(0, 0) = 1 - rho.
  double substitution_residual = 0.0;
  StationaryDistribution mps;
  StationaryDistribution mros;
};

/// Solves both chains and compares them. The interior is |n| <= K - 10, or
/// empty when K < 10 (all residuals over the interior are then 0).
LemmaReport verify_lemma(const SystemConfig& config, std::uint32_t truncation,
                         const SolverOptions& options = {});

/// Total-count marginal of an MPS distribution: entry n is P(|n| = n).
std::vector<double> total_count_marginal(const TruncatedStateSpace& space,
                                         const StationaryDistribution& distribution);

/// Writes `state;probability` rows with a header. MPS states are the
/// comma-joined counts; MROS states carry a leading busy flag.
void write_distribution_csv(std::ostream& out, const TruncatedStateSpace& space,
                            const StationaryDistribution& distribution);

}  // namespace mpsros

#endif  // MPSROS_CTMC_HPP
