#ifndef MPSROS_STATS_HPP
#define MPSROS_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace mpsros {

/// Empirical complementary CDF, Fbar(t) = #{samples > t} / n.
class EmpiricalTail {
 public:
  /// Throws std::invalid_argument on empty input or a negative / non-finite
  /// sample.
  static EmpiricalTail from_samples(std::span<const double> samples);

  double survival(double t) const;
  double operator()(double t) const { return survival(t); }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  explicit EmpiricalTail(std::vector<double> sorted) : sorted_(std::move(sorted)) {}
  std::vector<double> sorted_;
};

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/delta) / (2n)).
double dkw_epsilon(std::size_t n, double delta);

struct TailComparisonReport {
  std::vector<double> grid;
  std::vector<double> scaled_sojourn_tail;  // rho * Fbar_S(t)
  std::vector<double> waiting_tail;         // Fbar_W(t)
  std::vector<double> discrepancy;          // rho * Fbar_S(t) - Fbar_W(t)
  double sup_discrepancy = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Checks rho * P(S > t) = P(W > t) on a grid made of t = 0 followed by
/// grid_size - 1 quantiles of the pooled samples. Passes when the largest
/// absolute discrepancy is within
///   slack * (rho * eps(n_S, delta/2) + eps(n_W, delta/2)).
TailComparisonReport theorem_check(const EmpiricalTail& sojourn, const EmpiricalTail& waiting,
                                   double rho, double delta, double slack,
                                   std::size_t grid_size);

struct KsResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  /// Asymptotic Kolmogorov tail probability of the statistic.
  double p_value = 1.0;
  bool passed = false;
};

/// Two-sample Kolmogorov-Smirnov test against the asymptotic critical value
/// sqrt(-ln(alpha/2)/2) * sqrt((n+m)/(n m)).
KsResult two_sample_ks(const EmpiricalTail& a, const EmpiricalTail& b, double alpha);

/// Limiting Kolmogorov distribution tail P(K > x).
double kolmogorov_tail(double x);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  double halfwidth = 0.0;
};

/// Sample mean with a normal-approximation interval at `confidence`.
/// Needs at least two samples.
MeanEstimate mean_with_ci(std::span<const double> samples, double confidence = 0.95);

/// Same interval built from the means of `batches` consecutive,
/// non-overlapping batches; trailing samples that do not fill a batch are
/// dropped. Suited to serially correlated output of a single long run.
MeanEstimate batch_mean_with_ci(std::span<const double> samples, std::size_t batches,
                                double confidence = 0.95);

}  // namespace mpsros

#endif  // MPSROS_STATS_HPP
