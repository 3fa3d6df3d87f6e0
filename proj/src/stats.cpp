#include "mpsros/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace mpsros {

EmpiricalTail EmpiricalTail::from_samples(std::span<const double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("empirical_tail: no samples");
  }
  for (double x : samples) {
    if (!std::isfinite(x) || x < 0.0) {
      throw std::invalid_argument("empirical_tail: samples must be finite and non-negative");
    }
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return EmpiricalTail(std::move(sorted));
}

double EmpiricalTail::survival(double t) const {
  const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(above) / static_cast<double>(sorted_.size());
}

double dkw_epsilon(std::size_t n, double delta) {
  if (n == 0) {
    throw std::invalid_argument("dkw_epsilon: n must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("dkw_epsilon: delta must lie in (0, 1)");
  }
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

TailComparisonReport theorem_check(const EmpiricalTail& sojourn, const EmpiricalTail& waiting,
                                   double rho, double delta, double slack,
                                   std::size_t grid_size) {
  if (!(std::isfinite(rho) && rho > 0.0)) {
    throw std::invalid_argument("theorem_check: rho must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("theorem_check: delta must lie in (0, 1)");
  }
  if (!(slack >= 1.0)) {
    throw std::invalid_argument("theorem_check: slack must be at least 1");
  }
  if (grid_size < 2) {
    throw std::invalid_argument("theorem_check: grid needs at least two points");
  }

  std::vector<double> pooled;
  pooled.reserve(sojourn.size() + waiting.size());
  std::merge(sojourn.sorted().begin(), sojourn.sorted().end(), waiting.sorted().begin(),
             waiting.sorted().end(), std::back_inserter(pooled));

  TailComparisonReport report;
  report.grid.reserve(grid_size);
  report.grid.push_back(0.0);
  const auto m = static_cast<double>(pooled.size());
  for (std::size_t k = 1; k < grid_size; ++k) {
    const double level = static_cast<double>(k) / static_cast<double>(grid_size);
    auto idx = static_cast<std::size_t>(level * m);
    idx = std::min(idx, pooled.size() - 1);
    report.grid.push_back(pooled[idx]);
  }

  for (double t : report.grid) {
    const double s = rho * sojourn.survival(t);
    const double w = waiting.survival(t);
    report.scaled_sojourn_tail.push_back(s);
    report.waiting_tail.push_back(w);
    report.discrepancy.push_back(s - w);
    report.sup_discrepancy = std::max(report.sup_discrepancy, std::abs(s - w));
  }
  report.threshold = slack * (rho * dkw_epsilon(sojourn.size(), delta / 2.0) +
                              dkw_epsilon(waiting.size(), delta / 2.0));
  report.passed = report.sup_discrepancy <= report.threshold;
  return report;
}

double kolmogorov_tail(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;  // series converges poorly; tail is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult two_sample_ks(const EmpiricalTail& a, const EmpiricalTail& b, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("two_sample_ks: alpha must lie in (0, 1)");
  }
  const auto& x = a.sorted();
  const auto& y = b.sorted();
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());

  // Walk the merged order; ties advance both sides before the gap is read.
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }

  KsResult result;
  result.statistic = d;
  const double scale = std::sqrt((n + m) / (n * m));
  result.critical_value = std::sqrt(-std::log(alpha / 2.0) / 2.0) * scale;
  const double ne = std::sqrt(n * m / (n + m));
  result.p_value = kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
  result.passed = d <= result.critical_value;
  return result;
}

MeanEstimate mean_with_ci(std::span<const double> samples, double confidence) {
  if (samples.size() < 2) {
    throw std::invalid_argument("mean_with_ci: need at least two samples");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("mean_with_ci: confidence must lie in (0, 1)");
  }
  const auto n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  MeanEstimate est;
  est.mean = mean;
  est.standard_error = sd / std::sqrt(n);
  const boost::math::normal_distribution<double> normal;
  est.halfwidth = boost::math::quantile(normal, 0.5 + confidence / 2.0) * est.standard_error;
  return est;
}

MeanEstimate batch_mean_with_ci(std::span<const double> samples, std::size_t batches,
                                double confidence) {
  if (batches < 2) {
    throw std::invalid_argument("batch_mean_with_ci: need at least two batches");
  }
  const std::size_t size = samples.size() / batches;
  if (size == 0) {
    throw std::invalid_argument("batch_mean_with_ci: fewer samples than batches");
  }
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const auto batch = samples.subspan(b * size, size);
    means[b] = std::accumulate(batch.begin(), batch.end(), 0.0) / static_cast<double>(size);
  }
  return mean_with_ci(means, confidence);
}

}  // namespace mpsros
