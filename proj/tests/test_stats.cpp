#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mpsros/engines.hpp"
#include "mpsros/rng.hpp"
#include "mpsros/stats.hpp"

using namespace mpsros;

namespace {

std::vector<double> exponential_draws(std::size_t n, double rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = rng.exponential(rate);
  return out;
}

}  // namespace

TEST_CASE("empirical tail counts strictly larger samples") {
  const std::vector<double> s{1, 2, 3};
  const auto tail = EmpiricalTail::from_samples(s);
  CHECK(tail(2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(tail(0.5) == 1.0);
  CHECK(tail(-1e-9) == 1.0);
  CHECK(tail(3.0) == 0.0);

  const std::vector<double> one{5};
  const auto single = EmpiricalTail::from_samples(one);
  CHECK(single(5.0) == 0.0);
  CHECK(single(4.99) == 1.0);
}

TEST_CASE("empirical tail rejects bad input") {
  CHECK_THROWS_AS(EmpiricalTail::from_samples(std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalTail::from_samples(std::vector<double>{1, -0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalTail::from_samples(std::vector<double>{NAN}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalTail::from_samples(std::vector<double>{INFINITY}),
                  std::invalid_argument);
}

TEST_CASE("empirical tail of exponential draws lies inside the DKW band") {
  const auto draws = exponential_draws(100'000, 1.0, 7);
  const auto tail = EmpiricalTail::from_samples(draws);
  // Sup over t is attained at the jump points; check both sides of each jump.
  const auto& x = tail.sorted();
  const auto n = static_cast<double>(x.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double truth = std::exp(-x[i]);
    const double before = 1.0 - static_cast<double>(i) / n;
    const double after = 1.0 - static_cast<double>(i + 1) / n;
    sup = std::max({sup, std::abs(before - truth), std::abs(after - truth)});
  }
  CHECK(sup < dkw_epsilon(x.size(), 0.01));
}

TEST_CASE("dkw epsilon") {
  CHECK(dkw_epsilon(1'000'000, 0.01) == doctest::Approx(0.001628).epsilon(1e-3));
  CHECK(dkw_epsilon(1, 0.5) == doctest::Approx(0.8326).epsilon(1e-4));
  CHECK(dkw_epsilon(100, 0.05) > dkw_epsilon(1000, 0.05));
  CHECK(dkw_epsilon(100, 0.001) > dkw_epsilon(100, 0.05));
  CHECK_THROWS_AS(dkw_epsilon(10, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(dkw_epsilon(10, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(dkw_epsilon(0, 0.1), std::invalid_argument);
}

TEST_CASE("theorem_check on identical samples with unit scale") {
  const auto draws = exponential_draws(1000, 1.0, 3);
  const auto tail = EmpiricalTail::from_samples(draws);
  const auto report = theorem_check(tail, tail, 1.0, 0.01, 3.0, 50);
  CHECK(report.sup_discrepancy == 0.0);
  CHECK(report.passed);
  CHECK(report.grid.size() == 50);
  CHECK(report.grid.front() == 0.0);
  CHECK(std::is_sorted(report.grid.begin(), report.grid.end()));
  CHECK(std::is_sorted(report.waiting_tail.rbegin(), report.waiting_tail.rend()));
  CHECK(report.threshold > 0.0);
}

TEST_CASE("theorem_check input validation") {
  const auto tail = EmpiricalTail::from_samples(std::vector<double>{1, 2});
  CHECK_THROWS_AS(theorem_check(tail, tail, 0.0, 0.01, 3, 10), std::invalid_argument);
  CHECK_THROWS_AS(theorem_check(tail, tail, 0.5, 1.5, 3, 10), std::invalid_argument);
  CHECK_THROWS_AS(theorem_check(tail, tail, 0.5, 0.01, 0.5, 10), std::invalid_argument);
}

TEST_CASE("theorem_check: swapping roles scales the discrepancy by 1/rho") {
  const auto s = EmpiricalTail::from_samples(exponential_draws(2000, 0.5, 11));
  const auto w = EmpiricalTail::from_samples(exponential_draws(2000, 0.7, 12));
  const double rho = 0.4;
  const auto forward = theorem_check(s, w, rho, 0.05, 1.0, 100);
  const auto backward = theorem_check(w, s, 1.0 / rho, 0.05, 1.0, 100);
  REQUIRE(forward.grid == backward.grid);
  CHECK(backward.sup_discrepancy == doctest::Approx(forward.sup_discrepancy / rho));
  // Pure function of the inputs.
  const auto again = theorem_check(s, w, rho, 0.05, 1.0, 100);
  CHECK(again.discrepancy == forward.discrepancy);
}

TEST_CASE("theorem_check on a single-class engine fixture") {
  const auto config = SystemConfig::validate({{0.5}, {1.0}, {kUnbounded}, 1.0});
  SimulationOptions options;
  options.num_events = 400'000;
  options.warmup = 1'000;
  options.stride = 16;
  options.seed = 21;
  const auto sojourn = simulate_mps(config, StateVector(1), options);
  options.seed = 22;
  const auto waiting = simulate_mros(config, StateVector(1), options);
  const auto s = EmpiricalTail::from_samples(sojourn.samples[0]);
  const auto w = EmpiricalTail::from_samples(waiting.samples[0]);

  const auto report = theorem_check(s, w, 0.5, 0.01, 3.0, 200);
  CHECK(report.passed);
  // t = 0: every sojourn is positive, about half the waits are.
  CHECK(report.scaled_sojourn_tail.front() == 0.5);
  CHECK(report.waiting_tail.front() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("two-sample KS") {
  const auto a = EmpiricalTail::from_samples(exponential_draws(10'000, 1.0, 1));
  const auto same = two_sample_ks(a, a, 0.01);
  CHECK(same.statistic == 0.0);
  CHECK(same.passed);

  const auto b = EmpiricalTail::from_samples(exponential_draws(10'000, 2.0, 2));
  const auto differ = two_sample_ks(a, b, 0.01);
  CHECK_FALSE(differ.passed);
  CHECK(differ.p_value < 1e-6);

  // Critical value sqrt(-ln(0.005)/2) * sqrt(2/1e4).
  CHECK(same.critical_value == doctest::Approx(1.6276 * std::sqrt(2e-4)).epsilon(1e-4));
}

TEST_CASE("two-sample KS handles ties and unequal sizes") {
  const auto a = EmpiricalTail::from_samples(std::vector<double>{0, 0, 1, 2});
  const auto b = EmpiricalTail::from_samples(std::vector<double>{0, 1, 1});
  // CDFs: at 0 -> 1/2 vs 1/3, at 1 -> 3/4 vs 1, at 2 -> 1 vs 1.
  CHECK(two_sample_ks(a, b, 0.05).statistic == doctest::Approx(0.25));
}

TEST_CASE("two-sample KS has roughly the nominal level") {
  int passes = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto draws = exponential_draws(20'000, 1.0, 1000 + rep);
    const std::span<const double> all(draws);
    const auto a = EmpiricalTail::from_samples(all.first(10'000));
    const auto b = EmpiricalTail::from_samples(all.last(10'000));
    if (two_sample_ks(a, b, 0.01).passed) ++passes;
  }
  CHECK(passes >= 95);
}

TEST_CASE("kolmogorov tail") {
  CHECK(kolmogorov_tail(0.0) == 1.0);
  // Standard table values.
  CHECK(kolmogorov_tail(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_tail(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("mean with confidence interval") {
  const auto flat = mean_with_ci(std::vector<double>{1, 1, 1, 1});
  CHECK(flat.mean == 1.0);
  CHECK(flat.halfwidth == 0.0);
  CHECK(mean_with_ci(std::vector<double>{0, 2}).mean == 1.0);

  const auto draws = exponential_draws(1'000'000, 1.0, 99);
  const auto est = mean_with_ci(draws, 0.95);
  CHECK(std::abs(est.mean - 1.0) <= 3.0 / std::sqrt(1e6));
  CHECK(est.standard_error == doctest::Approx(1e-3).epsilon(0.02));
  CHECK(est.halfwidth == doctest::Approx(1.959964 * est.standard_error));

  CHECK_THROWS_AS(mean_with_ci(std::vector<double>{1}), std::invalid_argument);
}

TEST_CASE("batch means") {
  const std::vector<double> x{1, 3, 5, 7, 9, 11, 100};
  // Batches {1,3,5} and {7,9,11}; the trailing 100 is dropped.
  const auto est = batch_mean_with_ci(x, 2);
  CHECK(est.mean == 6.0);
  CHECK(est.standard_error == doctest::Approx(3.0));
  CHECK_THROWS_AS(batch_mean_with_ci(x, 1), std::invalid_argument);
  CHECK_THROWS_AS(batch_mean_with_ci(x, 8), std::invalid_argument);

  const auto draws = exponential_draws(100'000, 1.0, 5);
  const auto naive = mean_with_ci(draws);
  const auto batched = batch_mean_with_ci(draws, 50);
  CHECK(batched.mean == doctest::Approx(naive.mean).epsilon(1e-12));
  CHECK(batched.standard_error == doctest::Approx(naive.standard_error).epsilon(0.3));
}
