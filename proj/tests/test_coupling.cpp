#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mpsros/coupling.hpp"
#include "mpsros/rng.hpp"
#include "mpsros/stats.hpp"

using namespace mpsros;

namespace {

SystemConfig two_class(Cap a1, Cap a2, double l1 = 0.2, double l2 = 0.3, double p2 = 2.0) {
  return SystemConfig::validate({{l1, l2}, {1.0, p2}, {a1, a2}, 1.0});
}

StateVector state(std::vector<std::uint32_t> counts) { return StateVector(std::move(counts)); }

}  // namespace

TEST_CASE("lone tagged customer with no arrivals leaves at the first completion") {
  const auto config = two_class(kUnbounded, kUnbounded, 1e-12, 1e-12);
  std::vector<double> sojourns;
  for (std::uint64_t s = 0; s < 5000; ++s) {
    const auto run = run_coupled(config, StateVector(2), s % 2, s);
    CHECK(run.completion_epochs == 1);
    CHECK(run.tagged_sojourn == run.tagged_waiting);
    CHECK(run.seed == s);
    sojourns.push_back(run.tagged_sojourn);
  }
  // Exp(1): mean 1, standard error 1/sqrt(n).
  const auto est = mean_with_ci(sojourns);
  CHECK(std::abs(est.mean - 1.0) <= 3.0 / std::sqrt(5000.0));
}

TEST_CASE("two pairs, equal weights: selection is a fair coin") {
  // Tagged class-2 customer behind one class-1 customer, DPS, p = (1,1).
  // Epochs are 1 or 2 with probability 1/2 each.
  const auto config = two_class(kUnbounded, kUnbounded, 1e-12, 1e-12, 1.0);
  const std::size_t runs = 10'000;
  std::vector<double> epochs;
  std::vector<double> sojourns;
  for (std::uint64_t s = 0; s < runs; ++s) {
    const auto run = run_coupled(config, state({1, 0}), 1, Rng::derive_seed(7, s));
    REQUIRE((run.completion_epochs == 1 || run.completion_epochs == 2));
    epochs.push_back(static_cast<double>(run.completion_epochs));
    sojourns.push_back(run.tagged_sojourn);
  }
  const double n = static_cast<double>(runs);
  CHECK(std::abs(mean_with_ci(epochs).mean - 1.5) <= 3.0 * 0.5 / std::sqrt(n));
  // S is Exp(1) or Exp(1) + Exp(1) with equal odds: mean 1.5, variance 1.75.
  CHECK(std::abs(mean_with_ci(sojourns).mean - 1.5) <= 3.0 * std::sqrt(1.75 / n));
}

TEST_CASE("class choice follows the weights of eligible pairs") {
  // GPS, p = (1,2): the head class-2 pair is picked with probability 2/3.
  const auto config = two_class(1u, 1u, 1e-12, 1e-12, 2.0);
  const std::size_t runs = 100'000;
  std::size_t first = 0;
  for (std::uint64_t s = 0; s < runs; ++s) {
    if (run_coupled(config, state({1, 0}), 1, Rng::derive_seed(11, s)).completion_epochs == 1) {
      ++first;
    }
  }
  const double n = static_cast<double>(runs);
  const double share = static_cast<double>(first) / n;
  CHECK(std::abs(share - 2.0 / 3.0) <= 3.0 * std::sqrt((2.0 / 9.0) / n));
}

TEST_CASE("sojourn equals waiting bit for bit") {
  const std::vector<SystemConfig> configs{two_class(kUnbounded, kUnbounded), two_class(1u, 1u),
                                          two_class(2u, 3u)};
  const std::vector<StateVector> initials{StateVector(2), state({2, 1}), state({4, 3})};
  for (const auto& config : configs) {
    for (const auto& initial : initials) {
      for (std::size_t cls = 0; cls < 2; ++cls) {
        for (std::uint64_t s = 0; s < 300; ++s) {
          const auto run = run_coupled(config, initial, cls, s);
          REQUIRE(run.tagged_sojourn == run.tagged_waiting);
          REQUIRE(run.tagged_sojourn > 0.0);
          REQUIRE(run.completion_epochs >= 1);
        }
      }
    }
  }
}

TEST_CASE("coupled queues stay aligned") {
  const auto config = two_class(2u, 3u, 0.3, 0.4);
  for (std::uint64_t s = 0; s < 200; ++s) {
    std::size_t calls = 0;
    double last_clock = 0.0;
    std::uint64_t last_total = 0;
    CouplingOptions opts;
    opts.observer = [&](const CouplingSnapshot& snap) {
      REQUIRE(snap.mps_queues == snap.mros_waiting);
      for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(snap.mps_queues[i].size() == snap.pair_counts[i]);
      }
      REQUIRE(snap.clock >= last_clock);
      if (calls > 0) {
        const auto diff = static_cast<std::int64_t>(snap.pair_counts.total()) -
                          static_cast<std::int64_t>(last_total);
        REQUIRE((diff == 1 || diff == -1));
      }
      last_clock = snap.clock;
      last_total = snap.pair_counts.total();
      ++calls;
    };
    run_coupled(config, state({3, 2}), s % 2, s, opts);
    CHECK(calls >= 2);
  }
}

TEST_CASE("same seed, same coupled run") {
  const auto config = two_class(2u, 3u);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = run_coupled(config, state({2, 1}), 0, s);
    const auto b = run_coupled(config, state({2, 1}), 0, s);
    CHECK(a.tagged_sojourn == b.tagged_sojourn);
    CHECK(a.completion_epochs == b.completion_epochs);
  }
}

TEST_CASE("bad coupled inputs are rejected") {
  const auto config = two_class(1u, 1u);
  CHECK_THROWS_AS(run_coupled(config, StateVector(3), 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(run_coupled(config, StateVector(2), 2, 1), std::invalid_argument);

  CouplingOptions capped;
  capped.epoch_cap = 1;
  const auto slow = two_class(1u, 1u, 1e-12, 1e-12);
  // With 20 pairs ahead, no single epoch can reach the tagged one.
  bool threw = false;
  for (std::uint64_t s = 0; s < 20 && !threw; ++s) {
    try {
      run_coupled(slow, state({10, 10}), 0, s, capped);
    } catch (const std::runtime_error&) {
      threw = true;
    }
  }
  CHECK(threw);

  CHECK_THROWS_AS(conditional_law_check(config, state({2, 1}), 0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(conditional_law_check(config, state({2, 1}), 5, 100, 3),
                  std::invalid_argument);
}

TEST_CASE("conditional law, single class from empty") {
  const auto config = SystemConfig::validate({{0.5}, {1.0}, {kUnbounded}, 1.0});
  const auto report = conditional_law_check(config, StateVector(1), 0, 3000, 42);
  CHECK(report.all_equal);
  CHECK(report.sojourn_ks.passed);
  CHECK(report.waiting_ks.passed);
  CHECK(report.passed());
}

TEST_CASE("conditional law, GPS from (2,1)") {
  const auto config = two_class(1u, 1u);
  for (std::size_t cls = 0; cls < 2; ++cls) {
    const auto report = conditional_law_check(config, state({2, 1}), cls, 4000, 100 + cls);
    CHECK(report.all_equal);
    CHECK(report.sojourn_ks.passed);
    CHECK(report.waiting_ks.passed);
    CHECK(report.sojourn_ks.p_value > 0.001);
    CHECK(report.waiting_ks.p_value > 0.001);
  }
}

TEST_CASE("conditional law does not depend on worker count") {
  const auto config = two_class(2u, 3u);
  const auto one = conditional_law_check(config, state({2, 1}), 1, 300, 9, 0.01, 1);
  const auto three = conditional_law_check(config, state({2, 1}), 1, 300, 9, 0.01, 3);
  CHECK(one.uncoupled_sojourn == three.uncoupled_sojourn);
  CHECK(one.uncoupled_waiting == three.uncoupled_waiting);
  for (std::size_t r = 0; r < 300; ++r) {
    CHECK(one.coupled_runs[r].tagged_sojourn == three.coupled_runs[r].tagged_sojourn);
  }
}
