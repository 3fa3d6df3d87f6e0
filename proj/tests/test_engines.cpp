#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mpsros/engines.hpp"
#include "mpsros/stats.hpp"

using namespace mpsros;

namespace {

SystemConfig single_class(Cap cap) { return SystemConfig::validate({{0.5}, {1.0}, {cap}, 1.0}); }

SystemConfig two_class_dps() {
  return SystemConfig::validate({{0.2, 0.3}, {1.0, 2.0}, {kUnbounded, kUnbounded}, 1.0});
}

SimulationOptions options(std::uint64_t events, std::uint64_t warmup, std::uint64_t stride,
                          std::uint64_t seed) {
  SimulationOptions o;
  o.num_events = events;
  o.warmup = warmup;
  o.stride = stride;
  o.seed = seed;
  return o;
}

double batch_standard_error(const std::vector<double>& x, std::size_t batches) {
  return batch_mean_with_ci(x, batches).standard_error;
}

double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// sup_t |Fbar_n(t) - exp(-rate t)|.
double sup_distance_to_exponential(std::vector<double> x, double rate) {
  const auto tail = EmpiricalTail::from_samples(x);
  const auto& s = tail.sorted();
  const auto n = static_cast<double>(s.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double truth = std::exp(-rate * s[i]);
    sup = std::max({sup, std::abs(1.0 - i / n - truth), std::abs(1.0 - (i + 1) / n - truth)});
  }
  return sup;
}

}  // namespace

TEST_CASE("M/M/1-PS mean sojourn is 1/(mu - Lambda)") {
  for (Cap cap : {kUnbounded, Cap{1}}) {
    const auto result = simulate_mps(single_class(cap), StateVector(1),
                                     options(1'010'000, 10'000, 1, cap ? 5 : 4));
    const auto& s = result.samples[0];
    REQUIRE(s.size() == 1'000'000);
    const double se = batch_standard_error(s, 100);
    MESSAGE("cap " << (cap ? 1 : 0) << ": mean " << mean(s) << " batch se " << se
                   << " naive se " << mean_with_ci(s).standard_error);
    CHECK(std::abs(mean(s) - 2.0) <= 3.0 * se);
  }
}

TEST_CASE("a single departure yields a single positive sojourn") {
  for (const auto& config : {single_class(kUnbounded), two_class_dps()}) {
    const auto result =
        simulate_mps(config, StateVector(config.num_classes()), options(1, 0, 1, 3));
    CHECK(result.total_samples() == 1);
    for (const auto& s : result.samples) {
      for (double x : s) CHECK(x > 0.0);
    }
  }
}

TEST_CASE("simulation option validation") {
  const auto config = single_class(kUnbounded);
  CHECK_THROWS_AS(simulate_mps(config, StateVector(1), options(0, 0, 1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_mros(config, StateVector(1), options(10, 10, 1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_mps_reference(config, StateVector(1), options(10, 0, 0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(simulate_mps(config, StateVector(2), options(10, 0, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("reference engine agrees with the jump engine (single class)") {
  const auto config = single_class(kUnbounded);
  const auto fast = simulate_mps(config, StateVector(1), options(1'610'000, 10'000, 16, 8));
  const auto slow =
      simulate_mps_reference(config, StateVector(1), options(1'610'000, 10'000, 16, 9));
  const auto ks = two_sample_ks(EmpiricalTail::from_samples(fast.samples[0]),
                                EmpiricalTail::from_samples(slow.samples[0]), 0.01);
  MESSAGE("KS " << ks.statistic << " critical " << ks.critical_value);
  CHECK(ks.passed);
}

TEST_CASE("a lone customer without arrivals leaves after an exponential(mu) time") {
  const auto quiet = SystemConfig::validate({{1e-12}, {1.0}, {kUnbounded}, 2.0});
  std::vector<double> sojourn;
  for (std::uint64_t r = 0; r < 20'000; ++r) {
    sojourn.push_back(tagged_sojourn_mps_reference(quiet, StateVector(1), 0, Rng::stream(77, r)));
  }
  CHECK(sup_distance_to_exponential(sojourn, 2.0) < dkw_epsilon(sojourn.size(), 0.01));
}

TEST_CASE("two head-of-line customers: first departure at rate mu") {
  const auto quiet =
      SystemConfig::validate({{1e-12, 1e-12}, {1.0, 1.0}, {Cap{1}, Cap{1}}, 1.0});
  std::vector<double> first;
  for (std::uint64_t r = 0; r < 20'000; ++r) {
    MpsResidualWorkEngine engine(quiet, StateVector({1, 1}), Rng::stream(78, r));
    auto departed = engine.step();
    REQUIRE(departed.has_value());
    first.push_back(*departed->departure_epoch);
  }
  CHECK(sup_distance_to_exponential(first, 1.0) < dkw_epsilon(first.size(), 0.01));
}

TEST_CASE("M/M/1 random order: mean wait rho/(mu - Lambda) and PASTA") {
  const auto result =
      simulate_mros(single_class(kUnbounded), StateVector(1), options(1'010'000, 10'000, 1, 6));
  const auto& w = result.samples[0];
  const double se = batch_standard_error(w, 100);
  MESSAGE("mros mean " << mean(w) << " batch se " << se << " busy " << result.busy_fraction());
  CHECK(std::abs(mean(w) - 1.0) <= 3.0 * se);

  const double busy_se = std::sqrt(0.25 / static_cast<double>(result.arrivals_observed));
  // Busy indicators of successive arrivals are correlated; allow for it by
  // judging against the batch spread of positive-wait indicators instead.
  std::vector<double> positive(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) positive[i] = w[i] > 0.0 ? 1.0 : 0.0;
  const double indicator_se = batch_standard_error(positive, 100);
  CHECK(std::abs(mean(positive) - 0.5) <= 3.0 * indicator_se);
  CHECK(std::abs(result.busy_fraction() - 0.5) <= 3.0 * std::max(busy_se, indicator_se));
}

TEST_CASE("arrival to an empty MROS system waits exactly zero") {
  const auto result = simulate_mros(two_class_dps(), StateVector(2), options(1, 0, 1, 10));
  REQUIRE(result.total_samples() == 1);
  for (const auto& s : result.samples) {
    for (double x : s) CHECK(x == 0.0);
  }
}

TEST_CASE("MROS rejects waiting customers behind an idle server") {
  CHECK_THROWS_AS(MrosEngine(two_class_dps(), StateVector({1, 0}), false, Rng(1)),
                  std::invalid_argument);
}

TEST_CASE("MPS invariants hold at every event") {
  for (const auto& caps : {std::vector<Cap>{kUnbounded, kUnbounded}, {Cap{1}, Cap{1}},
                           {Cap{2}, Cap{3}}}) {
    const auto config = SystemConfig::validate({{0.2, 0.3}, {1.0, 2.0}, caps, 1.0});
    std::uint64_t checked = 0;
    auto o = options(20'000, 0, 1, 12);
    o.observer = [&](const QueueSnapshot& snap) {
      const auto profile = beta(snap.tracked_state, config);
      for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(snap.queues[i].size() == snap.tracked_state[i]);
        REQUIRE(snap.in_service_counts[i] == profile.beta[i]);
      }
      ++checked;
    };
    simulate_mps(config, StateVector({2, 1}), o);
    simulate_mps_reference(config, StateVector({2, 1}), o);
    CHECK(checked > 40'000);
  }
}

TEST_CASE("MROS invariants hold at every event") {
  const auto config = SystemConfig::validate({{0.2, 0.3}, {1.0, 2.0}, {Cap{2}, Cap{3}}, 1.0});
  auto o = options(20'000, 0, 1, 13);
  std::uint64_t idle_epochs = 0;
  o.observer = [&](const QueueSnapshot& snap) {
    for (std::size_t i = 0; i < 2; ++i) {
      REQUIRE(snap.queues[i].size() == snap.tracked_state[i]);
      for (auto id : snap.queues[i]) REQUIRE(id != snap.in_service_id.value_or(~0ULL));
    }
    // Work conservation.
    if (!snap.in_service_id) {
      REQUIRE(snap.tracked_state.empty());
      ++idle_epochs;
    }
  };
  simulate_mros(config, StateVector({2, 1}), o);
  CHECK(idle_epochs > 0);
}

TEST_CASE("DPS with equal weights has a geometric time-average total count") {
  const auto config =
      SystemConfig::validate({{0.2, 0.3}, {1.0, 1.0}, {kUnbounded, kUnbounded}, 1.0});
  std::vector<double> time_in(12, 0.0);
  double last_clock = 0.0;
  std::uint64_t last_total = 0;
  auto o = options(400'000, 0, 1, 14);
  o.observer = [&](const QueueSnapshot& snap) {
    if (last_total < time_in.size()) time_in[last_total] += snap.clock - last_clock;
    last_clock = snap.clock;
    last_total = snap.tracked_state.total();
  };
  simulate_mps(config, StateVector(2), o);
  for (std::size_t n = 0; n < 6; ++n) {
    const double observed = time_in[n] / last_clock;
    const double expected = 0.5 * std::pow(0.5, static_cast<double>(n));
    CHECK(observed == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("same seed reproduces the same result") {
  const auto config = two_class_dps();
  for (int engine = 0; engine < 3; ++engine) {
    auto run = [&](std::uint64_t seed) {
      const auto o = options(50'000, 1'000, 4, seed);
      if (engine == 0) return simulate_mps(config, StateVector(2), o);
      if (engine == 1) return simulate_mps_reference(config, StateVector(2), o);
      return simulate_mros(config, StateVector(2), o);
    };
    const auto a = run(31);
    const auto b = run(31);
    const auto c = run(32);
    CHECK(a.samples == b.samples);
    CHECK(a.final_clock == b.final_clock);
    CHECK(a.customers_generated == b.customers_generated);
    CHECK(a.samples != c.samples);
  }
}

TEST_CASE("initial customers are never sampled") {
  // Warmup 0, one departure, and a large initial population: the first
  // departure is almost surely an initial customer.
  const auto config = single_class(kUnbounded);
  const auto result = simulate_mps(config, StateVector(std::vector<std::uint32_t>{50}), options(1, 0, 1, 15));
  CHECK(result.total_samples() == 0);
}
