#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "aoi/error.hpp"
#include "aoi/mm1_model.hpp"
#include "aoi/queue_sim.hpp"

namespace {

using aoi::Errc;
using aoi::Error;
using namespace aoi::sim;

Errc error_code(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected aoi::Error";
  return Errc::InvalidParams;
}

SimConfig config(std::vector<double> lambdas, std::uint64_t events, std::uint64_t seed,
                 std::optional<std::size_t> buffer = std::nullopt) {
  SimConfig c;
  c.mu = 1.0;
  c.lambdas = std::move(lambdas);
  c.num_events = events;
  c.seed = seed;
  c.buffer = buffer;
  return c;
}

void expect_within_3se(double estimate, double se, double target) {
  EXPECT_GT(se, 0.0);
  EXPECT_LE(std::abs(estimate - target), 3.0 * se) << "estimate " << estimate << " se " << se;
}

TEST(VariateSource, UniformRangeAndExponentialMean) {
  VariateSource rng(5);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += rng.exponential(2.0);
  }
  // mean 0.5, sd 0.5 / sqrt(n)
  EXPECT_NEAR(sum / n, 0.5, 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(SimConfig, RejectsDegenerateSettings) {
  EXPECT_EQ(error_code([] { simulate(config({}, 100000, 1)); }), Errc::DegenerateConfig);
  EXPECT_EQ(error_code([] { simulate(config({0.0}, 100000, 1)); }), Errc::DegenerateConfig);
  EXPECT_EQ(error_code([] { simulate(config({0.5}, 9999, 1)); }), Errc::DegenerateConfig);
  EXPECT_EQ(error_code([] {
              auto c = config({0.5}, 100000, 1);
              c.batches = 1;
              simulate(c);
            }),
            Errc::DegenerateConfig);
  EXPECT_EQ(error_code([] {
              auto c = config({0.5}, 100000, 1);
              c.warmup_fraction = 1.0;
              simulate(c);
            }),
            Errc::DegenerateConfig);
  EXPECT_EQ(error_code([] { simulate(config({0.9, 0.9}, 100000, 1)); }), Errc::UnstableLoad);
  EXPECT_EQ(error_code([] { simulate_blocking_occupancy(config({0.5}, 100000, 1)); }),
            Errc::DegenerateConfig);
}

TEST(Simulate, OverloadedBlockingSystemIsAllowed) {
  const auto est = simulate(config({0.9, 0.9}, 100000, 1, 3));
  EXPECT_GT(est.blocked, 0u);
  EXPECT_EQ(est.occupancy.size(), 4u);
}

TEST(Simulate, SingleSourceMatchesClosedForm) {
  const auto est = simulate(config({0.5}, 10'000'000, 11));
  expect_within_3se(est.mean_age[0], est.std_error[0], 3.5);
}

TEST(Simulate, TwoSourcesMatchClosedForm) {
  const auto est = simulate(config({0.25, 0.25}, 10'000'000, 12));
  expect_within_3se(est.mean_age[0], est.std_error[0], 5.618033988749895);
  expect_within_3se(est.mean_age[1], est.std_error[1], 5.618033988749895);
}

TEST(Simulate, BlockingSystemMatchesHandSolve) {
  const auto est = simulate(config({0.5, 0.5}, 10'000'000, 13, 1));
  expect_within_3se(est.mean_age[0], est.std_error[0], 4.5);
}

TEST(Simulate, BlockingSystemMatchesGenericEngine) {
  const double expected = aoi::mm1::age_blocking({1.0, 0.3, 0.5, 3});
  const auto est = simulate(config({0.3, 0.5}, 4'000'000, 14, 3));
  expect_within_3se(est.mean_age[0], est.std_error[0], expected);
}

TEST(Simulate, DeliveriesAreInOrderWithPositiveAge) {
  std::vector<double> last(3, -1.0);
  std::uint64_t deliveries = 0;
  bool ordered = true;
  bool positive = true;
  const auto est = simulate(config({0.2, 0.3, 0.25}, 200000, 3), [&](const Delivery& d) {
    ordered = ordered && d.generated > last[d.source];
    positive = positive && d.delivered - d.generated > 0.0;
    last[d.source] = d.generated;
    ++deliveries;
  });
  EXPECT_TRUE(ordered);
  EXPECT_TRUE(positive);
  EXPECT_EQ(deliveries, 200000u);
  EXPECT_EQ(est.events, 200000u);
}

TEST(Simulate, DeterministicForSameSeed) {
  const auto c = config({0.3, 0.2}, 300000, 77, 4);
  const auto a = simulate(c);
  const auto b = simulate(c);
  EXPECT_EQ(a.mean_age, b.mean_age);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.occupancy, b.occupancy);
  EXPECT_EQ(a.horizon, b.horizon);
  const auto other = simulate(config({0.3, 0.2}, 300000, 78, 4));
  EXPECT_NE(a.mean_age, other.mean_age);
}

TEST(Simulate, EstimateInvariants) {
  const auto est = simulate(config({0.2, 0.4}, 500000, 8));
  double total = 0.0;
  for (double p : est.occupancy) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GT(est.mean_age[i], 0.0);
    EXPECT_GE(est.std_error[i], 0.0);
  }
  EXPECT_GT(est.horizon, 0.0);
}

TEST(Simulate, LittlesLaw) {
  for (std::optional<std::size_t> buffer : {std::optional<std::size_t>{1}, std::optional<std::size_t>{2},
                                            std::optional<std::size_t>{}}) {
    const auto est = simulate(config({0.5}, 2'000'000, 21, buffer));
    EXPECT_LE(std::abs(est.little_gap), 3.0 * est.little_gap_se);
    EXPECT_NEAR(est.mean_in_system, est.throughput * est.mean_system_time, 1e-3 * est.mean_in_system);
  }
}

TEST(SimulateBlockingOccupancy, MatchesTruncatedGeometric) {
  for (std::size_t m : {1u, 2u}) {
    auto c = config({0.5}, 2'000'000, 31 + m, m);
    const auto est = simulate(c);
    const auto expected = aoi::mm1::stationary_mm1(0.5, m);
    const auto occ = simulate_blocking_occupancy(c);
    ASSERT_EQ(occ.size(), m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      EXPECT_EQ(occ[k], est.occupancy[k]);
      expect_within_3se(occ[k], est.occupancy_se[k], expected[k]);
    }
  }
}

TEST(SimulateBlockingOccupancy, IdleSystemLimit) {
  const auto occ = simulate_blocking_occupancy(config({1e-4}, 20000, 5, 2));
  EXPECT_GT(occ[0], 0.99);
}

TEST(Simulate, UnboundedOccupancyIsGeometric) {
  const auto est = simulate(config({0.5}, 4'000'000, 41));
  for (std::size_t k = 0; k < 6; ++k) {
    expect_within_3se(est.occupancy[k], est.occupancy_se[k], 0.5 * std::pow(0.5, static_cast<double>(k)));
  }
}

}  // namespace
