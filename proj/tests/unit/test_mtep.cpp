#include <doctest.h>

#include <cmath>

#include "gridcomp/errors.hpp"
#include "gridcomp/harness/verify.hpp"
#include "gridcomp/mtep.hpp"
#include "helpers.hpp"

using namespace gridcomp;

namespace {

RtHistory history_of(const Trace& t) {
  RtHistory h;
  for (const auto& s : t.slots) h.push(&s);
  return h;
}

}  // namespace

TEST_SUITE("mtep") {

TEST_CASE("long-term subgradient branches") {
  CHECK(subgrad_lt(10.0, 8.0, 1.5, 1.35) == 1.5);
  CHECK(subgrad_lt(8.0, 10.0, 1.5, 1.35) == 1.35);
  CHECK(subgrad_lt(9.0, 9.0, 1.5, 1.35) == doctest::Approx(1.425));
  CHECK_THROWS_AS(subgrad_lt(1.0, 1.0, 1.0, 2.0), InvalidArgument);
}

TEST_CASE("real-time subgradient in the surplus and shortage regimes") {
  const NetworkConfig c = NetworkConfig::reference();
  const Trace tr = testing::reference_trace(2, 5);
  const auto& s = tr.slots[0];
  const std::vector<double> q{-5.0, -5.0};
  const RtSubgradient surplus = subgrad_rt(std::vector<double>{500.0, 500.0}, s, q, 3.0, c);
  const RtSubgradient empty = subgrad_rt(std::vector<double>{0.0, 0.0}, s, q, 3.0, c);
  for (int i = 0; i < 2; ++i) {
    CHECK(surplus.slope[i] == doctest::Approx(-s.sell_price / 5.0).epsilon(1e-6));
    CHECK(empty.slope[i] == doctest::Approx(-s.buy_price / 5.0).epsilon(1e-6));
  }
  CHECK(surplus.value < empty.value);
}

TEST_CASE("subgradients satisfy the convexity inequality and finite differences") {
  const auto conv = harness::check_subgradient_convexity(60, 2);
  CHECK_MESSAGE(conv.passed(), conv.detail);
  const auto fd = harness::check_subgradient_finite_difference(60, 2);
  CHECK_MESSAGE(fd.passed(), fd.detail);
}

TEST_CASE("two-timescale theorem constants on the reference network") {
  const NetworkConfig c = NetworkConfig::reference();
  const TheoremConstants k = mtep_constants(c, 6.9, 0.0);
  CHECK(k.gap_constant == doctest::Approx(20.0));
  CHECK(k.v_max == doctest::Approx(40.0 / 6.9));
  CHECK(k.gamma(0.0) == doctest::Approx(-10.0));
}

TEST_CASE("zero iterations return the projected warm start") {
  const NetworkConfig c = NetworkConfig::reference();
  const Trace tr = testing::reference_trace(1, 1);
  PlannerParams p;
  p.max_iters = 0;
  const std::vector<double> q{0.0, 0.0}, init{-3.0, 1e9};
  const RtHistory empty;
  const auto E = plan_interval(q, tr.intervals[0], empty, p, c, 1.0, init, 2.3, 0);
  CHECK(E[0] == 0.0);
  CHECK(E[1] == max_plan(c));
  p.max_iters = 5;
  CHECK_THROWS_AS(plan_interval(q, tr.intervals[0], empty, p, c, 1.0, init, 2.3, 0), InvalidArgument);
}

TEST_CASE("equal ahead and real-time prices make planning value-indifferent") {
  const NetworkConfig c = testing::scalar_network();
  const Trace tr = testing::constant_trace(c, 4, 2.0, 0.6, 2.0, 0.6, 5.0);
  const RtHistory h = history_of(tr);
  PlannerParams p;
  p.max_iters = 50;
  const std::vector<double> q{-8.0};
  const double V = 2.0;
  const auto& lt = tr.intervals[0];
  const auto E = plan_interval(q, lt, h, p, c, V, lt.res_arrivals, 2.0, 3);
  const std::span<const SlotRandomness> samples(tr.slots.data(), 1);
  const double at_plan = planning_objective(E, q, lt, samples, c, V);
  const double at_harvest = planning_objective(lt.res_arrivals, q, lt, samples, c, V);
  CHECK(at_plan == doctest::Approx(at_harvest).epsilon(1e-3));
}

TEST_CASE("cheap ahead energy is bought until the sale branch binds") {
  const NetworkConfig c = testing::scalar_network();
  // Ahead purchases at 0.1 against real-time sales at 0.6.
  const Trace tr = testing::constant_trace(c, 2, 2.0, 0.6, 0.1, 0.09, 0.0);
  const RtHistory h = history_of(tr);
  PlannerParams p;
  p.max_iters = 50;
  const std::vector<double> q{-8.0}, zero{0.0};
  const double V = 2.0;
  const auto& lt = tr.intervals[0];
  const auto E = plan_interval(q, lt, h, p, c, V, zero, 2.0, 1);
  const std::span<const SlotRandomness> samples(tr.slots.data(), 1);
  CHECK(E[0] > 5.0);
  CHECK(planning_objective(E, q, lt, samples, c, V) <= planning_objective(zero, q, lt, samples, c, V));
}

TEST_CASE("planned runs: shapes, plan bounds and battery feasibility") {
  const Trace tr = testing::reference_trace(12, 6);
  const RunMetrics m = mtep_run(tr, {}, {});
  CHECK(m.cost_series.size() == 60);
  REQUIRE(m.plans.size() == 12);
  for (const auto& plan : m.plans)
    for (double e : plan) {
      CHECK(e >= 0.0);
      CHECK(e <= max_plan(tr.config));
    }
  CHECK(m.plans[0] == tr.intervals[0].res_arrivals);
  CHECK(m.violations() == 0);
  for (const auto& b : m.battery_series)
    for (double level : b) {
      CHECK(level >= tr.config.battery_min - 1e-9);
      CHECK(level <= tr.config.battery_max + 1e-9);
    }
  const RunMetrics again = mtep_run(tr, {}, {});
  CHECK(again.cost_series == m.cost_series);
}

TEST_CASE("with T = 1 and real-time level ahead prices planning matches single-timescale control") {
  NetworkConfig c = NetworkConfig::reference();
  c.interval_len = 1;
  ScenarioParams sp;
  sp.seed = 14;
  Trace tr = generate_trace(c, sp, 150);
  for (auto& iv : tr.intervals) {
    iv.buy_price_lt = sp.mean_buy_rt;
    iv.sell_price_lt = sp.sell_ratio_rt * sp.mean_buy_rt;
  }
  const RunMetrics a = twet_run(tr, {}), b = mtep_run(tr, {}, {});
  auto stderr_of = [](const RunMetrics& m) {
    double s = 0.0;
    for (double x : m.cost_series) s += (x - m.avg_cost) * (x - m.avg_cost);
    return std::sqrt(s / (m.cost_series.size() - 1) / m.cost_series.size());
  };
  const double noise = 3.0 * std::hypot(stderr_of(a), stderr_of(b));
  CHECK(std::abs(a.avg_cost - b.avg_cost) <= noise);
}

}
