#include "gridcomp/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "gridcomp/baselines.hpp"
#include "gridcomp/conic/oracle.hpp"
#include "gridcomp/conic/slot_program.hpp"
#include "gridcomp/conic/solver.hpp"
#include "gridcomp/mtep.hpp"
#include "gridcomp/twet.hpp"

namespace gridcomp::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void record(CheckResult& r, bool ok, double err, const std::string& what) {
  ++r.cases;
  if (std::isfinite(err)) r.worst = std::max(r.worst, err);
  if (!ok) {
    if (r.failures == 0) r.detail = what;
    ++r.failures;
  }
}

std::string describe(int index, double a, double b) {
  std::ostringstream s;
  s.precision(12);
  s << "case " << index << ": " << a << " vs " << b;
  return s.str();
}

// Plans, queues and V of the two-timescale controller on the reference network.
struct PlanningSetup {
  NetworkConfig cfg;
  Trace trace;
  double V = 0.0;
  double gamma = 0.0;
};

PlanningSetup planning_setup(std::uint64_t seed) {
  PlanningSetup p;
  p.cfg = NetworkConfig::reference();
  ScenarioParams sp;
  sp.seed = seed;
  p.trace = generate_trace(p.cfg, sp, 40);
  const TheoremConstants k = mtep_constants(p.cfg, sp);
  p.V = 0.9 * k.v_max;
  p.gamma = k.gamma(p.V);
  return p;
}

std::vector<double> random_plan(Rng& rng, const NetworkConfig& cfg) {
  std::vector<double> E;
  for (int i = 0; i < cfg.num_bs; ++i) E.push_back(uniform(rng, 0.0, max_plan(cfg)));
  return E;
}

std::vector<double> random_queue(Rng& rng, const NetworkConfig& cfg, double gamma) {
  std::vector<double> q;
  for (int i = 0; i < cfg.num_bs; ++i) q.push_back(uniform(rng, cfg.battery_min, cfg.battery_max) + gamma);
  return q;
}

}  // namespace

TinyInstance random_tiny_instance(Rng& rng) {
  TinyInstance t;
  NetworkConfig& c = t.cfg;
  c.num_bs = pick(rng, 1, 2);
  c.num_antennas = pick(rng, 1, 2);
  c.num_users = pick(rng, 1, 2);
  c.sinr_targets.clear();
  c.noise_vars.clear();
  for (int k = 0; k < c.num_users; ++k) {
    c.sinr_targets.push_back(db_to_linear(uniform(rng, -3.0, 6.0)));
    c.noise_vars.push_back(uniform(rng, 0.5, 2.0));
  }
  c.circuit_power = uniform(rng, 0.5, 2.0);
  c.max_consumption = uniform(rng, 4.0, 20.0);
  c.charge_min = uniform(rng, -3.0, -0.5);
  c.charge_max = uniform(rng, 0.5, 3.0);
  c.validate();
  t.h = draw_channels(rng, c);
  t.buy = uniform(rng, 0.5, 5.0);
  t.sell = t.buy * uniform(rng, 0.0, 1.0);
  t.V = uniform(rng, 0.5, 20.0);
  for (int i = 0; i < c.num_bs; ++i) {
    t.supply.push_back(uniform(rng, 0.0, 6.0));
    t.queue.push_back(t.V * t.buy * uniform(rng, -1.2, 0.2));
  }
  return t;
}

CheckResult check_oracle_equivalence(int instances, std::uint64_t seed, double rel_tol, int grid_density) {
  CheckResult r;
  r.name = "oracle equivalence";
  Rng rng = make_rng(seed, 0x0AC1E);
  for (int n = 0; n < instances; ++n) {
    const TinyInstance t = random_tiny_instance(rng);
    const conic::ConicProgram prog =
        conic::build_slot_program(t.cfg, t.h, t.buy, t.sell, t.supply, t.V, t.queue);
    const conic::ConicSolution sol = conic::solve(prog);
    const double oracle = conic::oracle_solve(t.cfg, t.h, t.buy, t.sell, t.supply, t.V, t.queue, grid_density);
    if (sol.status == conic::Status::infeasible) {
      record(r, oracle == kInf, 0.0, describe(n, kInf, oracle) + " (solver infeasible)");
      continue;
    }
    if (!sol.solved()) {
      record(r, false, kInf, "case " + std::to_string(n) + ": solver status " + std::string(to_string(sol.status)));
      continue;
    }
    const double err = std::abs(sol.objective - oracle) / std::max(std::abs(oracle), 1e-12);
    record(r, err <= rel_tol, err, describe(n, sol.objective, oracle));
  }
  return r;
}

CheckResult check_single_user_closed_form(int instances, std::uint64_t seed, double rel_tol) {
  CheckResult r;
  r.name = "single-user closed form";
  Rng rng = make_rng(seed, 0xC105ED);
  conic::SlotOptions opt;
  opt.fix_charge = true;
  for (int n = 0; n < instances; ++n) {
    NetworkConfig c;
    c.num_bs = pick(rng, 1, 2);
    c.num_antennas = pick(rng, 1, 2);
    c.num_users = 1;
    const double gamma = db_to_linear(uniform(rng, -5.0, 10.0));
    const double noise = uniform(rng, 0.2, 3.0);
    c.sinr_targets = {gamma};
    c.noise_vars = {noise};
    c.max_consumption = 1e6;
    c.validate();
    const ChannelState h = draw_channels(rng, c);
    // Linear cost at unit price with supply equal to P_c leaves the total
    // transmit power as the objective.
    const std::vector<double> supply(static_cast<std::size_t>(c.num_bs), c.circuit_power);
    const std::vector<double> queue(static_cast<std::size_t>(c.num_bs), 0.0);
    const conic::ConicSolution sol =
        conic::solve(conic::build_slot_program(c, h, 1.0, 1.0, supply, 1.0, queue, opt));
    const double expect = gamma * noise / h.H.col(0).squaredNorm();
    if (!sol.solved()) {
      record(r, false, kInf, "case " + std::to_string(n) + ": solver status " + std::string(to_string(sol.status)));
      continue;
    }
    const double err = std::abs(sol.objective - expect) / expect;
    record(r, err <= rel_tol, err, describe(n, sol.objective, expect));
  }
  return r;
}

CheckResult check_subgradient_convexity(int pairs, std::uint64_t seed, double slack) {
  CheckResult r;
  r.name = "subgradient convexity";
  const PlanningSetup p = planning_setup(seed);
  Rng rng = make_rng(seed, 0xC0E7);
  std::uniform_int_distribution<std::size_t> slot(0, p.trace.slots.size() - 1);
  for (int n = 0; n < pairs; ++n) {
    const SlotRandomness& s = p.trace.slots[slot(rng)];
    const auto q = random_queue(rng, p.cfg, p.gamma);
    const auto E = random_plan(rng, p.cfg);
    const auto E2 = random_plan(rng, p.cfg);
    const RtSubgradient at = subgrad_rt(E, s, q, p.V, p.cfg);
    const double f2 = subgrad_rt(E2, s, q, p.V, p.cfg).value;
    double lin = at.value;
    for (int i = 0; i < p.cfg.num_bs; ++i) lin += p.V * at.slope[i] * (E2[i] - E[i]);
    const double violation = lin - f2;
    record(r, violation <= slack, std::max(violation, 0.0), describe(n, f2, lin));
  }
  return r;
}

CheckResult check_subgradient_finite_difference(int pairs, std::uint64_t seed) {
  CheckResult r;
  r.name = "subgradient finite difference";
  const PlanningSetup p = planning_setup(seed);
  Rng rng = make_rng(seed, 0xFD);
  std::uniform_int_distribution<std::size_t> slot(0, p.trace.slots.size() - 1);
  const double h = 1e-2;
  for (int n = 0; n < pairs; ++n) {
    const SlotRandomness& s = p.trace.slots[slot(rng)];
    const auto q = random_queue(rng, p.cfg, p.gamma);
    auto E = random_plan(rng, p.cfg);
    const int i = pick(rng, 0, p.cfg.num_bs - 1);
    E[i] = std::clamp(E[i], h, max_plan(p.cfg) - h);
    const RtSubgradient at = subgrad_rt(E, s, q, p.V, p.cfg);
    auto shifted = [&](double d) {
      auto e = E;
      e[i] += d;
      return subgrad_rt(e, s, q, p.V, p.cfg).value;
    };
    const double fp = shifted(h), fm = shifted(-h);
    const double fwd = (fp - at.value) / h, bwd = (at.value - fm) / h;
    const double g = p.V * at.slope[i];
    const double tol = std::max(1e-4, 1e-3 * std::abs(g));
    if (std::abs(fwd - bwd) > tol) {
      ++r.skipped;  // kink within the stencil
      continue;
    }
    const double central = (fp - fm) / (2.0 * h);
    const double err = std::abs(central - g);
    record(r, err <= tol, err / tol, describe(n, central, g));
  }
  return r;
}

CheckResult check_run_invariants(std::uint64_t seed, int intervals) {
  CheckResult r;
  r.name = "run invariants";
  NetworkConfig cfg = NetworkConfig::reference();
  ScenarioParams sp;
  sp.seed = seed;
  const Trace trace = generate_trace(cfg, sp, intervals);
  auto check = [&](const std::string& name, const RunMetrics& m, bool planned) {
    const double mean = [&] {
      double s = 0.0;
      for (double c : m.cost_series) s += c;
      return s / static_cast<double>(m.cost_series.size());
    }();
    double err = std::abs(mean - m.avg_cost) / std::max(1.0, std::abs(mean));
    bool ok = m.violations() == 0 && err <= 1e-12 && m.cost_series.size() == trace.slots.size();
    for (const auto& series : m.battery_series)
      for (double c : series) ok = ok && c >= cfg.battery_min - kChargeTol && c <= cfg.battery_max + kChargeTol;
    if (planned) {
      ok = ok && m.plans.size() == trace.intervals.size();
      for (const auto& plan : m.plans)
        for (double e : plan) ok = ok && e >= 0.0 && e <= max_plan(cfg);
    }
    record(r, ok, err, name + ": violations " + std::to_string(m.violations()));
  };
  try {
    check("twet", twet_run(trace, {}), false);
    check("mtep", mtep_run(trace, {}, {}), true);
    check("heu", heuristic_run(trace), false);
    check("offline", offline_solve(trace).metrics, true);
    OfflineParams single;
    single.mode = OfflineMode::single_timescale;
    check("offline single-timescale", offline_solve(trace, single).metrics, false);
  } catch (const std::exception& e) {
    record(r, false, kInf, e.what());
  }
  return r;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  return {check_oracle_equivalence(opt.oracle_instances, opt.seed),
          check_single_user_closed_form(opt.closed_form_instances, opt.seed),
          check_subgradient_convexity(opt.subgradient_pairs, opt.seed),
          check_subgradient_finite_difference(opt.subgradient_pairs, opt.seed),
          check_run_invariants(opt.seed, opt.run_intervals)};
}

}  // namespace gridcomp::harness
