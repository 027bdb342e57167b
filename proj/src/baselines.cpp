#include "gridcomp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridcomp/conic/slot_program.hpp"
#include "gridcomp/errors.hpp"
#include "gridcomp/twet.hpp"

namespace gridcomp {

RunMetrics heuristic_run(const Trace& trace, const conic::SolverSettings& settings) {
  const auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& cfg = trace.config;
  const int I = cfg.num_bs;
  const std::vector<double> zero(static_cast<std::size_t>(I), 0.0);
  const double c0 = cfg.battery_min;
  RunMetrics m;
  m.battery_series.assign(static_cast<std::size_t>(I), {c0});
  m.charge_series.resize(static_cast<std::size_t>(I));
  conic::SlotOptions opt;
  opt.fix_charge = true;
  for (const auto& slot : trace.slots) {
    const auto d = conic::solve_slot(cfg, slot.channels, slot.buy_price, slot.sell_price, slot.res_arrivals,
                                     1.0, zero, opt, settings);
    audit_slot(cfg, slot.channels, d.w, m);
    m.cost_series.push_back(d.cost);
    for (int i = 0; i < I; ++i) {
      m.battery_series[i].push_back(c0);
      m.charge_series[i].push_back(0.0);
    }
  }
  finalize(m);
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

OfflineResult offline_solve(const Trace& trace, const OfflineParams& params) {
  const NetworkConfig& cfg = trace.config;
  const int I = cfg.num_bs, K = cfg.num_users, R = cfg.rows(), T = cfg.interval_len;
  const int NT = trace.num_slots(), N = trace.num_intervals();
  if (NT < 1) throw InvalidArgument("offline_solve: empty trace");
  if (NT > params.max_slots)
    throw InvalidArgument("offline_solve: horizon of " + std::to_string(NT) + " slots exceeds the guard of " +
                          std::to_string(params.max_slots));
  const bool planned = params.mode == OfflineMode::two_timescale;
  const double c0 = initial_levels(cfg, params.initial_battery).front();
  const double scale = 1.0 / NT;

  using conic::AffineExpr;
  conic::ProgramBuilder b;
  std::vector<conic::BeamformingBlock> blocks;
  std::vector<conic::Slice> pb(static_cast<std::size_t>(NT)), s(static_cast<std::size_t>(NT));
  for (int t = 0; t < NT; ++t) {
    const std::string tag = "t" + std::to_string(t) + ".";
    blocks.push_back(conic::add_beamforming(b, cfg, trace.slots[t].channels, tag));
    pb[t] = b.add_vars(tag + "Pb", I);
    s[t] = b.add_vars(tag + "s", I);
  }
  const conic::Slice C = b.add_vars("C", NT * I);
  conic::Slice E, L;
  if (planned) {
    E = b.add_vars("E", N * I);
    L = b.add_vars("l", N * I);
    for (int n = 0; n < N; ++n) {
      const auto& iv = trace.intervals[n];
      for (int i = 0; i < I; ++i) {
        const int e = E[n * I + i], l = L[n * I + i];
        b.set_cost(l, scale);
        b.add_nonneg(AffineExpr{}.add(e, 1.0));
        b.add_nonneg(AffineExpr(max_plan(cfg)).add(e, -1.0));
        for (double price : {iv.buy_price_lt, iv.sell_price_lt})
          b.add_nonneg(AffineExpr(price * iv.res_arrivals[i]).add(l, 1.0).add(e, -price));
      }
    }
  }

  for (int t = 0; t < NT; ++t) {
    const auto& slot = trace.slots[t];
    const int n = t / T;
    for (int i = 0; i < I; ++i) {
      const int c = C[t * I + i];
      b.set_cost(s[t][i], scale);
      b.add_nonneg(AffineExpr(-cfg.charge_min).add(pb[t][i], 1.0));
      b.add_nonneg(AffineExpr(cfg.charge_max).add(pb[t][i], -1.0));
      b.add_nonneg(AffineExpr(-cfg.battery_min).add(c, 1.0));
      b.add_nonneg(AffineExpr(cfg.battery_max).add(c, -1.0));
      AffineExpr chain = AffineExpr{}.add(c, 1.0).add(pb[t][i], -1.0);
      if (t == 0)
        chain.shift(-c0);
      else
        chain.add(C[(t - 1) * I + i], -1.0);
      b.add_zero(std::move(chain));
      for (double price : {slot.buy_price, slot.sell_price}) {
        // s >= price * (P_c + p - supply + P_b)
        AffineExpr e(-price * cfg.circuit_power);
        e.add(s[t][i], 1.0).add(blocks[t].power[i], -price).add(pb[t][i], -price);
        if (planned)
          e.add(E[n * I + i], price / T);
        else
          e.shift(price * slot.res_arrivals[i]);
        b.add_nonneg(std::move(e));
      }
    }
  }

  if (params.energy_neutral)
    for (int i = 0; i < I; ++i) b.add_nonneg(AffineExpr(-c0).add(C[(NT - 1) * I + i], 1.0));

  const conic::ConicProgram prog = std::move(b).finish();
  OfflineResult res;
  res.raw = conic::solve(prog, params.solver);
  if (!res.raw.solved())
    throw SolverFailure(std::string("offline program not solved: ") + std::string(conic::to_string(res.raw.status)));
  res.objective = res.raw.objective;
  const Eigen::VectorXd& x = res.raw.x;

  OfflineSchedule& sch = res.schedule;
  RunMetrics& m = res.metrics;
  if (planned)
    for (int n = 0; n < N; ++n) {
      std::vector<double> plan;
      for (int i = 0; i < I; ++i) plan.push_back(std::clamp(x[E[n * I + i]], 0.0, max_plan(cfg)));
      sch.plans.push_back(plan);
    }
  sch.battery.assign(static_cast<std::size_t>(I), {c0});
  m.charge_series.resize(static_cast<std::size_t>(I));
  for (int t = 0; t < NT; ++t) {
    const auto& slot = trace.slots[t];
    const int n = t / T;
    Beamformers w;
    w.W.resize(R, K);
    for (int k = 0; k < K; ++k)
      for (int r = 0; r < R; ++r) w.W(r, k) = {x[blocks[t].w[k][r]], x[blocks[t].w[k][R + r]]};
    audit_slot(cfg, slot.channels, w, m);
    std::vector<double> charge;
    double cost = 0.0;
    for (int i = 0; i < I; ++i) {
      const double p = x[pb[t][i]];
      charge.push_back(p);
      try {
        sch.battery[i].push_back(battery_step(sch.battery[i].back(), p, cfg, kChargeTol));
      } catch (const BatteryBoundViolation& e) {
        throw BatteryBoundViolation(i, e.level());
      }
      m.charge_series[i].push_back(p);
      const double pg = cfg.circuit_power + bs_power(w, i, cfg);
      if (planned) {
        const auto& iv = trace.intervals[n];
        cost += slot_cost_mtep(sch.plans[n][i], iv.res_arrivals[i], iv.buy_price_lt, iv.sell_price_lt,
                               slot.buy_price, slot.sell_price, pg, p, T);
      } else {
        cost += transaction_cost(pg - slot.res_arrivals[i] + p, slot.buy_price, slot.sell_price);
      }
    }
    sch.w.push_back(std::move(w));
    sch.charge.push_back(std::move(charge));
    m.cost_series.push_back(cost);
  }
  m.battery_series = sch.battery;
  m.plans = sch.plans;
  finalize(m);
  res.avg_cost = m.avg_cost;
  return res;
}

}  // namespace gridcomp
