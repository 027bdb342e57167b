#include "gridcomp/twet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridcomp/errors.hpp"

namespace gridcomp {

TheoremConstants twet_constants(const NetworkConfig& cfg, double price_cap, double sell_floor) {
  if (!(price_cap > sell_floor)) throw InvalidArgument("price cap must exceed the sell floor");
  TheoremConstants k;
  k.price_cap = price_cap;
  k.sell_floor = sell_floor;
  const double swing = std::max(cfg.charge_max, -cfg.charge_min);
  k.gap_constant = 0.5 * cfg.num_bs * swing * swing;
  k.v_max = (cfg.battery_max - cfg.battery_min + cfg.charge_min - cfg.charge_max) / (price_cap - sell_floor);
  k.gamma_shift = cfg.charge_min - cfg.battery_min;
  return k;
}

TheoremConstants twet_constants(const NetworkConfig& cfg, const ScenarioParams& params) {
  return twet_constants(cfg, params.effective_price_cap(), 0.0);
}

double resolve_v(const TwetParams& params, const TheoremConstants& k) {
  const double V = std::isnan(params.V) ? params.v_fraction * k.v_max : params.V;
  if (!(V >= 0.0) || !std::isfinite(V)) throw InvalidArgument("V must be finite and >= 0");
  if (params.strict_v && V > k.v_max * (1.0 + 1e-12))
    throw InvalidArgument("V = " + std::to_string(V) + " exceeds V_max = " + std::to_string(k.v_max));
  return V;
}

std::vector<double> initial_levels(const NetworkConfig& cfg, double initial_battery) {
  const double c0 = std::isnan(initial_battery) ? cfg.battery_min : initial_battery;
  if (c0 < cfg.battery_min || c0 > cfg.battery_max) throw InvalidArgument("initial battery out of bounds");
  return std::vector<double>(static_cast<std::size_t>(cfg.num_bs), c0);
}

ControllerState twet_init(const NetworkConfig& cfg, std::span<const double> initial_battery,
                          const TwetParams& params, const TheoremConstants& k) {
  cfg.validate();
  if (static_cast<int>(initial_battery.size()) != cfg.num_bs) throw ShapeMismatch("one battery level per BS");
  ControllerState st;
  st.penalty_weight = resolve_v(params, k);
  st.perturbation = params.gamma ? *params.gamma : k.gamma(st.penalty_weight);
  for (double c : initial_battery) {
    if (c < cfg.battery_min || c > cfg.battery_max) throw InvalidArgument("initial battery out of bounds");
    st.battery.push_back(c);
    st.virtual_queue.push_back(c + st.perturbation);
  }
  return st;
}

StepOutcome twet_step(ControllerState& state, const SlotRandomness& slot, std::span<const double> supply,
                      const NetworkConfig& cfg, const conic::SolverSettings& settings) {
  StepOutcome out;
  out.decision = conic::solve_slot(cfg, slot.channels, slot.buy_price, slot.sell_price, supply,
                                   state.penalty_weight, state.virtual_queue, {}, settings);
  out.cost = out.decision.cost;
  for (int i = 0; i < cfg.num_bs; ++i) {
    try {
      state.battery[i] = battery_step(state.battery[i], out.decision.charge[i], cfg, kChargeTol);
    } catch (const BatteryBoundViolation& e) {
      throw BatteryBoundViolation(i, e.level());
    }
    state.virtual_queue[i] = state.battery[i] + state.perturbation;
  }
  return out;
}

RunMetrics twet_run(const Trace& trace, const TwetParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& cfg = trace.config;
  const TheoremConstants k = twet_constants(cfg, trace.params);
  const auto c0 = initial_levels(cfg, params.initial_battery);
  ControllerState st = twet_init(cfg, c0, params, k);

  RunMetrics m;
  m.battery_series.resize(static_cast<std::size_t>(cfg.num_bs));
  m.charge_series.resize(static_cast<std::size_t>(cfg.num_bs));
  for (int i = 0; i < cfg.num_bs; ++i) m.battery_series[i].push_back(st.battery[i]);
  for (const auto& slot : trace.slots) {
    const StepOutcome o = twet_step(st, slot, slot.res_arrivals, cfg, params.solver);
    audit_slot(cfg, slot.channels, o.decision.w, m);
    m.cost_series.push_back(o.cost);
    for (int i = 0; i < cfg.num_bs; ++i) {
      m.battery_series[i].push_back(st.battery[i]);
      m.charge_series[i].push_back(o.decision.charge[i]);
    }
  }
  finalize(m);
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace gridcomp
