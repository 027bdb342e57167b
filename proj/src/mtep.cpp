#include "gridcomp/mtep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "gridcomp/errors.hpp"

namespace gridcomp {

TheoremConstants mtep_constants(const NetworkConfig& cfg, double price_cap, double sell_floor) {
  if (!(price_cap > sell_floor)) throw InvalidArgument("price cap must exceed the sell floor");
  const double T = cfg.interval_len;
  TheoremConstants k;
  k.price_cap = price_cap;
  k.sell_floor = sell_floor;
  const double swing = std::max(cfg.charge_max, -cfg.charge_min);
  k.gap_constant = 0.5 * T * cfg.num_bs * swing * swing;
  k.v_max = (cfg.battery_max - cfg.battery_min + T * (cfg.charge_min - cfg.charge_max)) / (price_cap - sell_floor);
  k.gamma_shift = T * cfg.charge_min - cfg.battery_min;
  return k;
}

TheoremConstants mtep_constants(const NetworkConfig& cfg, const ScenarioParams& params) {
  return mtep_constants(cfg, params.effective_price_cap(), 0.0);
}

void RtHistory::push(const SlotRandomness* slot) {
  if (capacity_ == 0 || slots_.size() < capacity_) {
    slots_.push_back(slot);
    return;
  }
  // keep chronological order: drop the oldest
  std::rotate(slots_.begin(), slots_.begin() + 1, slots_.end());
  slots_.back() = slot;
}

double subgrad_lt(double E, double A, double buy_lt, double sell_lt) {
  if (!(buy_lt >= sell_lt)) throw InvalidArgument("subgrad_lt: need buy >= sell");
  if (E > A) return buy_lt;
  if (E < A) return sell_lt;
  return 0.5 * (buy_lt + sell_lt);
}

RtSubgradient subgrad_rt(std::span<const double> E, const SlotRandomness& sample, std::span<const double> queue,
                         double V, const NetworkConfig& cfg, const conic::SolverSettings& settings) {
  const double T = cfg.interval_len;
  std::vector<double> supply(E.begin(), E.end());
  for (double& a : supply) a /= T;
  const auto d = conic::solve_slot(cfg, sample.channels, sample.buy_price, sample.sell_price, supply, V, queue,
                                   {}, settings);
  RtSubgradient g;
  g.value = d.objective;
  for (double p : d.marginal_price) g.slope.push_back(-p / T);
  return g;
}

std::vector<double> plan_interval(std::span<const double> queue, const IntervalRandomness& lt,
                                  const RtHistory& history, const PlannerParams& params,
                                  const NetworkConfig& cfg, double V, std::span<const double> E_init,
                                  double mean_buy_rt, std::uint64_t stream,
                                  const conic::SolverSettings& settings) {
  const int I = cfg.num_bs;
  const double T = cfg.interval_len;
  if (static_cast<int>(E_init.size()) != I || static_cast<int>(queue.size()) != I)
    throw ShapeMismatch("plan_interval: one value per BS");
  const double cap = max_plan(cfg);
  std::vector<double> E(E_init.begin(), E_init.end());
  for (double& e : E) e = std::clamp(e, 0.0, cap);
  if (params.max_iters <= 0) return E;
  if (history.size() == 0) throw InvalidArgument("plan_interval: empty history");

  const double step0 = std::isnan(params.step0)
                           ? T * cfg.circuit_power / (std::max(V, 1e-12) * mean_buy_rt)
                           : params.step0;
  Rng rng = make_rng(params.seed, stream);
  std::uniform_int_distribution<std::size_t> pick(0, history.size() - 1);
  std::vector<double> avg(static_cast<std::size_t>(I), 0.0);
  for (int j = 1; j <= params.max_iters; ++j) {
    const SlotRandomness& sample = history.at(pick(rng));
    const RtSubgradient rt = subgrad_rt(E, sample, queue, V, cfg, settings);
    const double mu = step0 / j;
    for (int i = 0; i < I; ++i) {
      const double g = V * subgrad_lt(E[i], lt.res_arrivals[i], lt.buy_price_lt, lt.sell_price_lt) +
                       V * T * rt.slope[i];
      E[i] = std::clamp(E[i] - mu * g, 0.0, cap);
      avg[i] += (E[i] - avg[i]) / j;
    }
  }
  return avg;
}

double planning_objective(std::span<const double> E, std::span<const double> queue, const IntervalRandomness& lt,
                          std::span<const SlotRandomness> samples, const NetworkConfig& cfg, double V,
                          const conic::SolverSettings& settings) {
  if (samples.empty()) throw InvalidArgument("planning_objective: no samples");
  double lt_part = 0.0;
  for (int i = 0; i < cfg.num_bs; ++i)
    lt_part += V * lt_cost(E[i], lt.res_arrivals[i], lt.buy_price_lt, lt.sell_price_lt);
  double rt_part = 0.0;
  for (const auto& s : samples) rt_part += subgrad_rt(E, s, queue, V, cfg, settings).value;
  return lt_part + cfg.interval_len * rt_part / static_cast<double>(samples.size());
}

RunMetrics mtep_run(const Trace& trace, const TwetParams& twet, const PlannerParams& planner) {
  const auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& cfg = trace.config;
  const int I = cfg.num_bs, T = cfg.interval_len;
  const TheoremConstants k = mtep_constants(cfg, trace.params);
  const auto c0 = initial_levels(cfg, twet.initial_battery);
  ControllerState st = twet_init(cfg, c0, twet, k);

  PlannerParams pp = planner;
  pp.seed = make_rng(trace.params.seed, 0x9A11ULL + planner.seed)();

  RunMetrics m;
  m.battery_series.resize(static_cast<std::size_t>(I));
  m.charge_series.resize(static_cast<std::size_t>(I));
  for (int i = 0; i < I; ++i) m.battery_series[i].push_back(st.battery[i]);

  RtHistory history(pp.history_capacity);
  std::vector<double> prev;
  for (int n = 0; n < trace.num_intervals(); ++n) {
    const IntervalRandomness& lt = trace.intervals[n];
    std::vector<double> E;
    if (history.size() < pp.history_min) {
      E = lt.res_arrivals;
    } else {
      const std::vector<double>& init = prev.empty() ? lt.res_arrivals : prev;
      E = plan_interval(st.virtual_queue, lt, history, pp, cfg, st.penalty_weight, init,
                        trace.params.mean_buy_rt, static_cast<std::uint64_t>(n), twet.solver);
    }
    st.plan = E;
    prev = E;
    m.plans.push_back(E);
    double lt_share = 0.0;
    for (int i = 0; i < I; ++i) lt_share += lt_cost(E[i], lt.res_arrivals[i], lt.buy_price_lt, lt.sell_price_lt) / T;
    std::vector<double> supply(E);
    for (double& a : supply) a /= T;

    for (int t = n * T; t < (n + 1) * T; ++t) {
      const SlotRandomness& slot = trace.slots[t];
      const StepOutcome o = twet_step(st, slot, supply, cfg, twet.solver);
      audit_slot(cfg, slot.channels, o.decision.w, m);
      m.cost_series.push_back(lt_share + o.cost);
      for (int i = 0; i < I; ++i) {
        m.battery_series[i].push_back(st.battery[i]);
        m.charge_series[i].push_back(o.decision.charge[i]);
      }
      history.push(&slot);
    }
  }
  finalize(m);
  m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

}  // namespace gridcomp
