#pragma once

// Two-timescale control: an ahead-of-time purchase E_i[n] per coarse interval
// chosen by projected stochastic subgradient steps, followed by the
// single-timescale controller with supply E_i[n] / T in every slot.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gridcomp/twet.hpp"

namespace gridcomp {

// Two-timescale theorem constants: M2 = (T/2) sum_i max(P_b_max, -P_b_min)^2,
// V_max = (C_max - C_min + T (P_b_min - P_b_max)) / (price_cap - sell_floor),
// Gamma = -V price_cap + T P_b_min - C_min.
TheoremConstants mtep_constants(const NetworkConfig& cfg, double price_cap, double sell_floor);
TheoremConstants mtep_constants(const NetworkConfig& cfg, const ScenarioParams& params);

struct PlannerParams {
  int max_iters = 50;  // J
  // mu_j = step0 / j; NaN selects T * P_c / (V * mean_buy_rt).
  double step0 = std::numeric_limits<double>::quiet_NaN();
  // Intervals with fewer stored slots plan E = A (no ahead purchase beyond the harvest).
  std::size_t history_min = 1;
  // Most recent slots kept for sampling; 0 keeps all.
  std::size_t history_capacity = 0;
  std::uint64_t seed = 0;  // mixed with the trace seed and the interval index
};

// Past real-time realizations, oldest first.
class RtHistory {
 public:
  explicit RtHistory(std::size_t capacity = 0) : capacity_(capacity) {}
  void push(const SlotRandomness* slot);
  std::size_t size() const { return slots_.size(); }
  const SlotRandomness& at(std::size_t i) const { return *slots_[i]; }

 private:
  std::size_t capacity_;
  std::vector<const SlotRandomness*> slots_;
};

// Subgradient of max{alpha (E - A), beta (E - A)}; the midpoint at E = A.
double subgrad_lt(double E, double A, double buy_lt, double sell_lt);

struct RtSubgradient {
  // Per BS, dF/dE_i / V where F(E) is the optimum of the sampled slot
  // program with supply E / T. Equals -beta/T in surplus and -alpha/T in
  // shortage; in between it is the multiplier-weighted price over -T.
  std::vector<double> slope;
  double value = 0.0;  // F(E)
};

RtSubgradient subgrad_rt(std::span<const double> E, const SlotRandomness& sample, std::span<const double> queue,
                         double V, const NetworkConfig& cfg, const conic::SolverSettings& settings = {});

// J subgradient steps from E_init projected onto [0, max_plan]; returns the
// average of iterates 1..J.
std::vector<double> plan_interval(std::span<const double> queue, const IntervalRandomness& lt,
                                  const RtHistory& history, const PlannerParams& params,
                                  const NetworkConfig& cfg, double V, std::span<const double> E_init,
                                  double mean_buy_rt, std::uint64_t stream,
                                  const conic::SolverSettings& settings = {});

// Sample average over slots of sum_i [V G_lt(E_i) + T F(E)], the planning objective.
double planning_objective(std::span<const double> E, std::span<const double> queue, const IntervalRandomness& lt,
                          std::span<const SlotRandomness> samples, const NetworkConfig& cfg, double V,
                          const conic::SolverSettings& settings = {});

RunMetrics mtep_run(const Trace& trace, const TwetParams& twet, const PlannerParams& planner);

}  // namespace gridcomp
