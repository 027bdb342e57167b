#pragma once

// Single-timescale online control: one drift-plus-penalty slot program per
// slot, real-time two-way trading and battery (dis)charging.

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gridcomp/conic/slot_program.hpp"
#include "gridcomp/metrics.hpp"
#include "gridcomp/scenario.hpp"

namespace gridcomp {

// Queue initialization and penalty-weight cap of the feasibility guarantee.
struct TheoremConstants {
  double price_cap = 0.0;   // largest buy price
  double sell_floor = 0.0;  // smallest sell price
  double gap_constant = 0.0;  // M1 (single timescale) or M2 (planned)
  double v_max = 0.0;
  // Gamma(V) = -V * price_cap + shift
  double gamma_shift = 0.0;

  double gamma(double V) const { return -V * price_cap + gamma_shift; }
};

// M1 = 1/2 sum_i max(P_b_max, -P_b_min)^2,
// V_max = (C_max - C_min + P_b_min - P_b_max) / (price_cap - sell_floor),
// Gamma = -V price_cap + P_b_min - C_min.
TheoremConstants twet_constants(const NetworkConfig& cfg, double price_cap, double sell_floor);

// Constants for a trace's scenario: the price cap is the generator's
// truncation point and the sell floor is zero.
TheoremConstants twet_constants(const NetworkConfig& cfg, const ScenarioParams& params);

struct TwetParams {
  // NaN selects 0.9 * V_max.
  double V = std::numeric_limits<double>::quiet_NaN();
  // V as a fraction of V_max; used when V is NaN.
  double v_fraction = 0.9;
  // Queue perturbation; empty derives it from the theorem constants.
  std::optional<double> gamma;
  // Reject V > V_max.
  bool strict_v = true;
  // Initial battery level of every BS; NaN selects C_min.
  double initial_battery = std::numeric_limits<double>::quiet_NaN();
  conic::SolverSettings solver;
};

ControllerState twet_init(const NetworkConfig& cfg, std::span<const double> initial_battery,
                          const TwetParams& params, const TheoremConstants& k);

struct StepOutcome {
  conic::SlotDecision decision;
  double cost = 0.0;  // sum_i G(u_i) at the slot prices, unweighted
};

// Solves the slot program for supply a_i, then moves batteries and queues.
// Throws SolverFailure or BatteryBoundViolation.
StepOutcome twet_step(ControllerState& state, const SlotRandomness& slot, std::span<const double> supply,
                      const NetworkConfig& cfg, const conic::SolverSettings& settings = {});

double resolve_v(const TwetParams& params, const TheoremConstants& k);
std::vector<double> initial_levels(const NetworkConfig& cfg, double initial_battery);

// Runs every slot of the trace with per-slot supply A_i[n] / T.
RunMetrics twet_run(const Trace& trace, const TwetParams& params);

}  // namespace gridcomp
