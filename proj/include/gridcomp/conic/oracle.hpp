#pragma once

// Verification oracle for tiny slot programs that shares no code with the
// conic solver.
//
// The per-BS transmit powers reachable under the SINR targets form a convex,
// upward-closed region. Its lower boundary is traced by weighted sum-power
// minimizations (uplink-downlink duality fixed point, closed form for one
// user); the oracle minimizes the slot objective over the polygon through
// those boundary points. For a fixed power vector the best charge is found
// exactly among the breakpoints of the piecewise-linear cost.

#include <optional>
#include <span>
#include <vector>

#include "gridcomp/model.hpp"

namespace gridcomp::conic {

struct WeightedPowerSolution {
  Beamformers w;
  std::vector<double> bs_power;  // per BS
};

// min sum_i weights_i * bs_power_i subject to every SINR target (no caps).
// Returns nullopt when the targets cannot be met. Weights must be positive.
std::optional<WeightedPowerSolution> weighted_power_min(const NetworkConfig& cfg, const ChannelState& h,
                                                        std::span<const double> weights);

// min over P_b in [P_b_min, P_b_max] of V*G(P_c + power - supply + P_b) + queue*P_b
double best_charge_value(const NetworkConfig& cfg, double power, double buy, double sell, double supply,
                         double V, double queue);

// Upper bound on the slot-program optimum that tightens as grid_density grows
// (2^grid_density weight segments per BS pair). +inf when no sampled point is
// feasible. Requires I <= 2, M <= 2, K <= 2.
double oracle_solve(const NetworkConfig& cfg, const ChannelState& h, double buy, double sell,
                    std::span<const double> supply, double V, std::span<const double> queue,
                    int grid_density);

}  // namespace gridcomp::conic
