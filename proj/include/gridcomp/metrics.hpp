#pragma once

#include <limits>
#include <string>
#include <vector>

#include "gridcomp/model.hpp"

namespace gridcomp {

struct RunMetrics {
  double avg_cost = std::numeric_limits<double>::quiet_NaN();  // $/slot
  std::vector<double> cost_series;                              // per slot
  std::vector<std::vector<double>> battery_series;              // per BS, slots + 1 levels
  std::vector<std::vector<double>> charge_series;               // per BS, per slot
  std::vector<double> mean_charge;                              // per BS
  std::vector<std::vector<double>> plans;                       // per interval, per BS (planned runs)
  int battery_violations = 0;
  int sinr_violations = 0;
  int cap_violations = 0;
  double worst_sinr_shortfall = 0.0;  // max over slots of 1 - sinr / target
  double worst_cap_excess = 0.0;      // max over slots of P_g - P_g_max
  double wall_time_s = 0.0;

  bool has_average() const { return !cost_series.empty(); }
  int violations() const { return battery_violations + sinr_violations + cap_violations; }
};

// Tolerances used when re-checking a decision through the model.
inline constexpr double kSinrRelTol = 1e-6;
inline constexpr double kCapTol = 1e-6;
inline constexpr double kChargeTol = 1e-6;

// Re-evaluates SINR and consumption caps of one slot's beamformers and bumps
// the counters of m for every breach beyond tolerance.
void audit_slot(const NetworkConfig& cfg, const ChannelState& h, const Beamformers& w, RunMetrics& m);

// Fills avg_cost and mean_charge from the series.
void finalize(RunMetrics& m);

}  // namespace gridcomp
