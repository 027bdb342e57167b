#pragma once

// Comparison schemes: the storage-free myopic heuristic and the clairvoyant
// full-horizon program.

#include <limits>
#include <vector>

#include "gridcomp/conic/solver.hpp"
#include "gridcomp/metrics.hpp"
#include "gridcomp/scenario.hpp"

namespace gridcomp {

// Per slot: the slot program with P_b = 0, V = 1, Q = 0 and supply A_i[n] / T
// at real-time prices.
RunMetrics heuristic_run(const Trace& trace, const conic::SolverSettings& settings = {});

enum class OfflineMode {
  single_timescale,  // supply A_i[n] / T per slot, real-time prices only
  two_timescale,     // ahead-of-time purchases E_i[n] in [0, max_plan] chosen jointly
};

struct OfflineParams {
  OfflineMode mode = OfflineMode::two_timescale;
  // Initial battery level; NaN selects C_min. The final level is free unless
  // energy_neutral is set.
  double initial_battery = std::numeric_limits<double>::quiet_NaN();
  // Require C(end) >= C(0): no net use of the initial charge.
  bool energy_neutral = false;
  // Largest horizon (slots) accepted as one program.
  int max_slots = 2000;
  conic::SolverSettings solver = [] {
    conic::SolverSettings s;
    s.linear_solver = conic::LinearSolver::sparse;
    s.max_iters = 200;
    s.static_reg = 1e-8;
    return s;
  }();
};

struct OfflineSchedule {
  std::vector<Beamformers> w;                  // per slot
  std::vector<std::vector<double>> charge;     // per slot, per BS
  std::vector<std::vector<double>> battery;    // per BS, slots + 1 levels
  std::vector<std::vector<double>> plans;      // per interval, per BS (two-timescale)
};

struct OfflineResult {
  double avg_cost = 0.0;     // $/slot, from the schedule re-evaluated through the model
  double objective = 0.0;    // solver objective, same units
  OfflineSchedule schedule;
  RunMetrics metrics;        // cost series and audit counters of the schedule
  conic::ConicSolution raw;
};

// Throws InvalidArgument beyond the horizon guard and SolverFailure when the
// joint program is not solved to optimality.
OfflineResult offline_solve(const Trace& trace, const OfflineParams& params = {});

}  // namespace gridcomp
