#pragma once

// Network description, per-slot randomness and the closed-form physics and
// cost functions of the smart-grid powered CoMP downlink.
//
// Units: every energy is in kWh per slot (slot length normalized to one), so
// transmit power and traded energy share a scale. Transaction costs are in $.

#include <Eigen/Dense>
#include <vector>

namespace gridcomp {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

double db_to_linear(double db);
double linear_to_db(double ratio);

struct NetworkConfig {
  int num_bs = 2;        // I
  int num_antennas = 2;  // M per BS
  int num_users = 3;     // K
  std::vector<double> sinr_targets;  // linear, per user
  std::vector<double> noise_vars;    // per user
  double circuit_power = 1.0;        // P_c
  double max_consumption = 10.0;     // P_g^max per BS
  double battery_min = 0.0;
  double battery_max = 60.0;
  double charge_min = -2.0;  // P_b^min < 0
  double charge_max = 2.0;   // P_b^max > 0
  int interval_len = 5;      // T slots per coarse interval

  // Rows of H and W: antennas of BS i occupy rows [i*M, (i+1)*M).
  int rows() const { return num_bs * num_antennas; }

  // Throws InvalidArgument describing the first broken invariant.
  void validate() const;

  // Two BSs with two antennas each, three users at 5 dB, 60 kWh batteries,
  // +-2 kWh charge limits, T = 5.
  static NetworkConfig reference();

  void set_uniform_sinr_db(double db);
};

struct ChannelState {
  CMatrix H;  // rows() x K, column k = h_k
};

struct Beamformers {
  CMatrix W;  // rows() x K, column k = w_k
};

struct SlotRandomness {
  double buy_price = 0.0;   // alpha_t
  double sell_price = 0.0;  // beta_t
  ChannelState channels;
  std::vector<double> res_arrivals;  // per BS, single-timescale mode
};

struct IntervalRandomness {
  double buy_price_lt = 0.0;
  double sell_price_lt = 0.0;
  std::vector<double> res_arrivals;  // per BS, whole interval
};

struct ControllerState {
  std::vector<double> battery;        // C_i
  std::vector<double> virtual_queue;  // Q_i = C_i + perturbation
  double perturbation = 0.0;          // Gamma
  double penalty_weight = 0.0;        // V
  std::vector<double> plan;           // E_i for the current interval (two-timescale only)
};

// G(u) = max{alpha*u, beta*u}: buying a shortage u > 0 costs alpha*u, selling a
// surplus -u > 0 earns beta*(-u). Requires alpha >= beta >= 0.
double transaction_cost(double net_draw, double buy, double sell);

// Transmit energy of BS i: sum_k w_k^H B_i w_k.
double bs_power(const Beamformers& w, int bs, const NetworkConfig& cfg);

// P_c + bs_power. Throws CapViolation when it exceeds max_consumption + slack.
double total_consumption(const Beamformers& w, int bs, const NetworkConfig& cfg,
                         double slack = 0.0);

double sinr(const ChannelState& h, const Beamformers& w, int user, double noise_var);

// C + P_b; throws BatteryBoundViolation if the result leaves [C_min, C_max]
// by more than slack. The result is never clamped.
double battery_step(double level, double charge, const NetworkConfig& cfg,
                    double slack = 0.0);

// Ahead-of-time leg: G(E - A) at the long-term prices.
double lt_cost(double plan, double res, double buy_lt, double sell_lt);

// Largest ahead-of-time purchase a BS can absorb over one interval:
// T * (P_g_max + P_b_max). Larger plans could only be resold.
double max_plan(const NetworkConfig& cfg);

// Per-slot two-timescale cost of one BS:
//   (1/T) * G_lt(E - A) + G_rt(P_g - E/T + P_b)
double slot_cost_mtep(double plan, double res, double buy_lt, double sell_lt, double buy_rt,
                      double sell_rt, double consumption, double charge, int interval_len);

void check_shape(const ChannelState& h, const NetworkConfig& cfg);
void check_shape(const Beamformers& w, const NetworkConfig& cfg);

}  // namespace gridcomp
