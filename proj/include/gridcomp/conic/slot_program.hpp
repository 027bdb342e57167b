#pragma once

// Per-slot drift-plus-penalty subproblem as a second-order-cone program.
//
//   minimize  sum_i  V * max{alpha u_i, beta u_i} + Q_i P_b,i
//   u_i = P_c + sum_k w_k^H B_i w_k - a_i + P_b,i
//
// subject to the SINR targets, charge bounds and per-BS consumption caps.
// Beamformers are stored as real blocks [Re w_k; Im w_k] of length 2MI.

#include <span>
#include <string>
#include <vector>

#include "gridcomp/conic/program.hpp"
#include "gridcomp/conic/solver.hpp"
#include "gridcomp/model.hpp"

namespace gridcomp::conic {

// Rows mapping the real block [Re w; Im w] to Re{h^H w} (row 0) and Im{h^H w} (row 1).
Eigen::Matrix<double, 2, Eigen::Dynamic> embed_complex(const CVector& h);

// Variables and cone rows shared by every program that contains one slot of
// coordinated beamforming.
struct BeamformingBlock {
  std::vector<Slice> w;  // per user, length 2MI
  Slice power;           // per BS epigraph p_i >= sum_k w_k^H B_i w_k
};

// Adds w_k and p_i (names prefixed by tag), the SINR cones with the phase
// rows Im{h_k^H w_k} = 0, the consumption caps and the rotated power cones.
BeamformingBlock add_beamforming(ProgramBuilder& b, const NetworkConfig& cfg, const ChannelState& h,
                                 const std::string& tag = {});

struct SlotOptions {
  // Collapse the charge bounds to P_b = 0 (storage-free heuristic).
  bool fix_charge = false;
};

ConicProgram build_slot_program(const NetworkConfig& cfg, const ChannelState& h, double buy,
                                double sell, std::span<const double> supply, double V,
                                std::span<const double> queue, const SlotOptions& opt = {});

struct SlotDecision {
  Beamformers w;
  std::vector<double> charge;       // P_b,i
  std::vector<double> consumption;  // P_g,i re-evaluated from w
  std::vector<double> net_draw;     // u_i
  double objective = 0.0;           // solver objective of the program
  double cost = 0.0;                // sum_i G(u_i), unweighted
  // Per BS: multiplier-weighted price z_buy*alpha + z_sell*beta with
  // z_buy + z_sell = 1. The objective moves by -V times this per unit of a_i.
  std::vector<double> marginal_price;
  ConicSolution raw;
};

// Reads beamformers, charges and multipliers back out of a solved slot program.
SlotDecision extract_slot(const NetworkConfig& cfg, const ConicProgram& prog, const ConicSolution& sol,
                          double buy, double sell, std::span<const double> supply);

// Build, solve and extract. Throws SolverFailure unless the solve is optimal.
SlotDecision solve_slot(const NetworkConfig& cfg, const ChannelState& h, double buy, double sell,
                        std::span<const double> supply, double V, std::span<const double> queue,
                        const SlotOptions& opt = {}, const SolverSettings& settings = {});

}  // namespace gridcomp::conic
