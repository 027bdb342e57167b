#pragma once

#include <Eigen/Dense>
#include <string_view>

#include "gridcomp/conic/program.hpp"

namespace gridcomp::conic {

// reduced_accuracy: the iterations stalled at a point meeting reduced_tol.
enum class Status { optimal, reduced_accuracy, infeasible, unbounded, numerical_limit };

std::string_view to_string(Status s);

enum class LinearSolver { automatic, dense, sparse };

struct SolverSettings {
  // Primal/dual residuals and duality gap (relative to max(1, |objective|)).
  double tol = 1e-8;
  double reduced_tol = 1e-6;
  int max_iters = 100;
  LinearSolver linear_solver = LinearSolver::automatic;
  // automatic picks the dense factorization up to this many KKT unknowns
  int dense_limit = 400;
  double static_reg = 1e-10;
  int refine_steps = 4;
  // Per-iteration residuals on stderr.
  bool verbose = false;
};

struct ConicSolution {
  Status status = Status::numerical_limit;
  Eigen::VectorXd x;
  Eigen::VectorXd s;
  // Multipliers for every row of A (zero-cone rows first, as in the program).
  Eigen::VectorXd dual;
  double objective = 0.0;  // c'x + offset
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;

  bool optimal() const { return status == Status::optimal; }
  bool solved() const { return status == Status::optimal || status == Status::reduced_accuracy; }
};

// Primal-dual interior point method on the homogeneous self-dual embedding
// with Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
// Deterministic for fixed input; never throws on well-formed programs.
ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings = {});

}  // namespace gridcomp::conic
