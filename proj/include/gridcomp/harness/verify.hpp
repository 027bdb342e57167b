#pragma once

// Self-checks run by `gridcomp verify`: solver against the independent
// oracle and closed forms, subgradient validity of the planning objective,
// and feasibility invariants of short simulated runs.

#include <cstdint>
#include <string>
#include <vector>

#include "gridcomp/model.hpp"
#include "gridcomp/scenario.hpp"

namespace gridcomp::harness {

struct CheckResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  int skipped = 0;
  double worst = 0.0;  // worst error measure seen, in the unit of the check
  std::string detail;  // first failure, if any

  bool passed() const { return failures == 0 && cases > 0; }
};

struct TinyInstance {
  NetworkConfig cfg;
  ChannelState h;
  double buy = 0.0, sell = 0.0, V = 0.0;
  std::vector<double> supply, queue;
};

// I, M, K in {1, 2}; prices, supply, queue and V drawn at random.
TinyInstance random_tiny_instance(Rng& rng);

// Slot optimum from the conic solver against oracle_solve. Instances reported
// infeasible by one side must be infeasible for the other.
CheckResult check_oracle_equivalence(int instances, std::uint64_t seed, double rel_tol = 1e-4,
                                     int grid_density = 10);

// Single-user power minimization against gamma * sigma^2 / ||h||^2.
CheckResult check_single_user_closed_form(int instances, std::uint64_t seed, double rel_tol = 1e-5);

// F(E') >= F(E) + g(E)'(E' - E) - slack for random plans and sampled slots.
CheckResult check_subgradient_convexity(int pairs, std::uint64_t seed, double slack = 1e-6);

// Central differences against the subgradient where one-sided differences
// agree; kinks are counted as skipped.
CheckResult check_subgradient_finite_difference(int pairs, std::uint64_t seed);

// Short runs of every scheme on one small trace: no battery, SINR or cap
// violations and cost averages consistent with the series.
CheckResult check_run_invariants(std::uint64_t seed, int intervals = 20);

struct VerifyOptions {
  std::uint64_t seed = 1;
  int oracle_instances = 120;
  int closed_form_instances = 100;
  int subgradient_pairs = 200;
  int run_intervals = 20;
};

std::vector<CheckResult> run_verify(const VerifyOptions& opt);

}  // namespace gridcomp::harness
