#pragma once

// Up-looking sparse LDL' for symmetric quasi-definite matrices with a fixed
// sparsity pattern. The pattern is analyzed once (AMD ordering, elimination
// tree, column counts); every later factorization only refills values.
// Pivots whose sign disagrees with the expected inertia are replaced by a
// small value of the right sign.

#include <Eigen/SparseCore>
#include <vector>

namespace gridcomp::conic::detail {

class SparseLdl {
 public:
  // entries: lower or upper triangle (any order, duplicates summed).
  // positive[i] is true for rows expected to carry a positive pivot.
  void analyze(int n, const std::vector<Eigen::Triplet<double>>& entries, const std::vector<char>& positive);
  // entries must list the same (row, col) pairs in the same order as analyze.
  void factor(const std::vector<Eigen::Triplet<double>>& entries);
  void solve(double* x) const;

  bool analyzed() const { return n_ > 0 || analyzed_empty_; }
  int regularized_pivots() const { return bumped_; }

 private:
  int n_ = 0;
  bool analyzed_empty_ = false;
  std::vector<int> perm_;   // new -> old
  std::vector<int> iperm_;  // old -> new
  std::vector<char> positive_;  // by new index
  // permuted upper triangle, CSC
  std::vector<int> ap_, ai_;
  std::vector<double> ax_;
  std::vector<int> slot_;  // entry -> position in ax_
  // factor
  std::vector<int> etree_, lnz_, lp_, li_;
  std::vector<double> lx_, d_, dinv_;
  // workspaces
  std::vector<int> next_, yidx_, elim_;
  std::vector<char> mark_;
  std::vector<double> y_;
  mutable std::vector<double> tmp_;
  int bumped_ = 0;
};

}  // namespace gridcomp::conic::detail
