#include "sparse_ldl.hpp"

#include <Eigen/OrderingMethods>
#include <algorithm>
#include <cmath>

#include "gridcomp/errors.hpp"

namespace gridcomp::conic::detail {

namespace {

constexpr double kPivotFloor = 1e-13;
constexpr double kPivotBump = 7e-8;

}  // namespace

void SparseLdl::analyze(int n, const std::vector<Eigen::Triplet<double>>& entries,
                        const std::vector<char>& positive) {
  n_ = n;
  analyzed_empty_ = n == 0;
  if (n == 0) return;

  // AMD on the symmetric pattern.
  std::vector<Eigen::Triplet<double>> sym;
  sym.reserve(entries.size() * 2);
  for (const auto& e : entries) {
    sym.emplace_back(e.row(), e.col(), 1.0);
    if (e.row() != e.col()) sym.emplace_back(e.col(), e.row(), 1.0);
  }
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> pattern(n, n);
  pattern.setFromTriplets(sym.begin(), sym.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> ord;
  Eigen::AMDOrdering<int> amd;
  amd(pattern, ord);
  perm_.assign(ord.indices().data(), ord.indices().data() + n);
  iperm_.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k < n; ++k) iperm_[perm_[k]] = k;
  positive_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) positive_[k] = positive[perm_[k]];

  // Permuted upper-triangular pattern with every diagonal present.
  std::vector<std::pair<int, int>> coords;  // (col, row)
  coords.reserve(entries.size() + n);
  for (const auto& e : entries) {
    const int a = iperm_[e.row()], b = iperm_[e.col()];
    coords.emplace_back(std::max(a, b), std::min(a, b));
  }
  for (int k = 0; k < n; ++k) coords.emplace_back(k, k);
  std::vector<std::pair<int, int>> uniq = coords;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  ap_.assign(static_cast<std::size_t>(n) + 1, 0);
  ai_.resize(uniq.size());
  for (std::size_t q = 0; q < uniq.size(); ++q) {
    ++ap_[uniq[q].first + 1];
    ai_[q] = uniq[q].second;
  }
  for (int k = 0; k < n; ++k) ap_[k + 1] += ap_[k];
  ax_.assign(uniq.size(), 0.0);
  slot_.resize(entries.size());
  for (std::size_t q = 0; q < entries.size(); ++q)
    slot_[q] = static_cast<int>(std::lower_bound(uniq.begin(), uniq.end(), coords[q]) - uniq.begin());

  // Elimination tree and column counts of L.
  etree_.assign(static_cast<std::size_t>(n), -1);
  lnz_.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> flag(static_cast<std::size_t>(n), -1);
  for (int j = 0; j < n; ++j) {
    flag[j] = j;
    for (int p = ap_[j]; p < ap_[j + 1]; ++p) {
      int i = ai_[p];
      while (i != j && flag[i] != j) {
        if (etree_[i] == -1) etree_[i] = j;
        ++lnz_[i];
        flag[i] = j;
        i = etree_[i];
      }
    }
  }
  lp_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (int k = 0; k < n; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
  li_.assign(static_cast<std::size_t>(lp_[n]), 0);
  lx_.assign(static_cast<std::size_t>(lp_[n]), 0.0);
  d_.assign(static_cast<std::size_t>(n), 0.0);
  dinv_.assign(static_cast<std::size_t>(n), 0.0);
  next_.assign(static_cast<std::size_t>(n), 0);
  yidx_.assign(static_cast<std::size_t>(n), 0);
  elim_.assign(static_cast<std::size_t>(n), 0);
  mark_.assign(static_cast<std::size_t>(n), 0);
  y_.assign(static_cast<std::size_t>(n), 0.0);
  tmp_.assign(static_cast<std::size_t>(n), 0.0);
}

void SparseLdl::factor(const std::vector<Eigen::Triplet<double>>& entries) {
  if (entries.size() != slot_.size()) throw SolverFailure("sparse LDL: pattern changed after analysis");
  const int n = n_;
  std::fill(ax_.begin(), ax_.end(), 0.0);
  for (std::size_t q = 0; q < entries.size(); ++q) ax_[slot_[q]] += entries[q].value();

  bumped_ = 0;
  for (int k = 0; k < n; ++k) next_[k] = lp_[k];
  for (int k = 0; k < n; ++k) {
    int nnz_y = 0;
    double dk = 0.0;
    for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
      const int b = ai_[p];
      if (b == k) {
        dk = ax_[p];
        continue;
      }
      y_[b] = ax_[p];
      if (mark_[b]) continue;
      // path from b to k in the elimination tree, pushed in topological order
      int ne = 0;
      int i = b;
      while (i != -1 && i < k && !mark_[i]) {
        mark_[i] = 1;
        elim_[ne++] = i;
        i = etree_[i];
      }
      while (ne > 0) yidx_[nnz_y++] = elim_[--ne];
    }
    for (int t = nnz_y - 1; t >= 0; --t) {
      const int c = yidx_[t];
      const double yc = y_[c];
      const int end = next_[c];
      for (int j = lp_[c]; j < end; ++j) y_[li_[j]] -= lx_[j] * yc;
      li_[end] = k;
      lx_[end] = yc * dinv_[c];
      dk -= yc * lx_[end];
      ++next_[c];
      y_[c] = 0.0;
      mark_[c] = 0;
    }
    const double sign = positive_[k] ? 1.0 : -1.0;
    if (!(sign * dk > kPivotFloor)) {
      dk = sign * kPivotBump;
      ++bumped_;
    }
    d_[k] = dk;
    dinv_[k] = 1.0 / dk;
  }
}

void SparseLdl::solve(double* x) const {
  const int n = n_;
  for (int k = 0; k < n; ++k) tmp_[k] = x[perm_[k]];
  for (int i = 0; i < n; ++i) {
    const double xi = tmp_[i];
    for (int j = lp_[i]; j < lp_[i + 1]; ++j) tmp_[li_[j]] -= lx_[j] * xi;
  }
  for (int i = 0; i < n; ++i) tmp_[i] *= dinv_[i];
  for (int i = n - 1; i >= 0; --i) {
    double acc = tmp_[i];
    for (int j = lp_[i]; j < lp_[i + 1]; ++j) acc -= lx_[j] * tmp_[li_[j]];
    tmp_[i] = acc;
  }
  for (int k = 0; k < n; ++k) x[perm_[k]] = tmp_[k];
}

}  // namespace gridcomp::conic::detail
