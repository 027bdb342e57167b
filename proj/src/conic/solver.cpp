#include "gridcomp/conic/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "gridcomp/kernels.hpp"
#include "sparse_ldl.hpp"

namespace gridcomp::conic {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::reduced_accuracy: return "reduced-accuracy";
    case Status::numerical_limit: return "numerical-limit";
  }
  return "unknown";
}

namespace {

using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();


// Layout of the cone part (rows after the zero cone).
struct ConeLayout {
  int nonneg = 0;
  std::vector<int> soc_off;
  std::vector<int> soc_dim;
  int m = 0;
  int degree = 0;
};

// Nesterov-Todd scaling W with W z = W^{-1} s = lambda.
// Nonnegative rows: W = diag(d). Second-order cone j: W = beta_j (2 v v' - J).
struct Scaling {
  VectorXd d;
  std::vector<double> beta;
  VectorXd v;
  VectorXd lambda;
};

double soc_tail_norm(const double* x, int dim) {
  return std::sqrt(kernels::sum_squares({x + 1, static_cast<std::size_t>(dim - 1)}));
}

// x0^2 - ||x1||^2 computed as a product to limit cancellation near the boundary.
double soc_det(const double* x, int dim) {
  const double t = soc_tail_norm(x, dim);
  return (x[0] - t) * (x[0] + t);
}

void apply_w(const ConeLayout& cl, const Scaling& sc, const double* x, double* out) {
  for (int i = 0; i < cl.nonneg; ++i) out[i] = sc.d[i] * x[i];
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double* v = sc.v.data() + off;
    const double vx = kernels::dot({v, static_cast<std::size_t>(dim)},
                                   {x + off, static_cast<std::size_t>(dim)});
    const double b = sc.beta[j];
    out[off] = b * (2.0 * v[0] * vx - x[off]);
    for (int i = 1; i < dim; ++i) out[off + i] = b * (2.0 * v[i] * vx + x[off + i]);
  }
}

void apply_winv(const ConeLayout& cl, const Scaling& sc, const double* x, double* out) {
  for (int i = 0; i < cl.nonneg; ++i) out[i] = x[i] / sc.d[i];
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double* v = sc.v.data() + off;
    // W^{-1} = (2 u u' - J) / beta with u = J v
    double ux = v[0] * x[off];
    for (int i = 1; i < dim; ++i) ux -= v[i] * x[off + i];
    const double inv_b = 1.0 / sc.beta[j];
    out[off] = inv_b * (2.0 * v[0] * ux - x[off]);
    for (int i = 1; i < dim; ++i) out[off + i] = inv_b * (-2.0 * v[i] * ux + x[off + i]);
  }
}

bool compute_scaling(const ConeLayout& cl, const VectorXd& s, const VectorXd& z, Scaling& sc) {
  sc.d.resize(cl.nonneg);
  sc.beta.resize(cl.soc_off.size());
  sc.v.setZero(cl.m);
  sc.lambda.resize(cl.m);
  for (int i = 0; i < cl.nonneg; ++i) {
    if (!(s[i] > 0.0 && z[i] > 0.0)) return false;
    sc.d[i] = std::sqrt(s[i] / z[i]);
    sc.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double* sj = s.data() + off;
    const double* zj = z.data() + off;
    const double sdet = soc_det(sj, dim), zdet = soc_det(zj, dim);
    if (!(sdet > 0.0 && zdet > 0.0 && sj[0] > 0.0 && zj[0] > 0.0)) return false;
    const double sn = std::sqrt(sdet), zn = std::sqrt(zdet);
    sc.beta[j] = std::sqrt(sn / zn);
    const double sz = kernels::dot({sj, static_cast<std::size_t>(dim)},
                                   {zj, static_cast<std::size_t>(dim)}) /
                      (sn * zn);
    const double gamma = std::sqrt((1.0 + sz) / 2.0);
    double* v = sc.v.data() + off;
    // wbar = (sbar + J zbar) / (2 gamma); v = (wbar + e) / sqrt(2 (wbar0 + 1))
    const double w0 = (sj[0] / sn + zj[0] / zn) / (2.0 * gamma);
    const double scale = 1.0 / std::sqrt(2.0 * (w0 + 1.0));
    v[0] = (w0 + 1.0) * scale;
    for (int i = 1; i < dim; ++i) v[i] = ((sj[i] / sn - zj[i] / zn) / (2.0 * gamma)) * scale;
  }
  apply_w(cl, sc, z.data(), sc.lambda.data());
  for (int i = 0; i < cl.nonneg; ++i) sc.lambda[i] = std::sqrt(s[i] * z[i]);
  return sc.lambda.allFinite();
}

// u o v
void jordan_prod(const ConeLayout& cl, const double* u, const double* v, double* out) {
  for (int i = 0; i < cl.nonneg; ++i) out[i] = u[i] * v[i];
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double uv = kernels::dot({u + off, static_cast<std::size_t>(dim)},
                                   {v + off, static_cast<std::size_t>(dim)});
    for (int i = 1; i < dim; ++i) out[off + i] = u[off] * v[off + i] + v[off] * u[off + i];
    out[off] = uv;
  }
}

// x with u o x = w
void jordan_div(const ConeLayout& cl, const double* u, const double* w, double* out) {
  for (int i = 0; i < cl.nonneg; ++i) out[i] = w[i] / u[i];
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double* uj = u + off;
    const double* wj = w + off;
    const double det = soc_det(uj, dim);
    double u1w1 = 0.0;
    for (int i = 1; i < dim; ++i) u1w1 += uj[i] * wj[i];
    const double x0 = (uj[0] * wj[0] - u1w1) / det;
    out[off] = x0;
    for (int i = 1; i < dim; ++i) out[off + i] = (wj[i] - x0 * uj[i]) / uj[0];
  }
}

// Largest alpha with x + alpha dx in the cone (x interior); +inf if unbounded.
double max_step(const ConeLayout& cl, const VectorXd& x, const VectorXd& dx) {
  double alpha = kInf;
  for (int i = 0; i < cl.nonneg; ++i)
    if (dx[i] < 0.0) alpha = std::min(alpha, -x[i] / dx[i]);
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) {
    const int off = cl.soc_off[j], dim = cl.soc_dim[j];
    const double* xs = x.data() + off;
    const double* ds = dx.data() + off;
    const double c = soc_det(xs, dim);
    double a = ds[0] * ds[0], b = xs[0] * ds[0];
    for (int i = 1; i < dim; ++i) {
      a -= ds[i] * ds[i];
      b -= xs[i] * ds[i];
    }
    if (a < 0.0 || b < 0.0) {
      const double disc = std::max(b * b - a * c, 0.0);
      const double denom = -b + std::sqrt(disc);
      if (denom > 0.0) alpha = std::min(alpha, c / denom);
      else alpha = std::min(alpha, 0.0);
    }
  }
  return alpha;
}

// Smallest "eigenvalue" over all cones: x_i for the orthant, x0 - ||x1|| for SOCs.
double min_eig(const ConeLayout& cl, const VectorXd& x) {
  double e = kInf;
  for (int i = 0; i < cl.nonneg; ++i) e = std::min(e, x[i]);
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j)
    e = std::min(e, x[cl.soc_off[j]] - soc_tail_norm(x.data() + cl.soc_off[j], cl.soc_dim[j]));
  return e;
}

void add_identity(const ConeLayout& cl, VectorXd& x, double t) {
  for (int i = 0; i < cl.nonneg; ++i) x[i] += t;
  for (int off : cl.soc_off) x[off] += t;
}

// Rows of G grouped per cone: one block per orthant row, one per SOC.
struct Block {
  int off = 0;
  int dim = 0;
  std::vector<int> cols;
  std::vector<double> dense;  // dim x cols.size(), column-major
};

std::vector<Block> make_blocks(const ConeLayout& cl, const SparseRowMatrix& G) {
  std::vector<Block> blocks;
  auto build = [&](int off, int dim) {
    Block b;
    b.off = off;
    b.dim = dim;
    for (int r = off; r < off + dim; ++r)
      for (SparseRowMatrix::InnerIterator it(G, r); it; ++it) b.cols.push_back(static_cast<int>(it.col()));
    std::sort(b.cols.begin(), b.cols.end());
    b.cols.erase(std::unique(b.cols.begin(), b.cols.end()), b.cols.end());
    b.dense.assign(static_cast<std::size_t>(dim) * b.cols.size(), 0.0);
    for (int r = off; r < off + dim; ++r)
      for (SparseRowMatrix::InnerIterator it(G, r); it; ++it) {
        const auto pos = std::lower_bound(b.cols.begin(), b.cols.end(), static_cast<int>(it.col())) -
                         b.cols.begin();
        b.dense[static_cast<std::size_t>(pos) * dim + (r - off)] += it.value();
      }
    blocks.push_back(std::move(b));
  };
  for (int i = 0; i < cl.nonneg; ++i) build(i, 1);
  for (std::size_t j = 0; j < cl.soc_off.size(); ++j) build(cl.soc_off[j], cl.soc_dim[j]);
  return blocks;
}

// LDL' of a symmetric quasi-definite matrix without pivoting. The first
// n_pos pivots are forced positive, the rest negative.
class DenseLdl {
 public:
  void factor(std::vector<double>& k, int n, int n_pos, double reg) {
    n_ = n;
    l_.swap(k);
    d_.assign(static_cast<std::size_t>(n), 0.0);
    work_.assign(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      double* lj = row(j);
      for (int p = 0; p < j; ++p) work_[p] = lj[p] * d_[p];
      double dj = lj[j] - kernels::dot({lj, static_cast<std::size_t>(j)},
                                       {work_.data(), static_cast<std::size_t>(j)});
      if (j < n_pos) {
        if (dj < reg) dj = reg;
      } else if (dj > -reg) {
        dj = -reg;
      }
      d_[j] = dj;
      lj[j] = 1.0;
      for (int i = j + 1; i < n; ++i) {
        double* li = row(i);
        // strictly upper part of the input is unused; lower row i holds K(i, :)
        li[j] = (li[j] - kernels::dot({li, static_cast<std::size_t>(j)},
                                      {work_.data(), static_cast<std::size_t>(j)})) / dj;
      }
    }
  }

  void solve(double* x) const {
    for (int i = 0; i < n_; ++i) {
      const double* li = row(i);
      x[i] -= kernels::dot({li, static_cast<std::size_t>(i)}, {x, static_cast<std::size_t>(i)});
    }
    for (int i = 0; i < n_; ++i) x[i] /= d_[i];
    for (int i = n_ - 1; i >= 0; --i) {
      const double* li = row(i);
      kernels::axpy(-x[i], {li, static_cast<std::size_t>(i)}, {x, static_cast<std::size_t>(i)});
    }
  }

 private:
  double* row(int i) { return l_.data() + static_cast<std::size_t>(i) * n_; }
  const double* row(int i) const { return l_.data() + static_cast<std::size_t>(i) * n_; }

  int n_ = 0;
  std::vector<double> l_;
  std::vector<double> d_;
  std::vector<double> work_;
};

// Solves  [0 A' G'; A 0 0; G 0 -W'W] [dx; dy; dz] = [r1; r2; r3]
// by eliminating dz, factoring the regularized reduced matrix
// [G'W^{-2}G + reg, A'; A, -reg] and refining against the full system.
class KktSolver {
 public:
  KktSolver(const SparseRowMatrix& aeq, const SparseRowMatrix& g, const ConeLayout& cl,
            const SolverSettings& st)
      : aeq_(aeq), g_(g), cl_(cl), st_(st) {
    n_ = static_cast<int>(g.cols());
    p_ = static_cast<int>(aeq.rows());
    blocks_ = make_blocks(cl, g);
    const int nk = n_ + p_;
    dense_ = st.linear_solver == LinearSolver::dense ||
             (st.linear_solver == LinearSolver::automatic && nk <= st.dense_limit);
    int max_cols = 0, max_dim = 0;
    for (const auto& b : blocks_) {
      max_cols = std::max<int>(max_cols, static_cast<int>(b.cols.size()));
      max_dim = std::max(max_dim, b.dim);
    }
    mcol_.resize(static_cast<std::size_t>(max_cols) * max_dim);
    tmp_in_.setZero(cl.m);
    tmp_out_.setZero(cl.m);
  }

  bool factor(const Scaling& sc) {
    sc_ = &sc;
    const int nk = n_ + p_;
    const double reg = st_.static_reg;
    if (dense_) {
      kmat_.assign(static_cast<std::size_t>(nk) * nk, 0.0);
      accumulate_h([&](int r, int c, double v) { kmat_[static_cast<std::size_t>(r) * nk + c] += v; });
      for (int i = 0; i < n_; ++i) kmat_[static_cast<std::size_t>(i) * nk + i] += reg;
      for (int r = 0; r < p_; ++r) {
        for (SparseRowMatrix::InnerIterator it(aeq_, r); it; ++it)
          kmat_[static_cast<std::size_t>(n_ + r) * nk + it.col()] += it.value();
        kmat_[static_cast<std::size_t>(n_ + r) * nk + n_ + r] -= reg;
      }
      ldl_.factor(kmat_, nk, n_, std::max(reg, 1e-13));
      return true;
    }
    // Full quasi-definite system [reg I, A', G'; A, -reg I, 0; G, 0, -(W^2 + reg I)].
    const int nf = n_ + p_ + cl_.m;
    trips_.clear();
    for (int i = 0; i < n_; ++i) trips_.emplace_back(i, i, reg);
    for (int r = 0; r < p_; ++r) {
      for (SparseRowMatrix::InnerIterator it(aeq_, r); it; ++it)
        trips_.emplace_back(n_ + r, static_cast<int>(it.col()), it.value());
      trips_.emplace_back(n_ + r, n_ + r, -reg);
    }
    const int z0 = n_ + p_;
    for (int r = 0; r < cl_.m; ++r)
      for (SparseRowMatrix::InnerIterator it(g_, r); it; ++it)
        trips_.emplace_back(z0 + r, static_cast<int>(it.col()), it.value());
    for (int i = 0; i < cl_.nonneg; ++i) trips_.emplace_back(z0 + i, z0 + i, -(sc.d[i] * sc.d[i] + reg));
    for (std::size_t j = 0; j < cl_.soc_off.size(); ++j) {
      const int off = cl_.soc_off[j], dim = cl_.soc_dim[j];
      const double* v = sc.v.data() + off;
      const double b2 = sc.beta[j] * sc.beta[j];
      const double vv = kernels::dot({v, static_cast<std::size_t>(dim)}, {v, static_cast<std::size_t>(dim)});
      // W^2 = beta^2 (4 (v'v) v v' - 2 v (Jv)' - 2 (Jv) v' + I)
      for (int a = 0; a < dim; ++a) {
        const double jva = a == 0 ? v[0] : -v[a];
        for (int c = 0; c <= a; ++c) {
          const double jvc = c == 0 ? v[0] : -v[c];
          double w2 = b2 * (4.0 * vv * v[a] * v[c] - 2.0 * v[a] * jvc - 2.0 * jva * v[c] + (a == c ? 1.0 : 0.0));
          if (a == c) w2 += reg;
          trips_.emplace_back(z0 + off + a, z0 + off + c, -w2);
        }
      }
    }
    if (!sparse_ldl_.analyzed()) {
      std::vector<char> positive(static_cast<std::size_t>(nf), 0);
      std::fill(positive.begin(), positive.begin() + n_, 1);
      sparse_ldl_.analyze(nf, trips_, positive);
    }
    sparse_ldl_.factor(trips_);
    return true;
  }

  void solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx, VectorXd& dy,
             VectorXd& dz) {
    reduced_solve(r1, r2, r3, dx, dy, dz);
    const double rhs_norm = std::max({r1.lpNorm<Eigen::Infinity>(), r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                      r3.lpNorm<Eigen::Infinity>(), 1e-300});
    double prev = kInf;
    for (int k = 0; k <= st_.refine_steps; ++k) {
      e1_ = r1 - aeq_.transpose() * dy - g_.transpose() * dz;
      e2_ = r2 - aeq_ * dx;
      apply_w2(dz, w2dz_);
      e3_ = r3 - g_ * dx + w2dz_;
      double err = std::max({e1_.lpNorm<Eigen::Infinity>(), e2_.size() ? e2_.lpNorm<Eigen::Infinity>() : 0.0,
                             e3_.lpNorm<Eigen::Infinity>()});
      if (!std::isfinite(err)) err = kInf;
      if (err >= prev) {
        // refinement stopped helping; keep the previous solution
        if (k > 0) {
          dx -= cx_;
          dy -= cy_;
          dz -= cz_;
        }
        break;
      }
      last_err_ = err / rhs_norm;
      prev = err;
      if (err <= 1e-14 * rhs_norm || k == st_.refine_steps) break;
      reduced_solve(e1_, e2_, e3_, cx_, cy_, cz_);
      dx += cx_;
      dy += cy_;
      dz += cz_;
    }
  }

  bool dense() const { return dense_; }
  double last_error() const { return last_err_; }
  int bumped() const { return dense_ ? 0 : sparse_ldl_.regularized_pivots(); }

 private:
  template <class Sink>
  void accumulate_h(Sink&& sink) {
    const Scaling& sc = *sc_;
    for (const auto& b : blocks_) {
      const int nc = static_cast<int>(b.cols.size());
      if (nc == 0) continue;
      if (b.dim == 1 && b.off < cl_.nonneg) {
        const double w = 1.0 / (sc.d[b.off] * sc.d[b.off]);
        for (int a = 0; a < nc; ++a)
          for (int c = 0; c <= a; ++c) {
            const int ra = b.cols[a], rc = b.cols[c];
            const double v = w * b.dense[a] * b.dense[c];
            sink(std::max(ra, rc), std::min(ra, rc), v);
          }
        continue;
      }
      // M = W^{-1} G_block, then H += M'M
      for (int a = 0; a < nc; ++a) {
        tmp_in_.segment(b.off, b.dim) =
            Eigen::Map<const VectorXd>(b.dense.data() + static_cast<std::size_t>(a) * b.dim, b.dim);
        apply_winv_block(b, tmp_in_.data(), mcol_.data() + static_cast<std::size_t>(a) * b.dim);
      }
      for (int a = 0; a < nc; ++a) {
        const double* ma = mcol_.data() + static_cast<std::size_t>(a) * b.dim;
        for (int c = 0; c <= a; ++c) {
          const double* mc = mcol_.data() + static_cast<std::size_t>(c) * b.dim;
          const double v = kernels::dot({ma, static_cast<std::size_t>(b.dim)},
                                        {mc, static_cast<std::size_t>(b.dim)});
          const int ra = b.cols[a], rc = b.cols[c];
          sink(std::max(ra, rc), std::min(ra, rc), v);
        }
      }
    }
    if (dense_) {
      // mirror the lower triangle
      const int nk = n_ + p_;
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < r; ++c) kmat_[static_cast<std::size_t>(c) * nk + r] = kmat_[static_cast<std::size_t>(r) * nk + c];
    }
  }

  // W^{-1} restricted to one SOC block; x and out are indexed from the block start.
  void apply_winv_block(const Block& b, const double* x_full, double* out) {
    const Scaling& sc = *sc_;
    const int j = block_soc_index(b);
    const double* v = sc.v.data() + b.off;
    const double* x = x_full + b.off;
    double ux = v[0] * x[0];
    for (int i = 1; i < b.dim; ++i) ux -= v[i] * x[i];
    const double inv_b = 1.0 / sc.beta[j];
    out[0] = inv_b * (2.0 * v[0] * ux - x[0]);
    for (int i = 1; i < b.dim; ++i) out[i] = inv_b * (-2.0 * v[i] * ux + x[i]);
  }

  int block_soc_index(const Block& b) const {
    const auto it = std::lower_bound(cl_.soc_off.begin(), cl_.soc_off.end(), b.off);
    return static_cast<int>(it - cl_.soc_off.begin());
  }

  void apply_w2(const VectorXd& x, VectorXd& out) {
    tmp_out_.resize(cl_.m);
    out.resize(cl_.m);
    apply_w(cl_, *sc_, x.data(), tmp_out_.data());
    apply_w(cl_, *sc_, tmp_out_.data(), out.data());
  }

  void apply_winv2(const VectorXd& x, VectorXd& out) {
    tmp_out_.resize(cl_.m);
    out.resize(cl_.m);
    apply_winv(cl_, *sc_, x.data(), tmp_out_.data());
    apply_winv(cl_, *sc_, tmp_out_.data(), out.data());
  }

  void reduced_solve(const VectorXd& r1, const VectorXd& r2, const VectorXd& r3, VectorXd& dx,
                     VectorXd& dy, VectorXd& dz) {
    if (!dense_) {
      rhs_.resize(n_ + p_ + cl_.m);
      rhs_ << r1, r2, r3;
      sparse_ldl_.solve(rhs_.data());
      dx = rhs_.head(n_);
      dy = rhs_.segment(n_, p_);
      dz = rhs_.tail(cl_.m);
      return;
    }
    apply_winv2(r3, t3_);
    rhs_.resize(n_ + p_);
    rhs_.head(n_) = r1 + g_.transpose() * t3_;
    rhs_.tail(p_) = r2;
    ldl_.solve(rhs_.data());
    dx = rhs_.head(n_);
    dy = rhs_.tail(p_);
    gdx_ = g_ * dx - r3;
    apply_winv2(gdx_, dz);
  }

  const SparseRowMatrix& aeq_;
  const SparseRowMatrix& g_;
  const ConeLayout& cl_;
  const SolverSettings& st_;
  const Scaling* sc_ = nullptr;
  int n_ = 0, p_ = 0;
  bool dense_ = true;
  double last_err_ = 0.0;
  std::vector<Block> blocks_;
  std::vector<double> mcol_;
  std::vector<double> kmat_;
  DenseLdl ldl_;
  std::vector<Eigen::Triplet<double>> trips_;
  detail::SparseLdl sparse_ldl_;
  VectorXd tmp_in_, tmp_out_, t3_, rhs_, gdx_, e1_, e2_, e3_, w2dz_, cx_, cy_, cz_;
};

}  // namespace

ConicSolution solve(const ConicProgram& prog, const SolverSettings& st) {
  prog.validate();
  const int n = prog.num_vars();
  const int p = prog.cones.zero;
  const int m = prog.num_rows() - p;

  ConeLayout cl;
  cl.nonneg = prog.cones.nonneg;
  cl.m = m;
  {
    int off = cl.nonneg;
    for (int d : prog.cones.soc) {
      cl.soc_off.push_back(off);
      cl.soc_dim.push_back(d);
      off += d;
    }
  }
  cl.degree = prog.cones.degree();

  const SparseRowMatrix aeq = prog.A.topRows(p);
  const SparseRowMatrix g = prog.A.bottomRows(m);
  const VectorXd beq = prog.b.head(p);
  const VectorXd h = prog.b.tail(m);
  const VectorXd& c = prog.c;

  KktSolver kkt(aeq, g, cl, st);
  Scaling sc;

  ConicSolution out;
  auto finish = [&](Status status, const VectorXd& x, const VectorXd& y, const VectorXd& z,
                    const VectorXd& s, double tau) {
    out.status = status;
    const double inv = (status == Status::infeasible || status == Status::unbounded) ? 1.0 : 1.0 / tau;
    out.x = x * inv;
    out.s.resize(p + m);
    out.s.head(p).setZero();
    out.s.tail(m) = s * inv;
    out.dual.resize(p + m);
    out.dual.head(p) = y * inv;
    out.dual.tail(m) = z * inv;
    out.objective = c.dot(out.x) + prog.offset;
    return out;
  };

  // Initial point: least-squares primal and dual, shifted into the cone.
  VectorXd x(n), y(p), z(m), s(m);
  {
    sc.d = VectorXd::Ones(cl.nonneg);
    sc.beta.assign(cl.soc_off.size(), 1.0);
    sc.v.setZero(m);
    for (int off : cl.soc_off) sc.v[off] = 1.0;  // W = 2 e e' - J = I
    sc.lambda.setZero(m);
    if (!kkt.factor(sc)) return finish(Status::numerical_limit, VectorXd::Zero(n), VectorXd::Zero(p),
                                       VectorXd::Zero(m), VectorXd::Zero(m), 1.0);
    VectorXd dx, dy, dz;
    kkt.solve(VectorXd::Zero(n), beq, h, dx, dy, dz);
    x = dx;
    s = -dz;
    const double ap = -min_eig(cl, s);
    if (ap >= 0.0) add_identity(cl, s, 1.0 + ap);
    kkt.solve(-c, VectorXd::Zero(p), VectorXd::Zero(m), dx, dy, dz);
    y = dy;
    z = dz;
    const double ad = -min_eig(cl, z);
    if (ad >= 0.0) add_identity(cl, z, 1.0 + ad);
  }
  double tau = 1.0, kappa = 1.0;

  const double nb = std::max(1.0, beq.size() ? beq.norm() : 0.0);
  const double nh = std::max(1.0, h.norm());
  const double nc = std::max(1.0, c.norm());

  VectorXd rx(n), ry(p), rz(m);
  struct Iterate {
    VectorXd x, y, z, s;
    double tau, pres, dres, gap, pcost, dcost, merit;
  };
  std::optional<Iterate> best;
  VectorXd x1, y1, z1, x2, y2, z2;
  VectorXd ds_a(m), ds(m), ws(m), wz(m), tmp(m), tmp2(m), dsv(m);
  VectorXd r1(n), r2(p), r3(m);

  for (int it = 0; it <= st.max_iters; ++it) {
    out.iterations = it;
    rx = aeq.transpose() * y + g.transpose() * z + c * tau;
    ry = aeq * x - beq * tau;
    rz = s + g * x - h * tau;
    const double cx = c.dot(x), by = beq.dot(y), hz = h.dot(z);
    const double rt = kappa + cx + by + hz;

    const double pres = std::max(ry.size() ? ry.norm() / nb : 0.0, rz.norm() / nh) / tau;
    const double dres = rx.norm() / nc / tau;
    const double pcost = cx / tau;
    const double dcost = -(by + hz) / tau;
    const double gap = s.dot(z) / (tau * tau);
    out.primal_residual = pres;
    out.dual_residual = dres;
    out.gap = gap;
    if (st.verbose)
      std::fprintf(stderr, "%3d pcost %+.9e dcost %+.9e gap %.2e pres %.2e dres %.2e tau %.2e kappa %.2e\n", it,
                   pcost, dcost, gap, pres, dres, tau, kappa);

    if (pres <= st.tol && dres <= st.tol &&
        (gap <= st.tol * std::max(1.0, std::min(std::abs(pcost), std::abs(dcost))) ||
         std::abs(pcost - dcost) <= st.tol * std::max(1.0, std::abs(pcost))) &&
        gap <= std::sqrt(st.tol) * std::max(1.0, std::abs(pcost)))
      return finish(Status::optimal, x, y, z, s, tau);

    if (tau < kappa) {
      const double cert = -(by + hz);
      if (cert > 0.0) {
        const double res = (aeq.transpose() * y + g.transpose() * z).norm() / cert;
        if (res <= st.tol) {
          out.gap = 0.0;
          return finish(Status::infeasible, x, y / cert, z / cert, s, 1.0);
        }
      }
      if (cx < 0.0) {
        const double res = std::max(ry.size() ? (aeq * x).norm() : 0.0, (g * x + s).norm()) / (-cx);
        if (res <= st.tol) return finish(Status::unbounded, x / (-cx), y, z, s / (-cx), 1.0);
      }
    }
    if (it == st.max_iters) break;
    {
      const double merit = std::max({pres, dres, std::min(gap, std::abs(pcost - dcost)) / std::max(1.0, std::abs(pcost))});
      if (std::isfinite(merit) && (!best || merit < best->merit)) best = Iterate{x, y, z, s, tau, pres, dres, gap, pcost, dcost, merit};
    }

    if (!compute_scaling(cl, s, z, sc)) {
      if (st.verbose) std::fprintf(stderr, "scaling failed\n");
      break;
    }
    if (!kkt.factor(sc)) {
      if (st.verbose) std::fprintf(stderr, "factorization failed\n");
      break;
    }
    const VectorXd& lam = sc.lambda;

    kkt.solve(-c, beq, h, x1, y1, z1);
    const double denom = -kappa / tau + c.dot(x1) + beq.dot(y1) + h.dot(z1);

    // Affine direction: d_s = lambda o lambda, so W (lambda \ d_s) = W lambda = s.
    r1 = -rx;
    r2 = -ry;
    r3 = -rz + s;
    kkt.solve(r1, r2, r3, x2, y2, z2);
    double dtau_a = (-rt + kappa - (c.dot(x2) + beq.dot(y2) + h.dot(z2))) / denom;
    VectorXd dx_a = x2 + dtau_a * x1;
    VectorXd dz_a = z2 + dtau_a * z1;
    apply_w(cl, sc, dz_a.data(), tmp.data());
    apply_w(cl, sc, tmp.data(), ws.data());
    ds_a = -s - ws;
    const double dkappa_a = -kappa - kappa * dtau_a / tau;

    double alpha_a = std::min({1.0, max_step(cl, s, ds_a), max_step(cl, z, dz_a)});
    if (dtau_a < 0.0) alpha_a = std::min(alpha_a, -tau / dtau_a);
    if (dkappa_a < 0.0) alpha_a = std::min(alpha_a, -kappa / dkappa_a);
    const double sigma = std::clamp(std::pow(1.0 - alpha_a, 3), 0.0, 1.0);
    const double mu = (s.dot(z) + tau * kappa) / (cl.degree + 1);

    // Combined direction: d_s = lambda o lambda + (W^{-1} ds_a) o (W dz_a) - sigma mu e
    apply_winv(cl, sc, ds_a.data(), tmp.data());
    apply_w(cl, sc, dz_a.data(), tmp2.data());
    jordan_prod(cl, tmp.data(), tmp2.data(), dsv.data());
    jordan_prod(cl, lam.data(), lam.data(), tmp.data());
    dsv += tmp;
    for (int i = 0; i < cl.nonneg; ++i) dsv[i] -= sigma * mu;
    for (int off : cl.soc_off) dsv[off] -= sigma * mu;
    const double dk = kappa * tau + dkappa_a * dtau_a - sigma * mu;

    jordan_div(cl, lam.data(), dsv.data(), tmp.data());
    apply_w(cl, sc, tmp.data(), tmp2.data());  // W (lambda \ d_s)
    r1 = -(1.0 - sigma) * rx;
    r2 = -(1.0 - sigma) * ry;
    r3 = -(1.0 - sigma) * rz + tmp2;
    kkt.solve(r1, r2, r3, x2, y2, z2);
    const double dtau = (-(1.0 - sigma) * rt + dk / tau - (c.dot(x2) + beq.dot(y2) + h.dot(z2))) / denom;
    VectorXd dx = x2 + dtau * x1;
    VectorXd dy = y2 + dtau * y1;
    VectorXd dz = z2 + dtau * z1;
    apply_w(cl, sc, dz.data(), tmp.data());
    apply_w(cl, sc, tmp.data(), ws.data());
    ds = -tmp2 - ws;
    const double dkappa = -(dk + kappa * dtau) / tau;
    if (st.verbose) std::fprintf(stderr, "    kkt rel err %.2e bumped %d sigma %.2e\n", kkt.last_error(), kkt.bumped(), sigma);

    if (!dx.allFinite() || !dy.allFinite() || !dz.allFinite() || !ds.allFinite() || !std::isfinite(dtau) ||
        !std::isfinite(dkappa)) {
      if (st.verbose) std::fprintf(stderr, "non-finite direction\n");
      break;
    }
    double alpha = std::min(max_step(cl, s, ds), max_step(cl, z, dz));
    if (dtau < 0.0) alpha = std::min(alpha, -tau / dtau);
    if (dkappa < 0.0) alpha = std::min(alpha, -kappa / dkappa);
    alpha = std::min(1.0, 0.99 * alpha);
    if (!(alpha > 1e-12) || !std::isfinite(alpha)) {
      if (st.verbose) std::fprintf(stderr, "step length %g\n", alpha);
      break;
    }

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
  }
  // Stalled or out of iterations: fall back to the best iterate seen when it
  // meets the relaxed tolerances.
  if (best && best->merit <= st.reduced_tol) {
    out.primal_residual = best->pres;
    out.dual_residual = best->dres;
    out.gap = best->gap;
    return finish(Status::reduced_accuracy, best->x, best->y, best->z, best->s, best->tau);
  }
  return finish(Status::numerical_limit, x, y, z, s, tau);
}

}  // namespace gridcomp::conic
