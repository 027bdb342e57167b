#include "gridcomp/conic/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "gridcomp/errors.hpp"

namespace gridcomp::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

WeightedPowerSolution finish(const NetworkConfig& cfg, CMatrix W) {
  WeightedPowerSolution sol;
  sol.w.W = std::move(W);
  for (int i = 0; i < cfg.num_bs; ++i) sol.bs_power.push_back(bs_power(sol.w, i, cfg));
  return sol;
}

}  // namespace

std::optional<WeightedPowerSolution> weighted_power_min(const NetworkConfig& cfg, const ChannelState& h,
                                                        std::span<const double> weights) {
  check_shape(h, cfg);
  const int K = cfg.num_users, R = cfg.rows(), M = cfg.num_antennas;
  if (static_cast<int>(weights.size()) != cfg.num_bs) throw ShapeMismatch("one weight per BS");
  Eigen::VectorXd d(R);
  for (int i = 0; i < cfg.num_bs; ++i) {
    if (!(weights[i] > 0.0)) throw InvalidArgument("weights must be positive");
    d.segment(i * M, M).setConstant(weights[i]);
  }
  if (K == 0) return finish(cfg, CMatrix(R, 0));

  if (K == 1) {
    const CVector& hk = h.H.col(0);
    const CVector dinv_h = hk.cwiseQuotient(d.cast<std::complex<double>>());
    const double g = hk.dot(dinv_h).real();  // h^H D^{-1} h
    if (!(g > 0.0)) return std::nullopt;
    const double c = std::sqrt(cfg.sinr_targets[0] * cfg.noise_vars[0]) / g;
    return finish(cfg, c * dinv_h);
  }

  // Uplink dual powers: q_k = 1 / ((1 + 1/gamma_k) h_k^H S(q)^{-1} h_k),
  // S(q) = D + sum_l q_l h_l h_l^H. Monotone from q = 0; diverges when infeasible.
  Eigen::VectorXd q = Eigen::VectorXd::Zero(K);
  CMatrix dirs(R, K);
  bool converged = false;
  for (int it = 0; it < 200000 && !converged; ++it) {
    CMatrix S = d.cast<std::complex<double>>().asDiagonal();
    for (int l = 0; l < K; ++l) S += q[l] * h.H.col(l) * h.H.col(l).adjoint();
    Eigen::LDLT<CMatrix> ldlt(S);
    dirs = ldlt.solve(h.H);
    Eigen::VectorXd next(K);
    for (int k = 0; k < K; ++k) {
      const double quad = h.H.col(k).dot(dirs.col(k)).real();
      next[k] = 1.0 / ((1.0 + 1.0 / cfg.sinr_targets[k]) * quad);
    }
    if (!next.allFinite() || next.maxCoeff() > 1e14) return std::nullopt;
    converged = (next - q).lpNorm<Eigen::Infinity>() <= 1e-15 * std::max(1.0, next.lpNorm<Eigen::Infinity>());
    q = next;
  }
  if (!converged) return std::nullopt;

  for (int k = 0; k < K; ++k) dirs.col(k).normalize();
  // Downlink powers meeting every target with equality.
  Eigen::MatrixXd A(K, K);
  Eigen::VectorXd rhs(K);
  for (int k = 0; k < K; ++k) {
    rhs[k] = cfg.noise_vars[k];
    for (int l = 0; l < K; ++l) {
      const double g = std::norm(h.H.col(k).dot(dirs.col(l)));
      A(k, l) = l == k ? g / cfg.sinr_targets[k] : -g;
    }
  }
  const Eigen::VectorXd p = A.partialPivLu().solve(rhs);
  if (!p.allFinite() || p.minCoeff() < 0.0) return std::nullopt;
  CMatrix W(R, K);
  for (int k = 0; k < K; ++k) W.col(k) = std::sqrt(p[k]) * dirs.col(k);
  return finish(cfg, std::move(W));
}

double best_charge_value(const NetworkConfig& cfg, double power, double buy, double sell, double supply,
                         double V, double queue) {
  const double base = cfg.circuit_power + power - supply;
  const double cands[3] = {cfg.charge_min, cfg.charge_max, std::clamp(-base, cfg.charge_min, cfg.charge_max)};
  double best = kInf;
  for (double pb : cands) best = std::min(best, V * transaction_cost(base + pb, buy, sell) + queue * pb);
  return best;
}

double oracle_solve(const NetworkConfig& cfg, const ChannelState& h, double buy, double sell,
                    std::span<const double> supply, double V, std::span<const double> queue,
                    int grid_density) {
  cfg.validate();
  check_shape(h, cfg);
  const int I = cfg.num_bs;
  if (I > 2 || cfg.num_antennas > 2 || cfg.num_users > 2)
    throw InvalidArgument("oracle_solve: instance too large (need I, M, K <= 2)");
  if (grid_density < 0 || grid_density > 20) throw InvalidArgument("oracle_solve: grid density out of range");
  if (static_cast<int>(supply.size()) != I || static_cast<int>(queue.size()) != I)
    throw ShapeMismatch("oracle_solve: one supply and one queue value per BS");

  const double cap = cfg.max_consumption - cfg.circuit_power;
  auto value = [&](std::span<const double> pw) {
    double v = 0.0;
    for (int i = 0; i < I; ++i) {
      if (pw[i] > cap * (1.0 + 1e-12)) return kInf;
      v += best_charge_value(cfg, pw[i], buy, sell, supply[i], V, queue[i]);
    }
    return v;
  };

  if (I == 1) {
    const double one = 1.0;
    const auto sol = weighted_power_min(cfg, h, {&one, 1});
    return sol ? value(sol->bs_power) : kInf;
  }

  // Boundary points of the two-BS power region.
  std::vector<std::array<double, 2>> verts;
  const int segments = 1 << grid_density;
  std::vector<double> ts{1e-4, 1.0 - 1e-4};
  for (int j = 1; j < segments; ++j) ts.push_back(static_cast<double>(j) / segments);
  for (double t : ts) {
    const double wts[2] = {t, 1.0 - t};
    if (const auto sol = weighted_power_min(cfg, h, wts)) verts.push_back({sol->bs_power[0], sol->bs_power[1]});
  }
  if (verts.empty()) return kInf;
  std::sort(verts.begin(), verts.end());

  // Along a chord the objective is convex piecewise linear with kinks where a
  // BS power crosses a charge breakpoint or the cap.
  double best = kInf;
  for (const auto& v : verts) best = std::min(best, value(v));
  for (std::size_t c = 0; c + 1 < verts.size(); ++c) {
    const auto& a = verts[c];
    const auto& b = verts[c + 1];
    for (int i = 0; i < 2; ++i) {
      const double kinks[3] = {supply[i] - cfg.circuit_power - cfg.charge_max,
                               supply[i] - cfg.circuit_power - cfg.charge_min, cap};
      const double span = b[i] - a[i];
      if (span == 0.0) continue;
      for (double k : kinks) {
        const double s = (k - a[i]) / span;
        if (!(s > 0.0 && s < 1.0)) continue;
        const double pt[2] = {a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])};
        best = std::min(best, value(pt));
      }
    }
  }
  return best;
}

}  // namespace gridcomp::conic
