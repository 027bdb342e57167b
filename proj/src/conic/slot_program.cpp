#include "gridcomp/conic/slot_program.hpp"

#include <cmath>

#include "gridcomp/errors.hpp"

namespace gridcomp::conic {

Eigen::Matrix<double, 2, Eigen::Dynamic> embed_complex(const CVector& h) {
  const Eigen::Index n = h.size();
  Eigen::Matrix<double, 2, Eigen::Dynamic> m(2, 2 * n);
  // h^H w = (hr - j hi)'(wr + j wi)
  for (Eigen::Index r = 0; r < n; ++r) {
    const double hr = h[r].real(), hi = h[r].imag();
    m(0, r) = hr;
    m(0, n + r) = hi;
    m(1, r) = -hi;
    m(1, n + r) = hr;
  }
  return m;
}

namespace {

AffineExpr linear_row(const Eigen::Matrix<double, 2, Eigen::Dynamic>& emb, int row, const Slice& w,
                      double scale = 1.0) {
  AffineExpr e;
  for (int j = 0; j < w.length; ++j) e.add(w[j], scale * emb(row, j));
  return e;
}

}  // namespace

BeamformingBlock add_beamforming(ProgramBuilder& b, const NetworkConfig& cfg, const ChannelState& h,
                                 const std::string& tag) {
  check_shape(h, cfg);
  const int K = cfg.num_users, I = cfg.num_bs, M = cfg.num_antennas, R = cfg.rows();
  BeamformingBlock blk;
  for (int k = 0; k < K; ++k) blk.w.push_back(b.add_vars(tag + "w" + std::to_string(k), 2 * R));
  blk.power = b.add_vars(tag + "p", I);

  for (int k = 0; k < K; ++k) {
    const auto emb = embed_complex(h.H.col(k));
    b.add_zero(linear_row(emb, 1, blk.w[k]), tag + "phase" + std::to_string(k));
    std::vector<AffineExpr> rows;
    rows.push_back(linear_row(emb, 0, blk.w[k], 1.0 / std::sqrt(cfg.sinr_targets[k])));
    for (int l = 0; l < K; ++l) {
      if (l == k) continue;
      rows.push_back(linear_row(emb, 0, blk.w[l]));
      rows.push_back(linear_row(emb, 1, blk.w[l]));
    }
    rows.emplace_back(std::sqrt(cfg.noise_vars[k]));
    b.add_soc(std::move(rows), tag + "sinr" + std::to_string(k));
  }

  for (int i = 0; i < I; ++i) {
    if (K > 0) {
      std::vector<AffineExpr> cap;
      cap.emplace_back(std::sqrt(cfg.max_consumption - cfg.circuit_power));
      for (int k = 0; k < K; ++k)
        for (int part = 0; part < 2; ++part)
          for (int a = 0; a < M; ++a) cap.push_back(AffineExpr{}.add(blk.w[k][part * R + i * M + a], 1.0));
      b.add_soc(std::move(cap), tag + "cap" + std::to_string(i));
    }
    // (p + 1)^2 >= 4 ||W_i||^2 + (p - 1)^2  <=>  p >= ||W_i||^2
    std::vector<AffineExpr> rot;
    rot.push_back(AffineExpr(1.0).add(blk.power[i], 1.0));
    for (int k = 0; k < K; ++k)
      for (int part = 0; part < 2; ++part)
        for (int a = 0; a < M; ++a) rot.push_back(AffineExpr{}.add(blk.w[k][part * R + i * M + a], 2.0));
    rot.push_back(AffineExpr(-1.0).add(blk.power[i], 1.0));
    b.add_soc(std::move(rot), tag + "power" + std::to_string(i));
  }
  return blk;
}

ConicProgram build_slot_program(const NetworkConfig& cfg, const ChannelState& h, double buy,
                                double sell, std::span<const double> supply, double V,
                                std::span<const double> queue, const SlotOptions& opt) {
  cfg.validate();
  if (!(buy >= sell) || !(sell >= 0.0)) throw InvalidArgument("slot program: need buy >= sell >= 0");
  const int I = cfg.num_bs;
  if (static_cast<int>(supply.size()) != I || static_cast<int>(queue.size()) != I)
    throw ShapeMismatch("slot program: one supply and one queue value per BS");
  for (int i = 0; i < I; ++i)
    if (!std::isfinite(queue[i]) || !std::isfinite(supply[i]))
      throw InvalidArgument("slot program: non-finite queue or supply");

  ProgramBuilder b;
  const BeamformingBlock blk = add_beamforming(b, cfg, h);
  const Slice pb = b.add_vars("Pb", I);
  const Slice s = b.add_vars("s", I);

  for (int i = 0; i < I; ++i) {
    b.set_cost(s[i], 1.0);
    b.set_cost(pb[i], queue[i]);
    if (opt.fix_charge) {
      b.add_zero(AffineExpr{}.add(pb[i], 1.0));
    } else {
      b.add_nonneg(AffineExpr(-cfg.charge_min).add(pb[i], 1.0));
      b.add_nonneg(AffineExpr(cfg.charge_max).add(pb[i], -1.0));
    }
    for (int leg = 0; leg < 2; ++leg) {
      const double price = V * (leg == 0 ? buy : sell);
      AffineExpr e(-price * (cfg.circuit_power - supply[i]));
      e.add(s[i], 1.0).add(blk.power[i], -price).add(pb[i], -price);
      b.add_nonneg(std::move(e), (leg == 0 ? "epi_buy" : "epi_sell") + std::to_string(i));
    }
  }
  return std::move(b).finish();
}

SlotDecision extract_slot(const NetworkConfig& cfg, const ConicProgram& prog, const ConicSolution& sol,
                          double buy, double sell, std::span<const double> supply) {
  const int I = cfg.num_bs, K = cfg.num_users, R = cfg.rows();
  SlotDecision d;
  d.raw = sol;
  d.objective = sol.objective;
  d.w.W.resize(R, K);
  for (int k = 0; k < K; ++k) {
    const Slice& wk = prog.vars.at("w" + std::to_string(k));
    for (int r = 0; r < R; ++r) d.w.W(r, k) = {sol.x[wk[r]], sol.x[wk[R + r]]};
  }
  const Slice& pb = prog.vars.at("Pb");
  for (int i = 0; i < I; ++i) {
    const double charge = sol.x[pb[i]];
    const double pg = cfg.circuit_power + bs_power(d.w, i, cfg);
    const double u = pg - supply[i] + charge;
    d.charge.push_back(charge);
    d.consumption.push_back(pg);
    d.net_draw.push_back(u);
    d.cost += transaction_cost(u, buy, sell);
    const double zb = sol.dual[prog.named_rows.at("epi_buy" + std::to_string(i))];
    const double zs = sol.dual[prog.named_rows.at("epi_sell" + std::to_string(i))];
    const double tot = zb + zs;
    d.marginal_price.push_back(tot > 0.0 ? (zb * buy + zs * sell) / tot : 0.5 * (buy + sell));
  }
  return d;
}

SlotDecision solve_slot(const NetworkConfig& cfg, const ChannelState& h, double buy, double sell,
                        std::span<const double> supply, double V, std::span<const double> queue,
                        const SlotOptions& opt, const SolverSettings& settings) {
  const ConicProgram prog = build_slot_program(cfg, h, buy, sell, supply, V, queue, opt);
  const ConicSolution sol = solve(prog, settings);
  if (!sol.solved())
    throw SolverFailure(std::string("slot program not solved: ") + std::string(to_string(sol.status)));
  return extract_slot(cfg, prog, sol, buy, sell, supply);
}

}  // namespace gridcomp::conic
