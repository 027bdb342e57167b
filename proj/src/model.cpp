#include "gridcomp/model.hpp"

#include <cmath>
#include <span>
#include <string>

#include "gridcomp/errors.hpp"
#include "gridcomp/kernels.hpp"

namespace gridcomp {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

void NetworkConfig::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("NetworkConfig: " + what); };
  if (num_bs < 1 || num_antennas < 1) fail("need I >= 1 and M >= 1");
  if (num_users < 0) fail("negative user count");
  if (static_cast<int>(sinr_targets.size()) != num_users) fail("one SINR target per user");
  if (static_cast<int>(noise_vars.size()) != num_users) fail("one noise variance per user");
  for (double g : sinr_targets)
    if (!(g > 0.0) || !std::isfinite(g)) fail("SINR targets must be positive");
  for (double s : noise_vars)
    if (!(s > 0.0) || !std::isfinite(s)) fail("noise variances must be positive");
  if (!(battery_min <= battery_max)) fail("C_min > C_max");
  if (!(charge_min < 0.0 && charge_max > 0.0)) fail("need P_b^min < 0 < P_b^max");
  if (!(circuit_power > 0.0)) fail("P_c must be positive");
  if (!(max_consumption > circuit_power)) fail("P_g^max must exceed P_c");
  if (interval_len < 1) fail("T must be >= 1");
}

NetworkConfig NetworkConfig::reference() {
  NetworkConfig cfg;
  cfg.set_uniform_sinr_db(5.0);
  return cfg;
}

void NetworkConfig::set_uniform_sinr_db(double db) {
  sinr_targets.assign(static_cast<std::size_t>(num_users), db_to_linear(db));
  noise_vars.resize(static_cast<std::size_t>(num_users), 1.0);
}

double transaction_cost(double net_draw, double buy, double sell) {
  if (!(buy >= sell) || !(sell >= 0.0))
    throw InvalidArgument("transaction_cost: need buy >= sell >= 0");
  return std::max(buy * net_draw, sell * net_draw);
}

void check_shape(const ChannelState& h, const NetworkConfig& cfg) {
  if (h.H.rows() != cfg.rows() || h.H.cols() != cfg.num_users)
    throw ShapeMismatch("channel matrix shape does not match config");
}

void check_shape(const Beamformers& w, const NetworkConfig& cfg) {
  if (w.W.rows() != cfg.rows() || w.W.cols() != cfg.num_users)
    throw ShapeMismatch("beamformer matrix shape does not match config");
}

double bs_power(const Beamformers& w, int bs, const NetworkConfig& cfg) {
  check_shape(w, cfg);
  if (bs < 0 || bs >= cfg.num_bs) throw ShapeMismatch("BS index out of range");
  const int m = cfg.num_antennas;
  double p = 0.0;
  for (int k = 0; k < cfg.num_users; ++k) {
    const double* seg = reinterpret_cast<const double*>(w.W.col(k).data() + bs * m);
    p += kernels::sum_squares({seg, static_cast<std::size_t>(2 * m)});
  }
  return p;
}

double total_consumption(const Beamformers& w, int bs, const NetworkConfig& cfg, double slack) {
  const double pg = cfg.circuit_power + bs_power(w, bs, cfg);
  if (pg > cfg.max_consumption + slack) throw CapViolation(bs, pg - cfg.max_consumption);
  return pg;
}

double sinr(const ChannelState& h, const Beamformers& w, int user, double noise_var) {
  if (h.H.rows() != w.W.rows() || h.H.cols() != w.W.cols())
    throw ShapeMismatch("sinr: H and W shapes differ");
  if (user < 0 || user >= h.H.cols()) throw ShapeMismatch("sinr: user index out of range");
  if (!(noise_var > 0.0)) throw InvalidArgument("sinr: noise variance must be positive");
  const auto n = static_cast<std::size_t>(h.H.rows());
  std::span<const std::complex<double>> hk{h.H.col(user).data(), n};
  double signal = 0.0, interference = 0.0;
  for (Eigen::Index l = 0; l < w.W.cols(); ++l) {
    const double g = std::norm(kernels::dot_conj(hk, {w.W.col(l).data(), n}));
    if (l == user)
      signal = g;
    else
      interference += g;
  }
  return signal / (interference + noise_var);
}

double battery_step(double level, double charge, const NetworkConfig& cfg, double slack) {
  if (charge < cfg.charge_min - slack || charge > cfg.charge_max + slack)
    throw InvalidArgument("battery_step: charge outside [P_b^min, P_b^max]");
  const double next = level + charge;
  if (next < cfg.battery_min - slack || next > cfg.battery_max + slack)
    throw BatteryBoundViolation(-1, next);
  return next;
}

double lt_cost(double plan, double res, double buy_lt, double sell_lt) {
  return transaction_cost(plan - res, buy_lt, sell_lt);
}

double max_plan(const NetworkConfig& cfg) {
  return cfg.interval_len * (cfg.max_consumption + cfg.charge_max);
}

double slot_cost_mtep(double plan, double res, double buy_lt, double sell_lt, double buy_rt,
                      double sell_rt, double consumption, double charge, int interval_len) {
  if (interval_len < 1) throw InvalidArgument("slot_cost_mtep: T must be >= 1");
  const double t = static_cast<double>(interval_len);
  const double rt_draw = consumption - plan / t + charge;
  return lt_cost(plan, res, buy_lt, sell_lt) / t + transaction_cost(rt_draw, buy_rt, sell_rt);
}

}  // namespace gridcomp
