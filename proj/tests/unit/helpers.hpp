#pragma once

#include <complex>
#include <vector>

#include "gridcomp/model.hpp"
#include "gridcomp/scenario.hpp"

namespace gridcomp::testing {

// Single BS, single antenna, single user with h = 1.
inline NetworkConfig scalar_network(double sinr_db = 5.0) {
  NetworkConfig c;
  c.num_bs = 1;
  c.num_antennas = 1;
  c.num_users = 1;
  c.sinr_targets = {db_to_linear(sinr_db)};
  c.noise_vars = {1.0};
  c.validate();
  return c;
}

inline ChannelState unit_channel(const NetworkConfig& c) {
  ChannelState h;
  h.H = CMatrix::Zero(c.rows(), c.num_users);
  for (int k = 0; k < c.num_users; ++k) h.H(k % c.rows(), k) = 1.0;
  return h;
}

// Trace with identical prices, harvest and channels in every slot.
inline Trace constant_trace(const NetworkConfig& cfg, int intervals, double buy_rt, double sell_rt, double buy_lt,
                            double sell_lt, double harvest_per_interval) {
  Trace t;
  t.config = cfg;
  if (buy_lt < buy_rt) {
    t.params.mean_buy_rt = buy_rt;
    t.params.mean_buy_lt = buy_lt;
  }
  const ChannelState h = unit_channel(cfg);
  for (int n = 0; n < intervals; ++n) {
    IntervalRandomness lt;
    lt.buy_price_lt = buy_lt;
    lt.sell_price_lt = sell_lt;
    lt.res_arrivals.assign(cfg.num_bs, harvest_per_interval);
    t.intervals.push_back(lt);
    for (int s = 0; s < cfg.interval_len; ++s) {
      SlotRandomness slot;
      slot.buy_price = buy_rt;
      slot.sell_price = sell_rt;
      slot.channels = h;
      slot.res_arrivals.assign(cfg.num_bs, harvest_per_interval / cfg.interval_len);
      t.slots.push_back(slot);
    }
  }
  t.validate();
  return t;
}

inline Trace reference_trace(int intervals, std::uint64_t seed) {
  ScenarioParams sp;
  sp.seed = seed;
  return generate_trace(NetworkConfig::reference(), sp, intervals);
}

}  // namespace gridcomp::testing
