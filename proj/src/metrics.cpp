#include "gridcomp/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "gridcomp/errors.hpp"

namespace gridcomp {

void audit_slot(const NetworkConfig& cfg, const ChannelState& h, const Beamformers& w, RunMetrics& m) {
  for (int k = 0; k < cfg.num_users; ++k) {
    const double ratio = sinr(h, w, k, cfg.noise_vars[k]) / cfg.sinr_targets[k];
    m.worst_sinr_shortfall = std::max(m.worst_sinr_shortfall, 1.0 - ratio);
    if (ratio < 1.0 - kSinrRelTol) ++m.sinr_violations;
  }
  for (int i = 0; i < cfg.num_bs; ++i) {
    try {
      total_consumption(w, i, cfg, kCapTol);
    } catch (const CapViolation& e) {
      ++m.cap_violations;
    }
    const double excess = cfg.circuit_power + bs_power(w, i, cfg) - cfg.max_consumption;
    m.worst_cap_excess = std::max(m.worst_cap_excess, excess);
  }
}

void finalize(RunMetrics& m) {
  m.mean_charge.clear();
  for (const auto& c : m.charge_series)
    m.mean_charge.push_back(c.empty() ? 0.0 : std::accumulate(c.begin(), c.end(), 0.0) / c.size());
  if (!m.cost_series.empty())
    m.avg_cost = std::accumulate(m.cost_series.begin(), m.cost_series.end(), 0.0) / m.cost_series.size();
}

}  // namespace gridcomp
