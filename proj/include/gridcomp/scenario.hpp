#pragma once

// Reproducible random traces: ahead-of-time prices and harvests per coarse
// interval, real-time prices and channels per slot.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gridcomp/model.hpp"

namespace gridcomp {

struct ScenarioParams {
  double mean_buy_rt = 2.3;   // $/kWh
  double mean_buy_lt = 1.5;   // $/kWh
  double sell_ratio_rt = 0.3;
  double sell_ratio_lt = 0.9;
  double price_rel_std = 1.0;
  double res_rate = 1.6;      // kWh/slot per BS
  double res_rel_std = 0.25;
  double price_cap = 0.0;     // 0 selects 3 * mean_buy_rt
  // Channel draws are redrawn until the sum-power beamformer for this SINR
  // (dB) fits every BS cap. NaN screens at the largest configured target.
  bool channel_screen = true;
  double channel_screen_db = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 1;

  double effective_price_cap() const { return price_cap > 0.0 ? price_cap : 3.0 * mean_buy_rt; }
  void validate() const;
};

using Rng = std::mt19937_64;

// Independent stream for (seed, stream id).
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

// Scale factor E|X| / mu of X ~ Normal(mu, (rel_std mu)^2).
double folded_mean_factor(double rel_std);

// min(|X|, cap), X ~ Normal(mu, (rel_std mu)^2), mu calibrated so that the
// uncapped folded mean equals `mean`.
double draw_folded_normal(Rng& rng, double mean, double rel_std, double cap);

// Entries i.i.d. CN(0, 1).
ChannelState draw_channels(Rng& rng, const NetworkConfig& cfg);

// True when the minimum sum-power beamformers for the given SINR (linear,
// all users) keep every BS within its consumption cap.
bool channel_passes_screen(const ChannelState& h, const NetworkConfig& cfg, double sinr);

struct Trace {
  NetworkConfig config;
  ScenarioParams params;
  std::vector<IntervalRandomness> intervals;
  // res_arrivals of every slot holds A_i[n] / T of its interval.
  std::vector<SlotRandomness> slots;

  int num_intervals() const { return static_cast<int>(intervals.size()); }
  int num_slots() const { return static_cast<int>(slots.size()); }
  void validate() const;
};

Trace generate_trace(const NetworkConfig& cfg, const ScenarioParams& params, int num_intervals);

// FNV-1a over every number in the trace; identical traces give identical sums.
std::uint64_t trace_checksum(const Trace& trace);

void save_trace(const Trace& trace, std::ostream& out);
// Throws FormatError on malformed input or a version mismatch.
Trace load_trace(std::istream& in);

void save_trace_file(const Trace& trace, const std::string& path);
Trace load_trace_file(const std::string& path);

}  // namespace gridcomp
