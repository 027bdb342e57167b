#include "gridcomp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "gridcomp/conic/oracle.hpp"
#include "gridcomp/errors.hpp"
#include "gridcomp/json_io.hpp"

namespace gridcomp {

using nlohmann::json;

namespace {

constexpr int kTraceVersion = 1;
constexpr const char* kLayout =
    "H_re/H_im hold one list per user k (column k of H); entry r of a column is antenna r % M "
    "of BS r / M, BS-major. intervals[n].res is per BS per interval; slot t belongs to interval t / T.";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kPriceLt = 1, kRes = 2, kPriceRt = 3, kChannel = 4 };

}  // namespace

void ScenarioParams::validate() const {
  auto fail = [](const std::string& what) { throw InvalidArgument("ScenarioParams: " + what); };
  if (!(mean_buy_rt > 0.0 && mean_buy_lt > 0.0)) fail("mean prices must be positive");
  if (!(mean_buy_lt < mean_buy_rt)) fail("need mean_buy_lt < mean_buy_rt");
  if (!(sell_ratio_rt > 0.0 && sell_ratio_rt <= 1.0)) fail("sell_ratio_rt must lie in (0, 1]");
  if (!(sell_ratio_lt > 0.0 && sell_ratio_lt <= 1.0)) fail("sell_ratio_lt must lie in (0, 1]");
  if (!(price_rel_std >= 0.0 && res_rel_std >= 0.0)) fail("relative deviations must be >= 0");
  if (!(res_rate > 0.0)) fail("res_rate must be positive");
  if (!(price_cap >= 0.0) || !std::isfinite(price_cap)) fail("price_cap must be finite and >= 0");
  if (!(effective_price_cap() > mean_buy_rt)) fail("price cap must exceed mean_buy_rt");
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ULL)));
}

double folded_mean_factor(double r) {
  if (r == 0.0) return 1.0;
  // E|X| / mu = r sqrt(2/pi) exp(-1/(2 r^2)) + 1 - 2 Phi(-1/r)
  const double z = 1.0 / r;
  return r * std::sqrt(2.0 / M_PI) * std::exp(-0.5 * z * z) + 1.0 - std::erfc(z / std::sqrt(2.0));
}

double draw_folded_normal(Rng& rng, double mean, double rel_std, double cap) {
  if (!(mean > 0.0)) throw InvalidArgument("draw_folded_normal: mean must be positive");
  if (!(rel_std >= 0.0) || !(cap > 0.0)) throw InvalidArgument("draw_folded_normal: bad rel_std or cap");
  const double mu = mean / folded_mean_factor(rel_std);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double x = mu + rel_std * mu * nd(rng);
  return std::min(std::abs(x), cap);
}

ChannelState draw_channels(Rng& rng, const NetworkConfig& cfg) {
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  ChannelState h;
  h.H.resize(cfg.rows(), cfg.num_users);
  for (int k = 0; k < cfg.num_users; ++k)
    for (int r = 0; r < cfg.rows(); ++r) {
      const double re = nd(rng);
      const double im = nd(rng);
      h.H(r, k) = {re, im};
    }
  return h;
}

bool channel_passes_screen(const ChannelState& h, const NetworkConfig& cfg, double sinr) {
  NetworkConfig probe = cfg;
  probe.sinr_targets.assign(static_cast<std::size_t>(cfg.num_users), sinr);
  const std::vector<double> ones(static_cast<std::size_t>(cfg.num_bs), 1.0);
  const auto sol = conic::weighted_power_min(probe, h, ones);
  if (!sol) return false;
  const double room = cfg.max_consumption - cfg.circuit_power;
  return std::all_of(sol->bs_power.begin(), sol->bs_power.end(), [&](double p) { return p <= room; });
}

void Trace::validate() const {
  config.validate();
  params.validate();
  if (static_cast<std::size_t>(num_intervals()) * config.interval_len != slots.size())
    throw InvalidArgument("Trace: slot count must equal intervals * T");
  for (const auto& iv : intervals) {
    if (!(iv.buy_price_lt >= iv.sell_price_lt && iv.sell_price_lt >= 0.0))
      throw InvalidArgument("Trace: interval prices out of order");
    if (static_cast<int>(iv.res_arrivals.size()) != config.num_bs)
      throw InvalidArgument("Trace: one harvest value per BS");
  }
  for (const auto& s : slots) {
    if (!(s.buy_price >= s.sell_price && s.sell_price >= 0.0))
      throw InvalidArgument("Trace: slot prices out of order");
    check_shape(s.channels, config);
    if (!s.channels.H.allFinite()) throw InvalidArgument("Trace: non-finite channel");
  }
}

Trace generate_trace(const NetworkConfig& cfg, const ScenarioParams& params, int num_intervals) {
  cfg.validate();
  params.validate();
  if (num_intervals < 1) throw InvalidArgument("generate_trace: need at least one interval");
  Trace tr;
  tr.config = cfg;
  tr.params = params;
  const int T = cfg.interval_len;
  const double cap = params.effective_price_cap();
  const double inf = std::numeric_limits<double>::infinity();

  Rng rng_lt = make_rng(params.seed, kPriceLt);
  Rng rng_res = make_rng(params.seed, kRes);
  Rng rng_rt = make_rng(params.seed, kPriceRt);
  Rng rng_ch = make_rng(params.seed, kChannel);

  double screen = 0.0;
  if (params.channel_screen && cfg.num_users > 0) {
    screen = std::isnan(params.channel_screen_db)
                 ? *std::max_element(cfg.sinr_targets.begin(), cfg.sinr_targets.end())
                 : db_to_linear(params.channel_screen_db);
  }

  for (int n = 0; n < num_intervals; ++n) {
    IntervalRandomness iv;
    iv.buy_price_lt = draw_folded_normal(rng_lt, params.mean_buy_lt, params.price_rel_std, cap);
    iv.sell_price_lt = params.sell_ratio_lt * iv.buy_price_lt;
    for (int i = 0; i < cfg.num_bs; ++i)
      iv.res_arrivals.push_back(draw_folded_normal(rng_res, T * params.res_rate, params.res_rel_std, inf));
    tr.intervals.push_back(iv);
    for (int t = 0; t < T; ++t) {
      SlotRandomness s;
      s.buy_price = draw_folded_normal(rng_rt, params.mean_buy_rt, params.price_rel_std, cap);
      s.sell_price = params.sell_ratio_rt * s.buy_price;
      s.channels = draw_channels(rng_ch, cfg);
      if (screen > 0.0) {
        int tries = 1;
        while (!channel_passes_screen(s.channels, cfg, screen)) {
          if (++tries > 10000) throw InvalidArgument("generate_trace: channel screen rejects every draw");
          s.channels = draw_channels(rng_ch, cfg);
        }
      }
      for (double a : iv.res_arrivals) s.res_arrivals.push_back(a / T);
      tr.slots.push_back(std::move(s));
    }
  }
  return tr;
}

std::uint64_t trace_checksum(const Trace& tr) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& iv : tr.intervals) {
    mix(iv.buy_price_lt);
    mix(iv.sell_price_lt);
    for (double a : iv.res_arrivals) mix(a);
  }
  for (const auto& s : tr.slots) {
    mix(s.buy_price);
    mix(s.sell_price);
    for (Eigen::Index i = 0; i < s.channels.H.size(); ++i) {
      mix(s.channels.H.data()[i].real());
      mix(s.channels.H.data()[i].imag());
    }
  }
  return h;
}

void save_trace(const Trace& tr, std::ostream& out) {
  json j;
  j["version"] = kTraceVersion;
  j["layout"] = kLayout;
  j["config"] = to_json(tr.config);
  j["params"] = to_json(tr.params);
  json ivs = json::array();
  for (const auto& iv : tr.intervals)
    ivs.push_back({{"alpha_lt", iv.buy_price_lt}, {"beta_lt", iv.sell_price_lt}, {"res", iv.res_arrivals}});
  j["intervals"] = std::move(ivs);
  json slots = json::array();
  for (const auto& s : tr.slots) {
    json re = json::array(), im = json::array();
    for (Eigen::Index k = 0; k < s.channels.H.cols(); ++k) {
      std::vector<double> cr, ci;
      for (Eigen::Index r = 0; r < s.channels.H.rows(); ++r) {
        cr.push_back(s.channels.H(r, k).real());
        ci.push_back(s.channels.H(r, k).imag());
      }
      re.push_back(cr);
      im.push_back(ci);
    }
    slots.push_back({{"alpha_rt", s.buy_price}, {"beta_rt", s.sell_price}, {"H_re", re}, {"H_im", im}});
  }
  j["slots"] = std::move(slots);
  out << j.dump(1) << '\n';
  if (!out) throw Error("save_trace: write failed");
}

Trace load_trace(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("trace: parse error: ") + e.what());
  }
  try {
    reject_unknown_keys(j, {"version", "layout", "config", "params", "intervals", "slots"}, "trace");
    if (!j.contains("version") || j.at("version").get<int>() != kTraceVersion)
      throw FormatError("trace: unsupported version (expected " + std::to_string(kTraceVersion) + ")");
    Trace tr;
    tr.config = network_config_from_json(j.at("config"));
    tr.params = scenario_params_from_json(j.at("params"));
    const int T = tr.config.interval_len;
    for (const auto& jv : j.at("intervals")) {
      reject_unknown_keys(jv, {"alpha_lt", "beta_lt", "res"}, "interval");
      IntervalRandomness iv;
      iv.buy_price_lt = jv.at("alpha_lt").get<double>();
      iv.sell_price_lt = jv.at("beta_lt").get<double>();
      iv.res_arrivals = jv.at("res").get<std::vector<double>>();
      tr.intervals.push_back(std::move(iv));
    }
    const auto& js = j.at("slots");
    if (js.size() != tr.intervals.size() * static_cast<std::size_t>(T))
      throw FormatError("trace: slot count must equal intervals * T");
    std::size_t t = 0;
    for (const auto& jslot : js) {
      reject_unknown_keys(jslot, {"alpha_rt", "beta_rt", "H_re", "H_im"}, "slot");
      SlotRandomness s;
      s.buy_price = jslot.at("alpha_rt").get<double>();
      s.sell_price = jslot.at("beta_rt").get<double>();
      const auto re = jslot.at("H_re").get<std::vector<std::vector<double>>>();
      const auto im = jslot.at("H_im").get<std::vector<std::vector<double>>>();
      const int R = tr.config.rows(), K = tr.config.num_users;
      if (static_cast<int>(re.size()) != K || static_cast<int>(im.size()) != K)
        throw FormatError("trace: slot " + std::to_string(t) + " has wrong user count");
      s.channels.H.resize(R, K);
      for (int k = 0; k < K; ++k) {
        if (static_cast<int>(re[k].size()) != R || static_cast<int>(im[k].size()) != R)
          throw FormatError("trace: slot " + std::to_string(t) + " has wrong antenna count");
        for (int r = 0; r < R; ++r) s.channels.H(r, k) = {re[k][r], im[k][r]};
      }
      for (double a : tr.intervals[t / T].res_arrivals) s.res_arrivals.push_back(a / T);
      tr.slots.push_back(std::move(s));
      ++t;
    }
    try {
      tr.validate();
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("trace: ") + e.what());
    }
    return tr;
  } catch (const json::exception& e) {
    throw FormatError(std::string("trace: ") + e.what());
  }
}

void save_trace_file(const Trace& tr, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  save_trace(tr, f);
}

Trace load_trace_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return load_trace(f);
}

}  // namespace gridcomp
