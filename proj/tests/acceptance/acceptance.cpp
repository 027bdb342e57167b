// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned below.
//
//   acceptance --cli PATH --configs DIR --work DIR [--jobs N] [--quick]
//
// --quick shrinks every sweep for development runs; its verdicts are not the
// acceptance verdicts.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "gridcomp/baselines.hpp"
#include "gridcomp/harness/config.hpp"
#include "gridcomp/harness/emit.hpp"
#include "gridcomp/harness/experiment.hpp"
#include "gridcomp/harness/verify.hpp"
#include "gridcomp/twet.hpp"

using namespace gridcomp;
using namespace gridcomp::harness;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr int kOracleInstances = 120;
constexpr int kClosedFormInstances = 100;
constexpr double kOracleRelTol = 1e-4;
constexpr double kClosedFormRelTol = 1e-5;
constexpr double kOracleBudgetS = 60.0;
// Criterion 3
constexpr double kOrderSlack = 1e-5;
constexpr double kMtepBeatsTwetShare = 0.9;
// Criterion 4
constexpr double kFlatRel = 0.02;
constexpr double kTwetReduction = 0.30;
constexpr double kMtepReduction = 0.45;
constexpr double kFig2BudgetS = 15.0 * 60.0;
// Criterion 6
constexpr double kMinR2 = 0.95;
constexpr int kMinGapPoints = 4;
// Criterion 7
constexpr int kBoundSeeds = 20;
constexpr int kBoundSlots = 200;
constexpr double kBoundStderrs = 2.0;
const std::vector<double> kBoundVFractions{0.3, 0.6, 0.9};
// Criterion 8
constexpr int kSubgradientPairs = 1000;
constexpr double kConvexitySlack = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  int id;
  bool pass;
  std::string summary;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& summary) {
  verdicts.push_back({id, pass, summary});
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Aggregate curve of one algorithm, ordered by axis value.
struct Curve {
  std::vector<double> x, mean, se;
};

Curve curve(const std::vector<AggregateRow>& agg, Algorithm a) {
  Curve c;
  for (const auto& r : agg)
    if (r.algorithm == a) {
      c.x.push_back(r.axis_value);
      c.mean.push_back(r.mean);
      c.se.push_back(r.stderr_);
    }
  return c;
}

double rel_spread(const Curve& c) {
  const auto [lo, hi] = std::minmax_element(c.mean.begin(), c.mean.end());
  double avg = 0.0;
  for (double m : c.mean) avg += m / c.mean.size();
  return (*hi - *lo) / std::abs(avg);
}

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
}

std::string join(const std::vector<double>& v, const char* f = "%.4g") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(f, v[i]);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Options {
  std::string cli, configs, work;
  int jobs = 1;
  bool quick = false;
};

ExperimentConfig load(const Options& o, const std::string& name) {
  ExperimentConfig cfg = load_experiment_config((fs::path(o.configs) / (name + ".cfg")).string());
  if (o.quick) {
    cfg.num_seeds = 3;
    cfg.horizon = 40;
  }
  return cfg;
}

struct Sweep {
  ExperimentConfig cfg;
  ResultTable table;
  std::vector<AggregateRow> agg;
  double seconds = 0.0;
};

Sweep run_sweep(const Options& o, const std::string& name) {
  Sweep s;
  s.cfg = load(o, name);
  const auto t0 = Clock::now();
  s.table = run_experiment(s.cfg, o.jobs);
  s.seconds = seconds_since(t0);
  s.agg = aggregate(s.table);
  std::printf("  %s: %zu runs in %.1f s\n", name.c_str(), s.table.rows.size(), s.seconds);
  for (const auto& a : s.agg)
    std::printf("    %-6g %-8s %.6f +- %.6f\n", a.axis_value, std::string(to_string(a.algorithm)).c_str(), a.mean,
                a.stderr_);
  std::fflush(stdout);
  return s;
}

// Criterion 1
void solver_correctness() {
  const auto t0 = Clock::now();
  const CheckResult oracle = check_oracle_equivalence(kOracleInstances, 1, kOracleRelTol);
  const CheckResult closed = check_single_user_closed_form(kClosedFormInstances, 1, kClosedFormRelTol);
  const double secs = seconds_since(t0);
  const bool pass = oracle.passed() && closed.passed() && oracle.cases >= 100 && secs < kOracleBudgetS;
  report(1, pass,
         fmt("oracle %d/%d within %.0e (worst %.2e), closed form %d/%d within %.0e (worst %.2e), %.1f s%s%s",
             oracle.cases - oracle.failures, oracle.cases, kOracleRelTol, oracle.worst, closed.cases - closed.failures,
             closed.cases, kClosedFormRelTol, closed.worst, secs, oracle.detail.empty() ? "" : "; ",
             oracle.detail.c_str()));
}

// Criterion 2
void feasibility(const std::vector<const Sweep*>& sweeps) {
  int runs = 0, failed = 0, battery = 0, sinr_v = 0, cap = 0;
  double worst_sinr = 0.0, worst_cap = 0.0;
  std::string first;
  for (const Sweep* s : sweeps)
    for (const auto& r : s->table.rows) {
      ++runs;
      if (!r.ok) {
        ++failed;
        if (first.empty()) first = s->cfg.name + ": " + r.message;
      }
      battery += r.battery_violations;
      sinr_v += r.sinr_violations;
      cap += r.cap_violations;
      worst_sinr = std::max(worst_sinr, r.worst_sinr_shortfall);
      worst_cap = std::max(worst_cap, r.worst_cap_excess);
    }
  const bool pass = failed == 0 && battery == 0 && sinr_v == 0 && cap == 0;
  report(2, pass,
         fmt("%d runs over %zu sweeps: %d failed, battery %d, sinr %d (worst shortfall %.1e), cap %d (worst %.1e)%s%s",
             runs, sweeps.size(), failed, battery, sinr_v, worst_sinr, cap, worst_cap, first.empty() ? "" : "; ",
             first.c_str()));
}

// Criterion 3
void cost_ordering(const Sweep& s) {
  std::map<std::pair<double, int>, std::map<Algorithm, double>> cells;
  for (const auto& r : s.table.rows) cells[{r.axis_value, r.seed}][r.algorithm] = r.avg_cost;
  int broken = 0;
  double worst = -1e300;
  std::string first;
  for (const auto& [key, c] : cells) {
    const double off = c.at(Algorithm::offline), tw = c.at(Algorithm::twet), mt = c.at(Algorithm::mtep),
                 heu = c.at(Algorithm::heu);
    const double excess = std::max({off - mt, off - tw, tw - heu});
    worst = std::max(worst, excess);
    if (!(excess <= kOrderSlack)) {
      if (first.empty())
        first = fmt("x=%g seed %d: offline %.6f mtep %.6f twet %.6f heu %.6f", key.first, key.second, off, mt, tw, heu);
      ++broken;
    }
  }
  const Curve tw = curve(s.agg, Algorithm::twet), mt = curve(s.agg, Algorithm::mtep);
  int better = 0;
  for (std::size_t i = 0; i < tw.x.size(); ++i) better += mt.mean[i] <= tw.mean[i] ? 1 : 0;
  const double share = static_cast<double>(better) / tw.x.size();
  const bool pass = broken == 0 && share >= kMtepBeatsTwetShare;
  report(3, pass,
         fmt("%zu cells, %d ordering breaches (largest excess %.2e, slack %.0e); MTEP <= TWET on %d/%zu axis points%s%s",
             cells.size(), broken, worst, kOrderSlack, better, tw.x.size(), first.empty() ? "" : "; ", first.c_str()));
}

bool nonincreasing_within_stderr(const Curve& c) {
  for (std::size_t i = 1; i < c.mean.size(); ++i)
    if (c.mean[i] > c.mean[i - 1] + std::max(c.se[i], c.se[i - 1])) return false;
  return true;
}

// Criterion 4
void fig2(const Sweep& s) {
  const Curve heu = curve(s.agg, Algorithm::heu), off = curve(s.agg, Algorithm::offline),
              tw = curve(s.agg, Algorithm::twet), mt = curve(s.agg, Algorithm::mtep);
  const double heu_flat = rel_spread(heu), off_flat = rel_spread(off);
  const double red_tw = 1.0 - tw.mean.back() / heu.mean.back(), red_mt = 1.0 - mt.mean.back() / heu.mean.back();
  const bool mono = nonincreasing_within_stderr(tw) && nonincreasing_within_stderr(mt);
  const bool pass = heu_flat <= kFlatRel && off_flat <= kFlatRel && mono && red_tw >= kTwetReduction &&
                    red_mt >= kMtepReduction && s.seconds <= kFig2BudgetS && s.cfg.grid.back() == 120.0;
  report(4, pass,
         fmt("spread heu %.2f%% offline %.2f%%; twet [%s] mtep [%s] %s; reduction at C_max=%g: twet %.1f%% mtep %.1f%%; "
             "sweep %.0f s",
             100 * heu_flat, 100 * off_flat, join(tw.mean).c_str(), join(mt.mean).c_str(),
             mono ? "nonincreasing" : "NOT nonincreasing", tw.x.back(), 100 * red_tw, 100 * red_mt, s.seconds));
}

// Criterion 5
void fig3(const Sweep& s) {
  bool pass = true;
  std::string detail;
  for (Algorithm a : {Algorithm::heu, Algorithm::twet, Algorithm::mtep, Algorithm::offline}) {
    const Curve c = curve(s.agg, a);
    bool up = true;
    for (std::size_t i = 1; i < c.mean.size(); ++i) up = up && c.mean[i] >= c.mean[i - 1];
    pass = pass && up;
    detail += fmt("%s%s [%s]%s", detail.empty() ? "" : "; ", std::string(to_string(a)).c_str(),
                  join(c.mean).c_str(), up ? "" : " decreases");
  }
  report(5, pass, "gamma " + join(curve(s.agg, Algorithm::heu).x) + " dB: " + detail);
}

// Criterion 6
void fig4(const Sweep& s) {
  const Curve off = curve(s.agg, Algorithm::offline), mt = curve(s.agg, Algorithm::mtep),
              tw = curve(s.agg, Algorithm::twet);
  const double r2_off = r_squared(off.x, off.mean), r2_mt = r_squared(mt.x, mt.mean);
  const bool down = off.mean.back() < off.mean.front() && mt.mean.back() < mt.mean.front();
  std::vector<double> gap;
  for (std::size_t i = 0; i < tw.mean.size(); ++i) gap.push_back(tw.mean[i] - mt.mean[i]);
  bool shrinking = static_cast<int>(gap.size()) >= kMinGapPoints;
  for (std::size_t i = 1; i < gap.size(); ++i) shrinking = shrinking && gap[i] < gap[i - 1];
  const bool pass = r2_off >= kMinR2 && r2_mt >= kMinR2 && down && shrinking;
  report(6, pass,
         fmt("R^2 offline %.4f mtep %.4f (declining: %s); twet-mtep gap [%s] %s", r2_off, r2_mt, down ? "yes" : "no",
             join(gap).c_str(), shrinking ? "shrinking" : "NOT shrinking"));
}

// Criterion 7
//
// The bound holds for the long-run average against the optimum with no net
// battery use. Over a finite horizon the controller also pays L(Q(0)) / (V N)
// to move its queues from Q(0) to their working range, so the controllers start
// at the level where Q(0) = 0 and offline must end at least as charged as it
// starts. The C_min start with a free terminal level is printed for reference.
struct BoundCase {
  double twet = 0.0, offline = 0.0, gap = 0.0, se = 0.0;
};

BoundCase bound_case(const NetworkConfig& cfg, int seeds, double frac, double c0, bool neutral) {
  const int intervals = kBoundSlots / cfg.interval_len;
  TwetParams tp;
  tp.v_fraction = frac;
  tp.initial_battery = c0;
  OfflineParams op;
  op.mode = OfflineMode::single_timescale;
  op.initial_battery = c0;
  op.energy_neutral = neutral;
  BoundCase b;
  std::vector<double> diff;
  for (int s = 0; s < seeds; ++s) {
    ScenarioParams sp;
    sp.seed = cell_seed(0xB0B0, s);
    const Trace tr = generate_trace(cfg, sp, intervals);
    const double tw = twet_run(tr, tp).avg_cost, off = offline_solve(tr, op).avg_cost;
    diff.push_back(tw - off);
    b.twet += tw / seeds;
    b.offline += off / seeds;
  }
  double var = 0.0;
  for (double d : diff) b.gap += d / seeds;
  for (double d : diff) var += (d - b.gap) * (d - b.gap) / (seeds - 1);
  b.se = std::sqrt(var / seeds);
  return b;
}

void theorem_bound(const Options& o) {
  NetworkConfig cfg;
  cfg.num_bs = 1;
  cfg.num_antennas = 1;
  cfg.num_users = 1;
  cfg.sinr_targets = {db_to_linear(5.0)};
  cfg.noise_vars = {1.0};
  cfg.validate();
  const TheoremConstants k = twet_constants(cfg, ScenarioParams{});
  const int seeds = o.quick ? 5 : kBoundSeeds;

  bool pass = true;
  std::string detail, reference;
  for (double frac : kBoundVFractions) {
    const double V = frac * k.v_max;
    const double c0 = std::clamp(-k.gamma(V), cfg.battery_min, cfg.battery_max);
    const BoundCase b = bound_case(cfg, seeds, frac, c0, true);
    const double bound = k.gap_constant / V + kBoundStderrs * b.se;
    const bool ok = b.gap <= bound;
    pass = pass && ok;
    detail += fmt("%sV=%.3g (C0=%.3g): twet %.4f offline %.4f gap %.4f <= M1/V + 2se = %.4f %s",
                  detail.empty() ? "" : "; ", V, c0, b.twet, b.offline, b.gap, bound, ok ? "ok" : "VIOLATED");
    const BoundCase r = bound_case(cfg, seeds, frac, cfg.battery_min, false);
    reference += fmt("%sV=%.3g gap %.4f", reference.empty() ? "" : ", ", V, r.gap);
  }
  report(7, pass, fmt("I=M=K=1, %d slots, %d seeds, M1=%g, V_max=%.4g: ", kBoundSlots, seeds, k.gap_constant, k.v_max) +
                      detail);
  std::printf("  reference, C0=C_min and free terminal level: %s\n", reference.c_str());
}

// Criterion 8
void subgradients() {
  const CheckResult conv = check_subgradient_convexity(kSubgradientPairs, 1, kConvexitySlack);
  const CheckResult fd = check_subgradient_finite_difference(kSubgradientPairs, 1);
  report(8, conv.passed() && fd.passed(),
         fmt("convexity %d/%d within %.0e (worst %.2e); finite differences %d/%d at differentiable points "
             "(%d kinks skipped, worst %.2f of tolerance)%s%s",
             conv.cases - conv.failures, conv.cases, kConvexitySlack, conv.worst, fd.cases - fd.failures, fd.cases,
             fd.skipped, fd.worst, conv.detail.empty() ? "" : "; ", conv.detail.c_str()));
}

int run_cli(const Options& o, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + o.cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Criterion 9
void determinism(const Options& o, const Sweep& fig2_run) {
  const fs::path work = fs::path(o.work);
  fs::create_directories(work);
  const std::string in_process = format_csv(fig2_run.table);
  bool pass = true;
  std::string detail;

  // The full default sweep through the command line on two workers against the in-process run.
  const fs::path cfg2 = work / "fig2.cfg";
  save_experiment_config(fig2_run.cfg, cfg2.string());
  const fs::path out_a = work / "jobs2";
  fs::remove_all(out_a);
  const int code = run_cli(o, "sweep --config \"" + cfg2.string() + "\" --out \"" + out_a.string() + "\" --jobs 2 --quiet",
                           work / "jobs2.log");
  const std::string cli_csv = slurp(out_a / (fig2_run.cfg.name + ".csv"));
  const bool same = code == 0 && cli_csv == in_process;
  pass = pass && same;
  detail += fmt("%s: in-process jobs=%d %016llx vs cli jobs=2 %016llx (exit %d)", fig2_run.cfg.name.c_str(), o.jobs,
                static_cast<unsigned long long>(content_checksum(in_process)),
                static_cast<unsigned long long>(content_checksum(cli_csv)), code);

  // Repeated command-line sweeps of a shorter configuration at 1, 1 and 3 workers.
  ExperimentConfig shortcfg = fig2_run.cfg;
  shortcfg.name = "repeat";
  shortcfg.num_seeds = 3;
  shortcfg.horizon = 20;
  const fs::path cfgr = work / "repeat.cfg";
  save_experiment_config(shortcfg, cfgr.string());
  std::vector<std::string> sums;
  for (int jobs : {1, 1, 3}) {
    const fs::path out = work / ("repeat_" + std::to_string(sums.size()));
    fs::remove_all(out);
    const int c = run_cli(o, "sweep --config \"" + cfgr.string() + "\" --out \"" + out.string() + "\" --jobs " +
                                 std::to_string(jobs) + " --quiet",
                          work / "repeat.log");
    const std::string text = slurp(out / "repeat.csv");
    pass = pass && c == 0 && !text.empty();
    sums.push_back(fmt("%016llx", static_cast<unsigned long long>(content_checksum(text))));
  }
  pass = pass && sums[0] == sums[1] && sums[1] == sums[2];
  detail += "; repeat jobs=1,1,3: " + sums[0] + " " + sums[1] + " " + sums[2];
  report(9, pass, detail);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  Options o;
  app.add_option("--cli", o.cli, "gridcomp executable")->required();
  app.add_option("--configs", o.configs, "Directory holding fig2.cfg, fig3.cfg and fig4.cfg")->required();
  app.add_option("--work", o.work, "Scratch directory")->required();
  app.add_option("--jobs", o.jobs, "Worker threads for in-process sweeps");
  app.add_flag("--quick", o.quick, "Shrunken sweeps for development");
  CLI11_PARSE(app, argc, argv);

  const auto t0 = Clock::now();
  if (o.quick) std::printf("quick mode: verdicts below are not acceptance verdicts\n");
  try {
    solver_correctness();
    subgradients();
    theorem_bound(o);
    const Sweep s2 = run_sweep(o, "fig2");
    const Sweep s3 = run_sweep(o, "fig3");
    const Sweep s4 = run_sweep(o, "fig4");
    feasibility({&s2, &s3, &s4});
    cost_ordering(s2);
    fig2(s2);
    fig3(s3);
    fig4(s4);
    determinism(o, s2);
  } catch (const std::exception& e) {
    std::printf("aborted: %s\n", e.what());
    return 2;
  }

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  int passed = 0;
  std::printf("\nsummary (%.0f s)\n", seconds_since(t0));
  for (const auto& v : verdicts) {
    std::printf("criterion %d: %s\n", v.id, v.pass ? "PASS" : "FAIL");
    passed += v.pass ? 1 : 0;
  }
  std::printf("%d/%zu criteria passed\n", passed, verdicts.size());
  return passed == static_cast<int>(verdicts.size()) ? 0 : 1;
}
