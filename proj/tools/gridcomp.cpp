// gridcomp: trace generation, single runs, sweeps and self-verification.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 verification failure.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gridcomp/errors.hpp"
#include "gridcomp/harness/config.hpp"
#include "gridcomp/harness/emit.hpp"
#include "gridcomp/harness/experiment.hpp"
#include "gridcomp/harness/verify.hpp"
#include "gridcomp/kernels.hpp"

namespace fs = std::filesystem;
using namespace gridcomp;
using namespace gridcomp::harness;

namespace {

constexpr int kOk = 0, kUsage = 1, kRuntime = 2, kVerify = 3;

ExperimentConfig load_or_default(const std::string& path) {
  return path.empty() ? ExperimentConfig{} : load_experiment_config(path);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
}

struct Options {
  std::string config, out, algos, trace;
  std::optional<std::uint64_t> seed;
  std::optional<int> intervals;
  int jobs = 1;
  bool timing = false, quiet = false;
};

int cmd_gen_trace(const Options& o) {
  ExperimentConfig cfg = load_or_default(o.config);
  ScenarioParams sp = cfg.scenario;
  if (o.seed) sp.seed = *o.seed;
  const Trace trace = generate_trace(cfg.network, sp, o.intervals.value_or(cfg.horizon));
  std::string path = o.out.empty() ? "trace.json" : o.out;
  if (fs::is_directory(path)) path = (fs::path(path) / ("trace_" + std::to_string(sp.seed) + ".json")).string();
  save_trace_file(trace, path);
  std::printf("wrote %s (%d intervals, checksum %016llx)\n", path.c_str(), trace.num_intervals(),
              static_cast<unsigned long long>(trace_checksum(trace)));
  return kOk;
}

int cmd_run(const Options& o) {
  const ExperimentConfig cfg = load_or_default(o.config);
  const Trace trace = load_trace_file(o.trace);
  const auto algos = o.algos.empty() ? std::vector<Algorithm>{Algorithm::twet} : parse_algorithm_list(o.algos);
  bool failed = false;
  for (Algorithm a : algos) {
    const RunRow row = run_algorithm(a, trace, cfg, cfg.twet);
    if (row.ok) {
      std::printf("%-8s avg_cost %.10g $/slot  violations %d  %.2fs\n", std::string(to_string(a)).c_str(),
                  row.avg_cost, row.battery_violations + row.sinr_violations + row.cap_violations,
                  row.runtime_s);
    } else {
      std::printf("%-8s failed: %s\n", std::string(to_string(a)).c_str(), row.message.c_str());
      failed = true;
    }
  }
  return failed ? kRuntime : kOk;
}

int cmd_sweep(const Options& o) {
  if (o.config.empty()) throw InvalidArgument("sweep needs --config");
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.algos.empty()) cfg.algorithms = parse_algorithm_list(o.algos);
  cfg.validate();
  const std::string dir = o.out.empty() ? "results" : o.out;
  ensure_dir(dir);
  const ResultTable table = run_experiment(cfg, o.jobs, [&](int done, int total) {
    if (!o.quiet) std::fprintf(stderr, "\r%s: %d/%d cells", cfg.name.c_str(), done, total);
  });
  if (!o.quiet) std::fprintf(stderr, "\n");
  const auto agg = aggregate(table);
  const fs::path base = fs::path(dir) / cfg.name;
  write_csv(table, base.string() + ".csv", o.timing);
  write_runs_csv(table, base.string() + "_runs.csv");
  write_aggregate_csv(agg, table.axis, base.string() + "_agg.csv");
  write_svg(agg, table.axis, cfg.name, base.string() + ".svg");
  int failures = 0;
  for (const auto& r : table.rows) failures += r.ok ? 0 : 1;
  for (const auto& a : agg)
    std::printf("%-18s %-8g %-8s %.6f +- %.6f (n=%d)\n", std::string(to_string(table.axis)).c_str(),
                a.axis_value, std::string(to_string(a.algorithm)).c_str(), a.mean, a.stderr_, a.count);
  std::printf("wrote %s.{csv,svg} and sidecars; %zu runs, %d failed\n", base.string().c_str(), table.rows.size(),
              failures);
  return failures == 0 ? kOk : kRuntime;
}

int cmd_verify(const Options& o) {
  VerifyOptions vo;
  if (o.seed) vo.seed = *o.seed;
  std::printf("kernels: %s\n", std::string(kernels::backend_name(kernels::active_backend())).c_str());
  int passed = 0;
  const auto results = run_verify(vo);
  for (const auto& r : results) {
    std::printf("%-30s %s  cases %d  skipped %d  failures %d  worst %.3g%s%s\n", r.name.c_str(),
                r.passed() ? "PASS" : "FAIL", r.cases, r.skipped, r.failures, r.worst,
                r.detail.empty() ? "" : "  first: ", r.failures ? r.detail.c_str() : "");
    passed += r.passed() ? 1 : 0;
  }
  std::printf("%d/%zu checks passed\n", passed, results.size());
  return passed == static_cast<int>(results.size()) ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated multi-point downlink with two-way energy trading: simulator and sweeps"};
  app.require_subcommand(1);
  Options o;
  auto add_seed = [&](CLI::App* c, const char* help) {
    c->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; }, help);
  };

  auto* gen = app.add_subcommand("gen-trace", "Draw a scenario trace and save it as JSON");
  gen->add_option("--config", o.config, "Experiment config supplying network and scenario")->check(CLI::ExistingFile);
  add_seed(gen, "Scenario seed");
  gen->add_option_function<int>("--intervals", [&](int v) { o.intervals = v; }, "Coarse intervals N")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", o.out, "Output file or directory");

  auto* run = app.add_subcommand("run", "Run algorithms on a saved trace");
  run->add_option("--trace", o.trace, "Trace file")->required()->check(CLI::ExistingFile);
  run->add_option("--config", o.config, "Experiment config supplying algorithm parameters")
      ->check(CLI::ExistingFile);
  run->add_option("--algos", o.algos, "Comma-separated list of twet,mtep,heu,offline");

  auto* sweep = app.add_subcommand("sweep", "Run a configured sweep and write CSV, sidecars and SVG");
  sweep->add_option("--config", o.config, "Experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", o.out, "Output directory (default results)");
  add_seed(sweep, "Master seed override");
  sweep->add_option("--algos", o.algos, "Algorithm list override");
  sweep->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--timing", o.timing, "Fill the runtime_s column");
  sweep->add_flag("--quiet", o.quiet, "No progress output");

  auto* verify = app.add_subcommand("verify", "Oracle equivalence, subgradient and invariant checks");
  add_seed(verify, "Corpus seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen_trace(o);
    if (*run) return cmd_run(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
  } catch (const InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
