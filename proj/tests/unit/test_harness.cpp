#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "gridcomp/errors.hpp"
#include "gridcomp/harness/config.hpp"
#include "gridcomp/harness/emit.hpp"
#include "gridcomp/harness/experiment.hpp"

using namespace gridcomp;
using namespace gridcomp::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_sweep() {
  ExperimentConfig cfg;
  cfg.name = "small";
  cfg.horizon = 2;
  cfg.num_seeds = 10;
  cfg.planner.max_iters = 5;
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gridcomp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Tag balance, attribute quoting and a single root element.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  int roots = 0;
  std::size_t pos = 0;
  const std::regex attributes(R"((\s+[A-Za-z_:][-A-Za-z0-9_:.]*\s*=\s*"[^"<]*")*\s*)");
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const std::size_t end = text.find('>', pos);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(pos + 1, end - pos - 1);
    pos = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    if (self_closing) tag.pop_back();
    const std::size_t name_end = tag.find_first_of(" \t\n");
    const std::string name = tag.substr(0, name_end);
    const std::string rest = name_end == std::string::npos ? "" : tag.substr(name_end);
    if (!std::regex_match(rest, attributes)) return false;
    if (stack.empty()) ++roots;
    if (!self_closing) stack.push_back(name);
  }
  return stack.empty() && roots == 1;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("names parse and print") {
  CHECK(parse_algorithm("mtep") == Algorithm::mtep);
  CHECK(to_string(Algorithm::offline) == "offline");
  CHECK(parse_axis("harvest_rate") == SweepAxis::harvest_rate);
  CHECK(parse_algorithm_list("twet,heu") == std::vector<Algorithm>{Algorithm::twet, Algorithm::heu});
  CHECK_THROWS_AS(parse_algorithm("greedy"), InvalidArgument);
  CHECK_THROWS_AS(parse_axis("noise"), InvalidArgument);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.grid.clear();
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ExperimentConfig{};
  cfg.num_seeds = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = ExperimentConfig{};
  cfg.horizon = 1000;  // 5000 slots exceed the offline guard
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.algorithms = {Algorithm::twet};
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config files round trip and reject unknown keys") {
  ExperimentConfig cfg = small_sweep();
  cfg.axis = SweepAxis::sinr_target;
  cfg.grid = {1.0, 5.0};
  cfg.scenario.res_rate = 1.2;
  cfg.twet.v_fraction = 0.5;
  cfg.offline.mode = OfflineMode::single_timescale;
  cfg.offline.energy_neutral = true;
  const ExperimentConfig back = experiment_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.grid == cfg.grid);
  CHECK(back.scenario.res_rate == 1.2);
  CHECK(back.offline.mode == OfflineMode::single_timescale);
  CHECK(back.offline.energy_neutral);

  nlohmann::json j = to_json(cfg);
  j["colour"] = "blue";
  CHECK_THROWS_AS(experiment_config_from_json(j), FormatError);
  nlohmann::json k = to_json(cfg);
  k["network"]["antenas"] = 2;
  CHECK_THROWS_AS(experiment_config_from_json(k), FormatError);
  nlohmann::json partial = {{"name", "p"}, {"grid", {40, 80}}};
  CHECK(experiment_config_from_json(partial).num_seeds == 10);

  const fs::path dir = scratch_dir("config");
  save_experiment_config(cfg, (dir / "c.cfg").string());
  CHECK(to_json(load_experiment_config((dir / "c.cfg").string())) == to_json(cfg));
}

TEST_CASE("axis values reach the cell setup") {
  ExperimentConfig cfg;
  CHECK(apply_axis(cfg, 80.0, 0).network.battery_max == 80.0);
  cfg.axis = SweepAxis::sinr_target;
  cfg.grid = {1.0, 9.0};
  const CellSetup s = apply_axis(cfg, 3.0, 0);
  CHECK(s.network.sinr_targets[0] == doctest::Approx(db_to_linear(3.0)));
  CHECK(s.scenario.channel_screen_db == 9.0);
  cfg.axis = SweepAxis::harvest_rate;
  CHECK(apply_axis(cfg, 2.0, 1).scenario.res_rate == 2.0);
  CHECK(apply_axis(cfg, 2.0, 1).scenario.seed == cell_seed(cfg.master_seed, 1));
  cfg.axis = SweepAxis::V;
  CHECK(apply_axis(cfg, 0.5, 0).twet.v_fraction == 0.5);
  CHECK(cell_seed(1, 0) != cell_seed(1, 1));
  CHECK(cell_seed(1, 0) != cell_seed(2, 0));
}

TEST_CASE("sweep shape, shared traces and determinism across worker counts") {
  const ExperimentConfig cfg = small_sweep();
  int calls = 0;
  const ResultTable a = run_experiment(cfg, 1, [&](int, int total) {
    ++calls;
    CHECK(total == 50);
  });
  CHECK(calls == 50);
  REQUIRE(a.rows.size() == 200);
  const auto agg = aggregate(a);
  CHECK(agg.size() == 20);
  for (const auto& r : a.rows) {
    CHECK_MESSAGE(r.ok, r.message);
    CHECK(r.battery_violations + r.sinr_violations + r.cap_violations == 0);
  }
  // Every algorithm and every battery size at one seed index sees the same randomness.
  for (const auto& r : a.rows)
    CHECK(r.trace_checksum == a.rows[static_cast<std::size_t>(r.seed) * 4].trace_checksum);
  for (const auto& g : agg) CHECK(g.count == 10);

  const ResultTable b = run_experiment(cfg, 3);
  CHECK(format_csv(a) == format_csv(b));
}

TEST_CASE("aggregates are means and standard errors over seeds") {
  ResultTable t;
  for (int s = 0; s < 3; ++s) {
    RunRow r;
    r.axis_value = 1.0;
    r.seed = s;
    r.algorithm = Algorithm::twet;
    r.avg_cost = 1.0 + s;
    r.ok = true;
    t.rows.push_back(r);
  }
  RunRow failed;
  failed.axis_value = 1.0;
  failed.seed = 3;
  failed.algorithm = Algorithm::twet;
  failed.avg_cost = std::nan("");
  t.rows.push_back(failed);
  const auto agg = aggregate(t);
  REQUIRE(agg.size() == 1);
  CHECK(agg[0].count == 3);
  CHECK(agg[0].mean == doctest::Approx(2.0));
  CHECK(agg[0].stderr_ == doctest::Approx(1.0 / std::sqrt(3.0)));
}

TEST_CASE("csv emission") {
  ResultTable t;
  t.axis = SweepAxis::harvest_rate;
  for (int s = 0; s < 2; ++s)
    for (Algorithm a : {Algorithm::heu, Algorithm::twet}) {
      RunRow r;
      r.axis_value = 0.4;
      r.seed = s;
      r.algorithm = a;
      r.avg_cost = 1.0 / 3.0 + s;
      r.runtime_s = 0.25;
      r.ok = true;
      t.rows.push_back(r);
    }
  t.rows[1].avg_cost = std::nan("");
  t.rows[1].ok = false;
  t.sort();

  const std::string text = format_csv(t);
  CHECK(text.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("harvest_rate,0.40000000000000002,0,heu,0.33333333333333331,\n") != std::string::npos);
  CHECK(text.find("nan") != std::string::npos);

  const ResultTable back = parse_csv(format_csv(t, true));
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.axis == t.axis);
  CHECK(format_csv(back, true) == format_csv(t, true));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i].algorithm == t.rows[i].algorithm);
    CHECK(back.rows[i].runtime_s == 0.25);
  }
  CHECK_THROWS_AS(parse_csv("axis,value\n"), FormatError);

  const fs::path dir = scratch_dir("csv");
  write_csv(t, (dir / "t.csv").string());
  CHECK(slurp(dir / "t.csv") == text);
  CHECK(format_csv(read_csv((dir / "t.csv").string())) == text);

  const fs::path empty = dir / "empty.csv";
  CHECK_THROWS_AS(write_csv(ResultTable{}, empty.string()), InvalidArgument);
  CHECK_FALSE(fs::exists(empty));
  CHECK_THROWS_WITH_AS(write_csv(t, (dir / "missing" / "t.csv").string()), doctest::Contains("missing"), Error);
}

TEST_CASE("svg plots are well-formed xml") {
  std::vector<AggregateRow> agg;
  for (Algorithm a : {Algorithm::twet, Algorithm::mtep, Algorithm::heu, Algorithm::offline})
    for (double x : {40.0, 80.0, 120.0}) agg.push_back({x, a, 3, 10.0 - x / 40.0 + static_cast<int>(a), 0.2});
  const std::string svg = format_svg(agg, SweepAxis::battery_capacity, "cost & <battery>");
  CHECK(well_formed_xml(svg));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("&amp;") != std::string::npos);
  CHECK(svg.find("<battery>") == std::string::npos);
  CHECK_FALSE(well_formed_xml("<svg><g></svg>"));

  const fs::path dir = scratch_dir("svg");
  write_svg(agg, SweepAxis::battery_capacity, "t", (dir / "t.svg").string());
  CHECK(well_formed_xml(slurp(dir / "t.svg")));
  CHECK(content_checksum("abc") == content_checksum("abc"));
  CHECK(content_checksum("abc") != content_checksum("abd"));
}

}
