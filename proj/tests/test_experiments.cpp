#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "metamap/errors.hpp"
#include "metamap/experiments.hpp"

using namespace metamap;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.grid_m = 384;
  cfg.w_count = 96;
  cfg.eps_schedule = {0.1, 0.05};
  cfg.mc_steps = 200000;
  cfg.mc_compare_cells = 64;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  ExperimentConfig bad = cfg;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.eps_schedule = {0.05, 0.1};  // not decreasing
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.eps_schedule = {0.1, -0.05};
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.eps = 0.3;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = cfg;
  bad.grid_m = 2;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("schedule parsing") {
  auto plain = parse_schedule("0.1,0.05,0.025");
  REQUIRE(plain.size() == 3);
  CHECK(plain[1] == 0.05);
  auto bracket = parse_schedule("[0.1, 0.05]");
  REQUIRE(bracket.size() == 2);
  CHECK_THROWS_AS(parse_schedule(""), Error);
  CHECK_THROWS_AS(parse_schedule("0.1,abc"), Error);
}

TEST_CASE("config file round trip") {
  const char* path = "test_experiments_config.tmp";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "alpha = 0.4\n";
    out << "eps_schedule = [0.08, 0.04]\n";
    out << "grid = 512\n";
    out << "seed = 99\n";
    out << "out = \"somewhere\"\n";
  }
  ExperimentConfig cfg = load_config_file(path);
  CHECK(cfg.alpha == 0.4);
  REQUIRE(cfg.eps_schedule.size() == 2);
  CHECK(cfg.eps_schedule[1] == 0.04);
  CHECK(cfg.grid_m == 512);
  CHECK(cfg.seed == 99);
  CHECK(cfg.output_dir == "somewhere");
  std::remove(path);

  CHECK_THROWS_AS(load_config_file("does_not_exist.cfg"), Error);
  ExperimentConfig c2;
  CHECK_THROWS_AS(apply_config_kv(c2, "bogus_key", "1"), Error);
  CHECK_THROWS_AS(apply_config_kv(c2, "alpha", "zebra"), Error);
}

TEST_CASE("fmt_double round trips") {
  for (double x : {0.1, 1.0 / 3, 6.25e-3, 1e-14, 123456.75}) {
    CHECK(std::stod(fmt_double(x)) == x);
  }
}

TEST_CASE("csv table writing") {
  CsvTable t;
  t.comments = {"note"};
  t.columns = {"a", "b"};
  t.rows = {{"1", "2"}, {"3", "4"}};
  std::ostringstream os;
  t.write(os);
  CHECK(os.str() == "# note\na,b\n1,2\n3,4\n");
}

TEST_CASE("graph experiment") {
  GraphResult r0 = run_graph(0.5, 0.0);
  CHECK(r0.classes.count() == 2);
  CHECK(r0.classes_at_32 == 2);
  GraphResult r1 = run_graph(0.5, 0.05);
  CHECK(r1.classes.count() == 1);
  CHECK(r1.classes_at_32 == 1);
}

TEST_CASE("schedule rows are isolated and deterministic") {
  ExperimentConfig cfg = tiny_config();
  cfg.eps_schedule = {0.2, 0.05};  // 0.2 exceeds the map's parameter domain
  auto schedule = run_schedule(cfg);
  REQUIRE(schedule.size() == 2);
  CHECK(!schedule[0].run.has_value());
  CHECK(schedule[0].status.find("parameter") != std::string::npos);
  REQUIRE(schedule[1].run.has_value());
  CHECK(schedule[1].run->epsilon == 0.05);
}

TEST_CASE("convergence sweep on a coarse grid") {
  ExperimentConfig cfg = tiny_config();
  ReferenceContext ref = build_reference(cfg);
  auto schedule = run_schedule(cfg);
  ConvergenceResult res = convergence_from(ref, schedule);
  REQUIRE(res.rows.size() == 2);
  for (const auto& row : res.rows) {
    CHECK(row.status == "ok");
    CHECK(row.l1 > 0.0);
    CHECK(row.l1 < 2.0);
    CHECK(row.tail_bound < 0.05);
    CHECK(row.c_tau_eps > 0.0);
    CHECK(row.c_tau_eps <= 1.0);
  }
  CHECK(res.rows[1].l1 < res.rows[0].l1);
  CHECK(res.h_p_construction_gap < 0.02);

  // ratio sweep from the same schedule
  RatioResult rr = ratio_from(ref, schedule);
  REQUIRE(rr.rows.size() == 2);
  for (const auto& row : rr.rows) {
    CHECK(row.status == "ok");
    CHECK(row.rel_err < 0.25);
    CHECK(std::abs(row.ratio_full - row.ratio_induced) / row.ratio_induced < 0.05);
  }

  // asymptotics from the same reference
  AsymptoticsResult ar = asymptotics_from(ref, schedule);
  CHECK(ar.sublemma.violations == 0);
  CHECK(ar.slope < 0.0);
  REQUIRE(ar.le3.size() == 3);
  for (const auto& le3 : ar.le3) CHECK(le3.violations == 0);
  CHECK(ar.kac_sums.size() == 2);

  // CSV emission is byte-stable across repeated runs
  ReferenceContext ref2 = build_reference(cfg);
  auto schedule2 = run_schedule(cfg);
  std::ostringstream a, b;
  convergence_table(convergence_from(ref, schedule)).write(a);
  convergence_table(convergence_from(ref2, schedule2)).write(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("monte carlo guard and determinism") {
  ExperimentConfig cfg = tiny_config();
  ReferenceContext ref = build_reference(cfg);
  EpsilonRun er = run_epsilon(cfg, 0.05);
  MonteCarloResult mc1 = run_montecarlo(cfg, ref, er);
  MonteCarloResult mc2 = run_montecarlo(cfg, ref, er);
  std::ostringstream a, b;
  montecarlo_table(mc1).write(a);
  montecarlo_table(mc2).write(b);
  CHECK(a.str() == b.str());
  CHECK(mc1.left_fraction > 0.0);
  CHECK(mc1.left_fraction < 1.0);

  EpsilonRun slow = run_epsilon(cfg, 0.01);
  CHECK_THROWS_AS(run_montecarlo(cfg, ref, slow), Error);
}

TEST_CASE("table exports") {
  ExperimentConfig cfg = tiny_config();
  MapModel map(MapParams{cfg.alpha, 0.05});
  CsvTable bt = map_branch_table(map);
  CHECK(bt.rows.size() == 6);
  CHECK(bt.rows[0][0] == "T1");

  InducedOptions opts;
  opts.cylinders = 32;
  InducedModel im(map, opts);
  CsvTable ct = cylinder_table(im);
  CHECK(ct.rows.size() == static_cast<std::size_t>(im.branch_count()));
  CsvTable ot = orbit_table(im, 32);
  CHECK(ot.rows.size() == 33);

  ReferenceContext ref = build_reference(cfg);
  CsvTable dt = density_table(ref.h_p);
  CHECK(dt.rows.size() == static_cast<std::size_t>(ref.h_p.full.grid.size()));
  CHECK(dt.rows.back()[3] == "delta");
  CHECK(dt.rows.front()[3] == "W" + std::to_string(cfg.w_count));

  CsvTable pt = plot_table({{"h_p", &ref.h_p.full}}, 128);
  CHECK(pt.rows.size() == 128);
  std::string summary = density_summary(ref.h_p);
  CHECK(summary.find("c_tau") != std::string::npos);
}
