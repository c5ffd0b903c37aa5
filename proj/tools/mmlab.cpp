// mmlab: batch experiment driver for the metastable interval-map toolkit.
//
// Subcommands: converge, ratio, asymptotics, mc, graph, dump-map,
// dump-cylinders.  A flat key=value config file can provide any option;
// command-line flags override the file.  Exit codes: 0 success, 2 config
// error, 3 numerical/truncation failure (one machine-readable error line
// on stderr).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "metamap/errors.hpp"
#include "metamap/experiments.hpp"

using namespace metamap;

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::parameter:
      return 2;
    default:
      return 3;
  }
}

void error_line(ErrorKind kind, const std::string& msg) {
  std::fprintf(stderr, "error kind=%s msg=\"%s\"\n", error_kind_name(kind),
               msg.c_str());
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << text;
}

void cmd_converge(const ExperimentConfig& cfg) {
  ReferenceContext ref = build_reference(cfg);
  auto schedule = run_schedule(cfg);
  ConvergenceResult res = convergence_from(ref, schedule);
  convergence_table(res).save(out_path(cfg, "converge.csv"));
  density_table(ref.h_p).save(out_path(cfg, "h_p.csv"));
  save_text(out_path(cfg, "h_p.summary.txt"), density_summary(ref.h_p) + "\n");

  std::vector<std::pair<std::string, const StepDensity*>> series;
  series.emplace_back("h_p", &ref.h_p.full);
  series.emplace_back("h_l", &ref.h_l.full);
  series.emplace_back("h_r", &ref.h_r.full);
  for (const auto& entry : schedule)
    if (entry.run)
      series.emplace_back("h_eps_" + fmt_double(entry.epsilon), &entry.run->h.full);
  plot_table(series).save(out_path(cfg, "plot.csv"));

  for (auto it = schedule.rbegin(); it != schedule.rend(); ++it) {
    if (it->run) {
      density_table(it->run->h).save(out_path(cfg, "h_eps_smallest.csv"));
      save_text(out_path(cfg, "h_eps_smallest.summary.txt"),
                density_summary(it->run->h) + "\n");
      break;
    }
  }

  std::printf("lambda_p=%s lambda_hat=%s rows=%zu\n",
              fmt_double(res.weights.lambda_p).c_str(),
              fmt_double(res.weights.lambda_hat).c_str(), res.rows.size());
  for (const auto& row : res.rows)
    std::printf("eps=%s l1=%s status=%s\n", fmt_double(row.epsilon).c_str(),
                fmt_double(row.l1).c_str(), row.status.c_str());
}

void cmd_ratio(const ExperimentConfig& cfg) {
  ReferenceContext ref = build_reference(cfg);
  auto schedule = run_schedule(cfg);
  RatioResult res = ratio_from(ref, schedule);
  ratio_table(res).save(out_path(cfg, "ratio.csv"));
  std::printf("target_odds=%s rows=%zu\n", fmt_double(res.target_odds).c_str(),
              res.rows.size());
  for (const auto& row : res.rows)
    std::printf("eps=%s ratio=%s rel_err=%s status=%s\n",
                fmt_double(row.epsilon).c_str(),
                fmt_double(row.ratio_theorem).c_str(),
                fmt_double(row.rel_err).c_str(), row.status.c_str());
}

void cmd_asymptotics(const ExperimentConfig& cfg) {
  ReferenceContext ref = build_reference(cfg);
  auto schedule = run_schedule(cfg);
  AsymptoticsResult res = asymptotics_from(ref, schedule);
  asymptotics_table(res).save(out_path(cfg, "asymptotics.csv"));
  std::printf("slope=%s target=%s sup_h_over_k=%s sublemma_violations=%ld\n",
              fmt_double(res.slope).c_str(), fmt_double(res.slope_target).c_str(),
              fmt_double(res.sup_ratio_max).c_str(), res.sublemma.violations);
}

void cmd_mc(const ExperimentConfig& cfg) {
  ReferenceContext ref = build_reference(cfg);
  EpsilonRun er = run_epsilon(cfg, cfg.eps);
  MonteCarloResult res = run_montecarlo(cfg, ref, er);
  montecarlo_table(res).save(out_path(cfg, "mc_summary.csv"));
  CsvTable hist;
  hist.columns = {"cell_lo", "cell_hi", "value"};
  for (int i = 0; i < res.histogram.grid.size(); ++i)
    hist.rows.push_back({fmt_double(res.histogram.grid.edge(i)),
                         fmt_double(res.histogram.grid.edge(i + 1)),
                         fmt_double(res.histogram.v[static_cast<std::size_t>(i)])});
  hist.save(out_path(cfg, "mc.csv"));
  std::printf("l1_full=%s l1_induced=%s left_fraction=%s h_p_left_mass=%s\n",
              fmt_double(res.l1_full).c_str(), fmt_double(res.l1_induced).c_str(),
              fmt_double(res.left_fraction).c_str(),
              fmt_double(res.h_p_left_mass).c_str());
}

void cmd_graph(const ExperimentConfig& cfg) {
  GraphResult res = run_graph(cfg.alpha, cfg.eps);
  save_text(out_path(cfg, "graph.dot"), to_dot(res.graph));
  std::string report = class_report_text(res.graph, res.classes);
  report += "classes at k_max/2: " + std::to_string(res.classes_at_32) + "\n";
  save_text(out_path(cfg, "graph_classes.txt"), report);
  std::fputs(report.c_str(), stdout);
}

void cmd_dump_map(const ExperimentConfig& cfg) {
  MapModel map(MapParams{cfg.alpha, cfg.eps});
  map_branch_table(map).save(out_path(cfg, "map_branches.csv"));
  std::printf("wrote map_branches.csv\n");
}

void cmd_dump_cylinders(const ExperimentConfig& cfg) {
  MapModel map(MapParams{cfg.alpha, cfg.eps});
  InducedOptions opts;
  opts.cylinders = cfg.cylinder_n;
  InducedModel im(map, opts);
  cylinder_table(im).save(out_path(cfg, "cylinders.csv"));
  orbit_table(im, im.cylinder_count()).save(out_path(cfg, "boundary_orbit.csv"));
  std::printf("cylinders=%d residual_width=%s\n", im.cylinder_count(),
              fmt_double(im.residual().length()).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg;

  // the config file supplies defaults; flags override it
  try {
    for (int i = 1; i + 1 < argc; ++i)
      if (std::string(argv[i]) == "--config") cfg = load_config_file(argv[i + 1]);
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
    return exit_code_for(e.kind());
  }

  CLI::App app{"metastable interval-map laboratory"};
  app.fallthrough();
  std::string config_path, schedule_text;
  app.add_option("--config", config_path, "flat key=value config file");
  app.add_option("--alpha", cfg.alpha, "tail exponent in (0,1)");
  app.add_option("--eps", cfg.eps, "perturbation size in [0,1/8]");
  app.add_option("--eps-schedule", schedule_text,
                 "comma-separated decreasing list, e.g. 0.1,0.05,0.025");
  app.add_option("--grid", cfg.grid_m, "grid cell count");
  app.add_option("--cylinders", cfg.cylinder_n,
                 "cylinder truncation (0 = from the leak target)");
  app.add_option("--seed", cfg.seed, "seed for all random streams");
  app.add_option("--out", cfg.output_dir, "output directory");
  app.add_option("--mc-steps", cfg.mc_steps, "orbit length for mc");

  app.require_subcommand(1);
  auto* c1 = app.add_subcommand("converge", "density convergence sweep");
  auto* c2 = app.add_subcommand("ratio", "hole-measure ratio sweep");
  auto* c3 = app.add_subcommand("asymptotics", "tail and growth diagnostics");
  auto* c4 = app.add_subcommand("mc", "Monte Carlo oracle at --eps");
  auto* c5 = app.add_subcommand("graph", "accessibility graph at --eps");
  auto* c6 = app.add_subcommand("dump-map", "branch table CSV");
  auto* c7 = app.add_subcommand("dump-cylinders", "cylinder and orbit CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (!schedule_text.empty()) cfg.eps_schedule = parse_schedule(schedule_text);
    cfg.validate();
    if (c1->parsed()) cmd_converge(cfg);
    if (c2->parsed()) cmd_ratio(cfg);
    if (c3->parsed()) cmd_asymptotics(cfg);
    if (c4->parsed()) cmd_mc(cfg);
    if (c5->parsed()) cmd_graph(cfg);
    if (c6->parsed()) cmd_dump_map(cfg);
    if (c7->parsed()) cmd_dump_cylinders(cfg);
  } catch (const Error& e) {
    error_line(e.kind(), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    error_line(ErrorKind::numerical, e.what());
    return 3;
  }
  return 0;
}
