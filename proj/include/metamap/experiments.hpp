#ifndef METAMAP_EXPERIMENTS_HPP
#define METAMAP_EXPERIMENTS_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "metamap/config.hpp"
#include "metamap/ergodic_graph.hpp"
#include "metamap/holes_ratio.hpp"
#include "metamap/pullback.hpp"

namespace metamap {

/// Everything built once at epsilon = 0: block densities, pull-backs,
/// the limiting hole ratio (two estimators, cross-validated), the mixture
/// weights and both constructions of h_p.
struct ReferenceContext {
  MapModel map0;
  InducedModel im0;
  Grid dgrid;
  StepDensity hat_l, hat_r;
  KacConstants kc_l, kc_r;
  PullbackDensity h_l, h_r;
  LhrClosedForm lhr_closed;
  LhrSweep lhr_sweep_rows;
  MixtureWeights weights;
  StepDensity hat_p;
  KacConstants kc_p;
  PullbackDensity h_p;        // pull-back of hat_p
  PullbackDensity h_p_mixed;  // lambda_p h_l + (1-lambda_p) h_r
};

ReferenceContext build_reference(const ExperimentConfig& cfg);

/// Per-epsilon pipeline artifacts.
struct EpsilonRun {
  double epsilon = 0.0;
  InducedModel im;
  StepDensity hat;
  KacConstants kc;
  PullbackDensity h;
  double leak_total = 0.0;
  double redistributed = 0.0;
  LasotaYorkeFit ly;
};

EpsilonRun run_epsilon(const ExperimentConfig& cfg, double epsilon);

/// One schedule entry; a failed entry carries its reason and never aborts
/// the others.
struct ScheduleEntry {
  double epsilon = 0.0;
  std::string status = "ok";
  std::optional<EpsilonRun> run;
  double runtime_ms = 0.0;
};

/// All schedule rows, computed as independent jobs (worker threads; the
/// result order is the schedule order regardless of scheduling).
std::vector<ScheduleEntry> run_schedule(const ExperimentConfig& cfg);

struct ConvergenceRow {
  double epsilon = 0.0;
  std::string status = "ok";
  double l1 = 0.0;              // total distance (I)+(II)+(III)+tail
  double region_delta = 0.0;    // (I)   on Delta
  double region_sym = 0.0;      // (II)  on W_k minus the overlaps
  double region_overlap = 0.0;  // (III) on the overlaps
  double tail_bound = 0.0;
  double c_tau_eps = 0.0;
  double c_tau_gap = 0.0;  // |c_tau_eps - c_tau_p|
  double kac_sum = 0.0;    // sum_k k mu_hat(Z_k)
  double hat_l1 = 0.0;     // ||hat_eps - hat_p||_1
  double leak_total = 0.0;
  double redistributed = 0.0;
  double renorm = 0.0;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  MixtureWeights weights;
  double lambda_p_target = 0.0;  // lambda_p / (1 - lambda_p)
  double h_p_construction_gap = 0.0;
};

ConvergenceResult convergence_from(const ReferenceContext& ref,
                                   const std::vector<ScheduleEntry>& schedule);

struct RatioRow {
  double epsilon = 0.0;
  std::string status = "ok";
  double ratio_theorem = 0.0;  // mu_r(H_r)/mu_l(H_l), unperturbed densities
  double target_odds = 0.0;
  double rel_err = 0.0;
  double ratio_full = 0.0;     // perturbed-measure ratios: full system
  double ratio_induced = 0.0;  // and induced system
  double ident_err_l = 0.0;    // mu(H) vs c_tau mu_hat(H_hat), relative
  double ident_err_r = 0.0;
  double c_tau_eps = 0.0;
};

struct RatioResult {
  std::vector<RatioRow> rows;
  MixtureWeights weights;
  double target_odds = 0.0;
};

RatioResult ratio_from(const ReferenceContext& ref,
                       const std::vector<ScheduleEntry>& schedule);

struct AsymptoticsResult {
  double slope = 0.0;         // log-log fit of h_l on [1e-4, 1e-2]
  double slope_target = 0.0;  // -alpha
  double sup_ratio_max = 0.0;     // max over k <= 500 of sup_{W_k} h_p / k
  double sup_ratio_spread = 0.0;  // max/min over k in [10, 500]
  SublemmaReport sublemma;
  std::vector<Le3Report> le3;                       // k in {5, 20, 100}
  std::vector<std::pair<double, double>> kac_sums;  // (eps, sum k mu_hat(Z_k))
};

AsymptoticsResult asymptotics_from(const ReferenceContext& ref,
                                   const std::vector<ScheduleEntry>& schedule);

struct MonteCarloResult {
  double epsilon = 0.0;
  long long steps = 0;
  double l1_full = 0.0;     // histogram vs h_eps on the comparison grid
  double l1_induced = 0.0;  // Delta-restricted histogram vs hat_eps
  double left_fraction = 0.0;
  double h_p_left_mass = 0.0;
  double lambda_p = 0.0;
  StepDensity histogram;  // on the comparison grid
};

/// Requires epsilon >= 0.02 (below that, metastable mixing is too slow for
/// the step budget; reported as a config error, not hidden).
MonteCarloResult run_montecarlo(const ExperimentConfig& cfg,
                                const ReferenceContext& ref,
                                const EpsilonRun& eps_run);

struct GraphResult {
  AccessGraph graph;
  ClassReport classes;
  int classes_at_32 = 0;  // stability check against half the horizon
};

GraphResult run_graph(double alpha, double epsilon, int k_max = 64);

// ---- deterministic CSV emission --------------------------------------

/// Shortest round-trip decimal representation (byte-stable across runs).
std::string fmt_double(double x);

struct CsvTable {
  std::vector<std::string> comments;  // written as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const;
  void save(const std::string& path) const;  // Error(io)
};

CsvTable convergence_table(const ConvergenceResult& r);
CsvTable ratio_table(const RatioResult& r);
CsvTable asymptotics_table(const AsymptoticsResult& r);
CsvTable montecarlo_table(const MonteCarloResult& r);
CsvTable density_table(const PullbackDensity& d);
CsvTable map_branch_table(const MapModel& map);
CsvTable cylinder_table(const InducedModel& im);
CsvTable orbit_table(const InducedModel& im, int n_max);
/// Long-format (series, x, y) rows for external plotting, block-averaged
/// to at most `max_points` per series.
CsvTable plot_table(
    const std::vector<std::pair<std::string, const StepDensity*>>& series,
    int max_points = 2048);

std::string density_summary(const PullbackDensity& d);

}  // namespace metamap

#endif
