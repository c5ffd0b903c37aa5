#include "metamap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "metamap/errors.hpp"
#include "metamap/rng.hpp"

namespace metamap {

namespace {

std::pair<Grid, Grid> split_delta(const Grid& dg) {
  int m_l = 0;
  while (m_l < dg.size() && dg.edge(m_l) < 0.5) ++m_l;
  Grid left = Grid::from_edges(
      std::vector<double>(dg.edges().begin(), dg.edges().begin() + m_l + 1));
  Grid right = Grid::from_edges(
      std::vector<double>(dg.edges().begin() + m_l, dg.edges().end()));
  return {std::move(left), std::move(right)};
}

std::string describe(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e))
    return std::string(error_kind_name(err->kind())) + ": " + err->what();
  return std::string("error: ") + e.what();
}

std::mutex log_mutex;

void log_line(const std::string& line) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::fputs((line + "\n").c_str(), stderr);
}

}  // namespace

ReferenceContext build_reference(const ExperimentConfig& cfg) {
  cfg.validate();
  MapModel map0(MapParams{cfg.alpha, 0.0});
  Grid dgrid = delta_grid(cfg.grid_m);
  auto [left, right] = split_delta(dgrid);

  InducedOptions iopts;
  iopts.cylinders = cfg.cylinder_n;
  iopts.cell_width = left.width(0);
  InducedModel im0(map0, iopts);

  UlamOperator op_l = build_ulam(im0, left);
  UlamOperator op_r = build_ulam(im0, right);
  StepDensity hat_l = stationary_density(op_l);
  StepDensity hat_r = stationary_density(op_r);
  KacConstants kc_l = kac_constant(im0, hat_l);
  KacConstants kc_r = kac_constant(im0, hat_r);

  PullbackOptions popts;
  popts.w_count = cfg.w_count;
  PullbackDensity h_l = pullback(im0, hat_l, kc_l, popts);
  PullbackDensity h_r = pullback(im0, hat_r, kc_r, popts);

  LhrClosedForm closed = lhr_closed_form(hat_l, hat_r, im0);
  LhrSweep sweep = lhr_sweep(cfg.alpha, cfg.eps_schedule, hat_l, hat_r);
  MixtureWeights weights = resolve_weights(closed, sweep, kc_l.c_tau, kc_r.c_tau);

  StepDensity hat_p(dgrid);
  for (int i = 0; i < dgrid.size(); ++i) {
    double mid = dgrid.cell(i).midpoint();
    hat_p.v[static_cast<std::size_t>(i)] =
        weights.lambda_hat * hat_l.value_at(mid) +
        (1.0 - weights.lambda_hat) * hat_r.value_at(mid);
  }
  KacConstants kc_p = kac_constant(im0, hat_p);
  PullbackDensity h_p = pullback(im0, hat_p, kc_p, popts);
  PullbackDensity h_p_mixed = h_p_mix(weights, h_l, h_r, kc_l.c_tau, kc_r.c_tau);

  return ReferenceContext{std::move(map0),  std::move(im0),    std::move(dgrid),
                          std::move(hat_l), std::move(hat_r),  kc_l,
                          kc_r,             std::move(h_l),    std::move(h_r),
                          closed,           std::move(sweep),  weights,
                          std::move(hat_p), kc_p,              std::move(h_p),
                          std::move(h_p_mixed)};
}

EpsilonRun run_epsilon(const ExperimentConfig& cfg, double epsilon) {
  MapModel map(MapParams{cfg.alpha, epsilon});
  Grid dgrid = delta_grid(cfg.grid_m);
  InducedOptions iopts;
  iopts.cylinders = cfg.cylinder_n;
  iopts.cell_width = dgrid.width(0);
  InducedModel im(map, iopts);

  UlamOperator op = build_ulam(im, dgrid);
  double leak = op.leak_total();
  double redistributed = op.redistributed_mass();
  std::vector<StepDensity> family = make_ly_test_family(dgrid, cfg.seed);
  LasotaYorkeFit ly = lasota_yorke_fit(op, family);
  StepDensity hat = stationary_density(op);
  KacConstants kc = kac_constant(im, hat);
  PullbackOptions popts;
  popts.w_count = cfg.w_count;
  PullbackDensity h = pullback(im, hat, kc, popts);
  return EpsilonRun{epsilon, std::move(im),  std::move(hat), kc,
                    std::move(h), leak, redistributed, ly};
}

std::vector<ScheduleEntry> run_schedule(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.eps_schedule.size();
  std::vector<ScheduleEntry> out(n);
  std::atomic<std::size_t> next{0};
  unsigned workers = std::max(1u, std::min({static_cast<unsigned>(n),
                                            std::thread::hardware_concurrency(), 4u}));
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      double eps = cfg.eps_schedule[i];
      out[i].epsilon = eps;
      auto t0 = std::chrono::steady_clock::now();
      try {
        out[i].run = run_epsilon(cfg, eps);
      } catch (const std::exception& e) {
        out[i].status = describe(e);
      }
      out[i].runtime_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      std::ostringstream os;
      os << "row eps=" << eps << " status=" << (out[i].run ? "ok" : out[i].status)
         << " runtime_ms=" << out[i].runtime_ms;
      log_line(os.str());
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return out;
}

ConvergenceResult convergence_from(const ReferenceContext& ref,
                                   const std::vector<ScheduleEntry>& schedule) {
  ConvergenceResult res;
  res.weights = ref.weights;
  res.lambda_p_target = ref.weights.lambda_p / (1.0 - ref.weights.lambda_p);
  res.h_p_construction_gap = l1_distance(ref.h_p.full, ref.h_p_mixed.full);

  for (const ScheduleEntry& entry : schedule) {
    ConvergenceRow row;
    row.epsilon = entry.epsilon;
    if (!entry.run) {
      row.status = entry.status;
      res.rows.push_back(std::move(row));
      continue;
    }
    const EpsilonRun& er = *entry.run;
    const StepDensity& f = er.h.full;
    const StepDensity& g = ref.h_p.full;

    row.region_delta = l1_distance_over(f, g, {0.25, 1.0});
    const double x_floor = std::max(er.h.x_min, ref.h_p.x_min);
    const int k_max = std::min(er.h.resolved_w, ref.h_p.resolved_w);
    for (int k = 1; k <= k_max; ++k) {
      Interval wk0{ref.im0.b(k), ref.im0.b(k - 1)};  // W_k of the limit map
      if (wk0.lo < x_floor) break;
      double all = l1_distance_over(f, g, wk0);
      Interval overlap{wk0.lo, std::min(wk0.hi, er.im.b(k - 1))};
      double ov = overlap.empty() ? 0.0 : l1_distance_over(f, g, overlap);
      row.region_overlap += ov;
      row.region_sym += all - ov;
    }
    row.tail_bound = er.h.unresolved_mass_bound + ref.h_p.unresolved_mass_bound +
                     f.integral_over({f.grid.lo(), x_floor}) +
                     g.integral_over({g.grid.lo(), x_floor});
    row.l1 = row.region_delta + row.region_sym + row.region_overlap + row.tail_bound;
    row.hat_l1 = l1_distance(er.hat, ref.hat_p);
    row.c_tau_eps = er.kc.c_tau;
    row.c_tau_gap = std::abs(er.kc.c_tau - ref.kc_p.c_tau);
    row.kac_sum = er.kc.inv_sum;
    row.leak_total = er.leak_total;
    row.redistributed = er.redistributed;
    row.renorm = er.h.renorm_magnitude;
    res.rows.push_back(std::move(row));
  }
  return res;
}

RatioResult ratio_from(const ReferenceContext& ref,
                       const std::vector<ScheduleEntry>& schedule) {
  RatioResult res;
  res.weights = ref.weights;
  res.target_odds = ref.weights.lambda_p / (1.0 - ref.weights.lambda_p);

  for (const ScheduleEntry& entry : schedule) {
    RatioRow row;
    row.epsilon = entry.epsilon;
    row.target_odds = res.target_odds;
    if (!entry.run) {
      row.status = entry.status;
      res.rows.push_back(std::move(row));
      continue;
    }
    const EpsilonRun& er = *entry.run;
    try {
      auto [hl_full, hr_full] = full_holes(er.im.map());
      auto [hl_ind, hr_ind] = induced_holes(er.im);

      // Theorem ratio: unperturbed full-system measures of the eps-holes.
      double mu_l = hole_measure(hl_full, ref.h_l);
      double mu_r = hole_measure(hr_full, ref.h_r);
      row.ratio_theorem = mu_r / mu_l;
      row.rel_err = std::abs(row.ratio_theorem - row.target_odds) / row.target_odds;

      // Perturbed-measure identities.
      double mu_eps_l = hole_measure(hl_full, er.h);
      double mu_eps_r = hole_measure(hr_full, er.h);
      double mu_hat_l = hole_measure(hl_ind, er.hat);
      double mu_hat_r = hole_measure(hr_ind, er.hat);
      row.ratio_full = mu_eps_r / mu_eps_l;
      row.ratio_induced = mu_hat_r / mu_hat_l;
      row.ident_err_l = std::abs(mu_eps_l - er.kc.c_tau * mu_hat_l) / mu_eps_l;
      row.ident_err_r = std::abs(mu_eps_r - er.kc.c_tau * mu_hat_r) / mu_eps_r;
      row.c_tau_eps = er.kc.c_tau;
    } catch (const std::exception& e) {
      row.status = describe(e);
    }
    res.rows.push_back(std::move(row));
  }
  return res;
}

AsymptoticsResult asymptotics_from(const ReferenceContext& ref,
                                   const std::vector<ScheduleEntry>& schedule) {
  AsymptoticsResult res;
  const double alpha = ref.map0.alpha();
  res.slope_target = -alpha;

  // log-log slope of h_l over [1e-4, 1e-2]
  {
    const StepDensity& f = ref.h_l.full;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, n = 0.0;
    for (int i = 0; i < f.grid.size(); ++i) {
      double mid = f.grid.cell(i).midpoint();
      double val = f.v[static_cast<std::size_t>(i)];
      if (mid < 1e-4 || mid > 1e-2 || val <= 0.0) continue;
      double lx = std::log(mid), ly = std::log(val);
      sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; n += 1.0;
    }
    if (n < 8) fail(ErrorKind::numerical, "not enough resolved cells in [1e-4,1e-2]");
    res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }

  // growth of h_p across the gaps
  {
    const auto& sup = ref.h_p.w_sup;
    int k_hi = std::min<int>(500, ref.h_p.resolved_w);
    double mx = 0.0, ratio_min = std::numeric_limits<double>::infinity(),
           ratio_max = 0.0;
    for (int k = 1; k <= k_hi; ++k) {
      double r = sup[static_cast<std::size_t>(k)] / k;
      mx = std::max(mx, r);
      if (k >= 10) {
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
      }
    }
    res.sup_ratio_max = mx;
    res.sup_ratio_spread = ratio_max / ratio_min;
  }

  {
    BoundaryOrbit orbit = boundary_orbit(ref.map0, 10000);
    res.sublemma = sublemma_check(orbit, alpha);
  }
  for (int k : {5, 20, 100})
    res.le3.push_back(le3_derivative_check(ref.im0, k, k + 500));

  for (const ScheduleEntry& entry : schedule)
    if (entry.run)
      res.kac_sums.emplace_back(entry.epsilon, entry.run->kc.inv_sum);
  return res;
}

MonteCarloResult run_montecarlo(const ExperimentConfig& cfg,
                                const ReferenceContext& ref,
                                const EpsilonRun& eps_run) {
  if (eps_run.epsilon < 0.02)
    fail(ErrorKind::config,
         "montecarlo requires epsilon >= 0.02: metastable mixing is too slow "
         "below that at this step budget");
  const MapModel& map = eps_run.im.map();
  MonteCarloResult res;
  res.epsilon = eps_run.epsilon;
  res.steps = cfg.mc_steps;
  res.lambda_p = ref.weights.lambda_p;

  const int mc = cfg.mc_compare_cells;
  Grid cg = Grid::uniform(0.0, 1.0, mc);
  Grid cgd = Grid::uniform(0.25, 1.0, mc);
  std::vector<long long> counts(static_cast<std::size_t>(mc), 0);
  std::vector<long long> counts_delta(static_cast<std::size_t>(mc), 0);
  long long in_delta = 0, left = 0;

  CounterRng rng(cfg.seed, "mc-start");
  double x = rng.uniform();
  for (int b = 0; b < 10000; ++b) x = map.eval(x);  // burn-in
  for (long long s = 0; s < cfg.mc_steps; ++s) {
    x = map.eval(x);
    ++counts[static_cast<std::size_t>(std::min(mc - 1, static_cast<int>(x * mc)))];
    if (x < 0.5) ++left;
    if (x >= 0.25) {
      int j = std::min(mc - 1, static_cast<int>((x - 0.25) / 0.75 * mc));
      ++counts_delta[static_cast<std::size_t>(j)];
      ++in_delta;
    }
  }

  std::vector<double> mass_h = cell_masses(eps_run.h.full, cg);
  std::vector<double> mass_hat = cell_masses(eps_run.hat, cgd);
  double l1f = 0.0, l1i = 0.0;
  for (int j = 0; j < mc; ++j) {
    l1f += std::abs(static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                        cfg.mc_steps -
                    mass_h[static_cast<std::size_t>(j)]);
    l1i += std::abs(static_cast<double>(counts_delta[static_cast<std::size_t>(j)]) /
                        in_delta -
                    mass_hat[static_cast<std::size_t>(j)]);
  }
  res.l1_full = l1f;
  res.l1_induced = l1i;
  res.left_fraction = static_cast<double>(left) / cfg.mc_steps;
  res.h_p_left_mass = ref.h_p.full.integral_over({0.0, 0.5});

  res.histogram = StepDensity(cg);
  for (int j = 0; j < mc; ++j)
    res.histogram.v[static_cast<std::size_t>(j)] =
        static_cast<double>(counts[static_cast<std::size_t>(j)]) /
        (cfg.mc_steps * cg.width(j));
  return res;
}

GraphResult run_graph(double alpha, double epsilon, int k_max) {
  MapModel map(MapParams{alpha, epsilon});
  AccessGraph g64 = build_access_graph(map, k_max);
  AccessGraph g32 = build_access_graph(map, std::max(1, k_max / 2));
  GraphResult res{g64, ergodic_component_bound(g64),
                  ergodic_component_bound(g32).count()};
  return res;
}

// ---- CSV -------------------------------------------------------------

std::string fmt_double(double x) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, p);
}

void CsvTable::write(std::ostream& os) const {
  for (const auto& c : comments) os << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
}

void CsvTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  write(out);
}

namespace {
const char* kToleranceNote =
    "tolerances in this file are engineering choices; the source results are "
    "asymptotic limits with no numeric targets";
}

CsvTable convergence_table(const ConvergenceResult& r) {
  CsvTable t;
  t.comments = {kToleranceNote,
                "lambda_p=" + fmt_double(r.weights.lambda_p) +
                    " lambda_hat=" + fmt_double(r.weights.lambda_hat) +
                    " lhr=" + fmt_double(r.weights.lhr),
                "h_p_construction_gap=" + fmt_double(r.h_p_construction_gap)};
  t.columns = {"epsilon",     "status",        "l1_distance_h_eps_h_p",
               "region_delta", "region_sym_diff", "region_overlap",
               "tail_bound",  "hat_l1",        "c_tau_eps",
               "c_tau_gap",   "kac_sum",       "leak_total",
               "redistributed_mass", "renorm_magnitude"};
  for (const auto& row : r.rows)
    t.rows.push_back({fmt_double(row.epsilon), row.status, fmt_double(row.l1),
                      fmt_double(row.region_delta), fmt_double(row.region_sym),
                      fmt_double(row.region_overlap), fmt_double(row.tail_bound),
                      fmt_double(row.hat_l1), fmt_double(row.c_tau_eps),
                      fmt_double(row.c_tau_gap), fmt_double(row.kac_sum),
                      fmt_double(row.leak_total), fmt_double(row.redistributed),
                      fmt_double(row.renorm)});
  return t;
}

CsvTable ratio_table(const RatioResult& r) {
  CsvTable t;
  t.comments = {kToleranceNote,
                "target_odds=" + fmt_double(r.target_odds) +
                    " lambda_p=" + fmt_double(r.weights.lambda_p)};
  t.columns = {"epsilon",    "status",       "ratio_theorem", "target_odds",
               "rel_err",    "ratio_full",   "ratio_induced", "ident_err_l",
               "ident_err_r", "c_tau_eps"};
  for (const auto& row : r.rows)
    t.rows.push_back({fmt_double(row.epsilon), row.status,
                      fmt_double(row.ratio_theorem), fmt_double(row.target_odds),
                      fmt_double(row.rel_err), fmt_double(row.ratio_full),
                      fmt_double(row.ratio_induced), fmt_double(row.ident_err_l),
                      fmt_double(row.ident_err_r), fmt_double(row.c_tau_eps)});
  return t;
}

CsvTable asymptotics_table(const AsymptoticsResult& r) {
  CsvTable t;
  t.comments = {kToleranceNote};
  t.columns = {"section", "key", "value"};
  auto add = [&t](const std::string& s, const std::string& k, double v) {
    t.rows.push_back({s, k, fmt_double(v)});
  };
  add("density", "loglog_slope", r.slope);
  add("density", "slope_target", r.slope_target);
  add("density", "sup_h_over_k_max", r.sup_ratio_max);
  add("density", "sup_h_over_k_spread", r.sup_ratio_spread);
  add("sublemma", "c_formula", r.sublemma.c_formula);
  add("sublemma", "d_formula", r.sublemma.d_formula);
  add("sublemma", "c_empirical", r.sublemma.c_empirical);
  add("sublemma", "d_empirical", r.sublemma.d_empirical);
  add("sublemma", "margin", r.sublemma.margin);
  add("sublemma", "violations", static_cast<double>(r.sublemma.violations));
  for (const auto& le3 : r.le3) {
    std::string key = "k" + std::to_string(le3.k);
    add("le3_" + key, "min_slack", le3.min_slack);
    add("le3_" + key, "violations", static_cast<double>(le3.violations));
    add("le3_" + key, "reciprocal_sum", le3.reciprocal_sum);
    add("le3_" + key, "reciprocal_sum_over_k", le3.reciprocal_sum_over_k);
  }
  for (const auto& [eps, sum] : r.kac_sums)
    add("kac_sum", "eps_" + fmt_double(eps), sum);
  return t;
}

CsvTable montecarlo_table(const MonteCarloResult& r) {
  CsvTable t;
  t.comments = {kToleranceNote};
  t.columns = {"key", "value"};
  t.rows = {{"epsilon", fmt_double(r.epsilon)},
            {"steps", std::to_string(r.steps)},
            {"l1_full_vs_h_eps", fmt_double(r.l1_full)},
            {"l1_induced_vs_hat_eps", fmt_double(r.l1_induced)},
            {"left_fraction", fmt_double(r.left_fraction)},
            {"h_p_left_mass", fmt_double(r.h_p_left_mass)},
            {"lambda_p", fmt_double(r.lambda_p)}};
  return t;
}

CsvTable density_table(const PullbackDensity& d) {
  CsvTable t;
  t.comments = {density_summary(d)};
  t.columns = {"x_lo", "x_hi", "value", "region"};
  const Grid& g = d.full.grid;
  for (int i = 0; i < g.size(); ++i)
    t.rows.push_back({fmt_double(g.edge(i)), fmt_double(g.edge(i + 1)),
                      fmt_double(d.full.v[static_cast<std::size_t>(i)]),
                      d.region_tag(g.cell(i).midpoint())});
  return t;
}

CsvTable map_branch_table(const MapModel& map) {
  CsvTable t;
  t.columns = {"branch_id", "domain_lo", "domain_hi", "image_lo",
               "image_hi",  "slope_min", "slope_max"};
  for (const Branch& br : map.branches()) {
    double s_lo, s_hi;
    if (br.id() == BranchId::T1) {
      s_lo = br.deriv(0.0);
      s_hi = br.deriv(br.domain().hi);
    } else {
      s_lo = s_hi = std::abs(br.deriv(br.domain().midpoint()));
    }
    t.rows.push_back({branch_name(br.id()), fmt_double(br.domain().lo),
                      fmt_double(br.domain().hi), fmt_double(br.image().lo),
                      fmt_double(br.image().hi), fmt_double(s_lo),
                      fmt_double(s_hi)});
  }
  return t;
}

CsvTable cylinder_table(const InducedModel& im) {
  CsvTable t;
  Interval res = im.residual();
  t.comments = {"residual (" + fmt_double(res.lo) + "," + fmt_double(res.hi) +
                ") width " + fmt_double(res.length())};
  t.columns = {"n", "piece_side", "lo", "hi", "image_lo", "image_hi", "length"};
  auto side_name = [](InducedBranchKind k) {
    switch (k) {
      case InducedBranchKind::via_t2: return "left";
      case InducedBranchKind::via_t3: return "right";
      case InducedBranchKind::t4a: return "t4a";
      case InducedBranchKind::t4b: return "t4b";
      case InducedBranchKind::t4c: return "t4c";
    }
    return "?";
  };
  for (int i = 0; i < im.branch_count(); ++i) {
    InducedBranch br = im.branch(i);
    t.rows.push_back({std::to_string(br.return_time), side_name(br.kind),
                      fmt_double(br.domain.lo), fmt_double(br.domain.hi),
                      fmt_double(br.image.lo), fmt_double(br.image.hi),
                      fmt_double(br.domain.length())});
  }
  return t;
}

CsvTable orbit_table(const InducedModel& im, int n_max) {
  CsvTable t;
  t.columns = {"n", "b_n", "b_n_scaled"};  // b_n * n^(1/alpha)
  const double alpha = im.map().alpha();
  int n_hi = std::min(n_max, im.orbit().max_index());
  for (int n = 0; n <= n_hi; ++n) {
    double scaled = n == 0 ? 0.25 : im.b(n) * std::pow(static_cast<double>(n), 1.0 / alpha);
    t.rows.push_back({std::to_string(n), fmt_double(im.b(n)), fmt_double(scaled)});
  }
  return t;
}

CsvTable plot_table(
    const std::vector<std::pair<std::string, const StepDensity*>>& series,
    int max_points) {
  CsvTable t;
  t.columns = {"series", "x", "y"};
  for (const auto& [name, f] : series) {
    int m = std::min(max_points, f->grid.size());
    Grid cg = Grid::uniform(f->grid.lo(), f->grid.hi(), m);
    std::vector<double> mass = cell_masses(*f, cg);
    for (int i = 0; i < m; ++i)
      t.rows.push_back({name, fmt_double(cg.cell(i).midpoint()),
                        fmt_double(mass[static_cast<std::size_t>(i)] / cg.width(i))});
  }
  return t;
}

std::string density_summary(const PullbackDensity& d) {
  std::ostringstream os;
  os << "{ \"c_tau\": " << fmt_double(d.c_tau)
     << ", \"tail_bound\": " << fmt_double(d.unresolved_mass_bound)
     << ", \"integral_pre_renorm\": " << fmt_double(d.integral_pre_renorm)
     << ", \"renorm_magnitude\": " << fmt_double(d.renorm_magnitude)
     << ", \"resolved_w\": " << d.resolved_w
     << ", \"sup_h_over_k\": " << fmt_double(d.sup_h_over_k) << " }";
  return os.str();
}

}  // namespace metamap
