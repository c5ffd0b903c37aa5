#include "metamap/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metamap/errors.hpp"

namespace metamap {

Grid delta_grid(int m) {
  int m_l = m / 3;
  if (m_l < 2) fail(ErrorKind::grid, "delta_grid: m too small");
  return Grid::two_block(0.25, 0.5, 1.0, m_l, m - m_l);
}

KacConstants kac_constant(const InducedModel& im, const StepDensity& hat) {
  const double total = hat.integral();
  if (std::abs(total - 1.0) > 1e-6)
    fail(ErrorKind::parameter, "kac_constant: hat density is not normalized");

  const double alpha = im.map().alpha();
  const int N = im.cylinder_count();
  KacConstants kc;
  kc.n_used = N;
  double sum = 0.0;
  double c_len = 0.0;  // empirical constant in |Z_k| <= C k^{-1/alpha - 1}
  for (int k = 1; k <= N; ++k) {
    double mu = hat.integral_over(im.cylinder_piece(k, PieceSide::left)) +
                hat.integral_over(im.cylinder_piece(k, PieceSide::right));
    sum += k * mu;
    if (k >= 2)
      c_len = std::max(c_len, im.cylinder_length(k) *
                                  std::pow(static_cast<double>(k), 1.0 / alpha + 1.0));
  }
  // tail <= sup(hat) * C * sum_{k>N} k^{-1/alpha} <= sup(hat) * C * a/(1-a) N^{1-1/a}
  double tail_series = alpha / (1.0 - alpha) * std::pow(static_cast<double>(N), 1.0 - 1.0 / alpha);
  kc.tail_bound = hat.max_value() * c_len * tail_series;
  kc.inv_sum = sum;
  kc.c_tau = 1.0 / sum;
  if (kc.tail_bound > 1e-3)
    fail(ErrorKind::truncation,
         "kac_constant: tail bound exceeds 1e-3; increase the cylinder count");
  return kc;
}

std::string PullbackDensity::region_tag(double x) const {
  if (x >= 0.25) return "delta";
  if (x < x_min) return "unresolved";
  if (cells_per_w > 0) {
    int cell = full.grid.locate(x);
    int k = resolved_w - cell / cells_per_w;
    if (k >= 1 && k <= resolved_w) return "W" + std::to_string(k);
  }
  return "W";
}

PullbackDensity pullback(const InducedModel& im, const StepDensity& hat,
                         const KacConstants& kc, PullbackOptions opts) {
  const MapModel& map = im.map();
  const double alpha = map.alpha();
  const double eps = map.epsilon();
  const int K = opts.w_count;
  const int S = opts.cells_per_w;
  if (K < 1 || S < 1) fail(ErrorKind::parameter, "pullback: bad options");

  // Backward recursion depth: the dropped tail reaches level k attenuated
  // by ~(k / k_start)^(1/alpha), so k_start = K * tail_rel^(-alpha) keeps
  // every resolved value within tail_rel.
  const int k_start = static_cast<int>(std::ceil(K * std::pow(opts.tail_rel, -alpha))) + 2;

  // Boundary orbit, extended locally if the model's copy is too short.
  std::vector<double> b(im.orbit().b);
  while (static_cast<int>(b.size()) <= k_start + 1)
    b.push_back(map.t1_inverse(b.back()));

  const Branch& t1 = map.branch(BranchId::T1);
  const Branch& t2 = map.branch(BranchId::T2);
  const Branch& t3 = map.branch(BranchId::T3);
  const double abs_dt2 = 4.0 * (1.0 + 2.0 * eps);
  const double abs_dt3 = 4.0;

  // Level-1 seeds in W_1 = (b_1, b_0); level-k chains are their T1-backward
  // orbits, so T1 maps the level-(k+1) sub-grid exactly onto level k.
  const std::size_t cols = static_cast<std::size_t>(S) + 1;
  std::vector<double> edges(cols), pts(static_cast<std::size_t>(S));
  for (int s = 0; s <= S; ++s)
    edges[static_cast<std::size_t>(s)] = b[1] + (b[0] - b[1]) * s / S;
  for (int s = 0; s < S; ++s)
    pts[static_cast<std::size_t>(s)] =
        0.5 * (edges[static_cast<std::size_t>(s)] + edges[static_cast<std::size_t>(s) + 1]);

  // store levels 1..k_start (edges and sample points)
  std::vector<std::vector<double>> lv_edges(static_cast<std::size_t>(k_start) + 1);
  std::vector<std::vector<double>> lv_pts(static_cast<std::size_t>(k_start) + 1);
  lv_edges[1] = edges;
  lv_pts[1] = pts;
  for (int k = 2; k <= k_start; ++k) {
    auto& pe = lv_edges[static_cast<std::size_t>(k - 1)];
    auto& pp = lv_pts[static_cast<std::size_t>(k - 1)];
    auto& ce = lv_edges[static_cast<std::size_t>(k)];
    auto& cp = lv_pts[static_cast<std::size_t>(k)];
    ce.resize(cols);
    cp.resize(static_cast<std::size_t>(S));
    for (std::size_t s = 0; s < cols; ++s) ce[s] = t1.inverse(pe[s]);
    for (std::size_t s = 0; s < static_cast<std::size_t>(S); ++s) cp[s] = t1.inverse(pp[s]);
  }

  // Downward recursion:
  //   h(x) = c_tau * sum_i hat(T_i^{-1} x)/|DT_i| + h(T1^{-1} x)/DT1(T1^{-1} x)
  // evaluated on the chained sub-grids, seeded with 0 above level k_start.
  std::vector<std::vector<double>> hval(static_cast<std::size_t>(k_start) + 1,
                                        std::vector<double>(static_cast<std::size_t>(S), 0.0));
  for (int k = k_start; k >= 1; --k) {
    auto& cur = hval[static_cast<std::size_t>(k)];
    for (int s = 0; s < S; ++s) {
      double x = lv_pts[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
      double term = kc.c_tau * (hat.value_at(t2.inverse(x)) / abs_dt2 +
                                hat.value_at(t3.inverse(x)) / abs_dt3);
      if (k < k_start) {
        double xp = lv_pts[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(s)];
        term += hval[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(s)] / t1.deriv(xp);
      }
      cur[static_cast<std::size_t>(s)] = term;
    }
  }

  PullbackDensity out;
  out.c_tau = kc.c_tau;
  out.resolved_w = K;
  out.cells_per_w = S;
  out.x_min = b[static_cast<std::size_t>(K)];

  // assemble the full non-uniform step density over [b_K, 1]
  std::vector<double> full_edges;
  std::vector<double> full_vals;
  full_edges.reserve(static_cast<std::size_t>(K * S) + hat.v.size() + 4);
  for (int k = K; k >= 1; --k) {
    full_edges.push_back(b[static_cast<std::size_t>(k)]);  // exact joint
    for (int s = 1; s < S; ++s)
      full_edges.push_back(lv_edges[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]);
    for (int s = 0; s < S; ++s)
      full_vals.push_back(hval[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)]);
  }
  full_edges.push_back(0.25);
  // Delta part: c_tau * hat on the hat's own grid, zero-extended to [1/4, 1]
  const Grid& hg = hat.grid;
  if (hg.lo() > 0.25 + 1e-12) {
    full_edges.push_back(hg.lo());
    full_vals.push_back(0.0);
  }
  for (int i = 0; i < hg.size(); ++i) {
    full_edges.push_back(hg.edge(i + 1));
    full_vals.push_back(kc.c_tau * hat.v[static_cast<std::size_t>(i)]);
  }
  if (hg.hi() < 1.0 - 1e-12) {
    full_edges.push_back(1.0);
    full_vals.push_back(0.0);
  }
  out.full.grid = Grid::from_edges(std::move(full_edges));
  out.full.v = std::move(full_vals);

  // diagnostics: sup_{W_k} h and sup / k, truncated mass below b_K
  out.w_sup.assign(static_cast<std::size_t>(K) + 1, 0.0);
  double sup_ratio = 0.0;
  for (int k = 1; k <= K; ++k) {
    double mx = *std::max_element(hval[static_cast<std::size_t>(k)].begin(),
                                  hval[static_cast<std::size_t>(k)].end());
    out.w_sup[static_cast<std::size_t>(k)] = mx;
    sup_ratio = std::max(sup_ratio, mx / k);
  }
  out.sup_h_over_k = sup_ratio;

  double c_emp = 0.0;  // growth constant measured on the trusted range
  for (int k = std::max(1, K / 2); k <= K; ++k) {
    double mx = *std::max_element(hval[static_cast<std::size_t>(k)].begin(),
                                  hval[static_cast<std::size_t>(k)].end());
    c_emp = std::max(c_emp, mx / k);
  }
  double w_tail = 0.0;  // sum_{k > K} k |W_k| up to k_start, then a power bound
  double c_w = 0.0;
  for (int k = K + 1; k <= k_start; ++k) {
    double wk = b[static_cast<std::size_t>(k - 1)] - b[static_cast<std::size_t>(k)];
    w_tail += k * wk;
    c_w = std::max(c_w, wk * std::pow(static_cast<double>(k), 1.0 / alpha + 1.0));
  }
  w_tail += c_w * alpha / (1.0 - alpha) *
            std::pow(static_cast<double>(k_start), 1.0 - 1.0 / alpha);
  out.unresolved_mass_bound = 2.0 * c_emp * w_tail + opts.tail_rel * out.full.integral();

  out.integral_pre_renorm = out.full.integral();
  out.renorm_magnitude = std::abs(out.integral_pre_renorm - 1.0);
  out.full.normalize();
  return out;
}

SeriesResult pullback_series_at(const InducedModel& im, const StepDensity& hat,
                                double c_tau, double x, SeriesOptions opts) {
  const MapModel& map = im.map();
  if (x >= 0.25) {
    if (x > 1.0) fail(ErrorKind::domain, "pullback_series_at: x outside [0,1]");
    return {c_tau * hat.value_at(x), 0.0, 0};
  }
  if (!(x > 0.0)) fail(ErrorKind::domain, "pullback_series_at: x must be positive");

  std::vector<double> b(im.orbit().b);
  while (b.back() > x) b.push_back(map.t1_inverse(b.back()));

  const Branch& t1 = map.branch(BranchId::T1);
  const Branch& t2 = map.branch(BranchId::T2);
  const Branch& t3 = map.branch(BranchId::T3);
  const double abs_dt2 = std::abs(t2.deriv(0.0));
  const double abs_dt3 = t3.deriv(0.0);

  double y = x;            // T1^{-j}(x)
  double log_chain = 0.0;  // log of the T1 part of |DT^{(n-k)}|
  double partial = 0.0;
  double prev_term = 0.0;
  SeriesResult res;
  for (long j = 0; j < opts.max_terms; ++j) {
    double chain = std::exp(log_chain);
    double term = (hat.value_at(t2.inverse(y)) / abs_dt2 +
                   hat.value_at(t3.inverse(y)) / abs_dt3) /
                  chain;
    partial += term;
    ++res.terms;
    if (j >= 1 && term > 0.0 && prev_term > 0.0 && term < prev_term) {
      double rho = term / prev_term;
      double rem_geom = term * rho / (1.0 - rho);
      // power-law fit of the tail from the last two terms
      double n0 = static_cast<double>(j + 1), n1 = static_cast<double>(j + 2);
      double p = -std::log(term / prev_term) / std::log(n1 / n0);
      double rem_pow = p > 1.0 ? term * n1 / (p - 1.0)
                               : std::numeric_limits<double>::infinity();
      double rem = std::max(rem_geom, std::min(rem_pow, 10.0 * rem_geom));
      if (term < opts.term_rel_cut * partial && rem < opts.remainder_rel * partial) {
        res.remainder_estimate = rem;
        break;
      }
      res.remainder_estimate = rem;
    }
    prev_term = term;
    y = t1.inverse(y);
    log_chain += std::log(t1.deriv(y));
  }
  res.value = c_tau * partial;
  if (res.remainder_estimate > 0.01 * partial)
    fail(ErrorKind::truncation, "pullback series remainder exceeds 1% of the sum");
  res.remainder_estimate *= c_tau;
  return res;
}

ReferenceDensities reference_densities(double alpha, int grid_m, PullbackOptions opts) {
  MapModel map(MapParams{alpha, 0.0});
  Grid dg = delta_grid(grid_m);
  int m_l = 0;
  while (m_l < dg.size() && dg.edge(m_l) < 0.5) ++m_l;
  Grid left = Grid::from_edges(
      std::vector<double>(dg.edges().begin(), dg.edges().begin() + m_l + 1));
  Grid right = Grid::from_edges(
      std::vector<double>(dg.edges().begin() + m_l, dg.edges().end()));

  InducedOptions iopts;
  iopts.cell_width = left.width(0);
  InducedModel im(map, iopts);

  ReferenceDensities out;
  UlamOperator op_l = build_ulam(im, left);
  UlamOperator op_r = build_ulam(im, right);
  out.hat_l = stationary_density(op_l);
  out.hat_r = stationary_density(op_r);
  out.kc_l = kac_constant(im, out.hat_l);
  out.kc_r = kac_constant(im, out.hat_r);
  out.h_l = pullback(im, out.hat_l, out.kc_l, opts);
  out.h_r = pullback(im, out.hat_r, out.kc_r, opts);
  return out;
}

PerturbedDensity perturbed_density(double alpha, double epsilon, int grid_m,
                                   PullbackOptions opts) {
  if (!(epsilon > 0.0))
    fail(ErrorKind::parameter, "perturbed_density requires epsilon > 0");
  MapModel map(MapParams{alpha, epsilon});
  Grid dg = delta_grid(grid_m);
  InducedOptions iopts;
  iopts.cell_width = dg.width(0);
  InducedModel im(map, iopts);

  PerturbedDensity out;
  UlamOperator op = build_ulam(im, dg);
  out.operator_leak = op.leak_total();
  out.redistributed_mass = op.redistributed_mass();
  out.hat = stationary_density(op);
  out.kc = kac_constant(im, out.hat);
  out.h = pullback(im, out.hat, out.kc, opts);
  return out;
}

}  // namespace metamap
