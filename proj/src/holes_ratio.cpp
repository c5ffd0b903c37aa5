#include "metamap/holes_ratio.hpp"

#include <algorithm>
#include <cmath>

#include "metamap/errors.hpp"

namespace metamap {

double HoleSet::total_width() const {
  double w = 0.0;
  for (const auto& p : pieces) w += p.iv.length();
  return w;
}

std::pair<HoleSet, HoleSet> full_holes(const MapModel& map) {
  const double eps = map.epsilon();
  HoleSet hl{HoleSide::left, SystemKind::full, eps, {}, 0.0};
  HoleSet hr{HoleSide::right, SystemKind::full, eps, {}, 0.0};
  if (eps > 0.0) {
    // T(1/4) = 1/2 + eps, so the left hole straddles 1/4
    double u = map.branch(BranchId::T1).inverse(0.5);
    double v = map.branch(BranchId::T2).inverse(0.5);
    hl.pieces.push_back({{u, v}, 0, PieceSide::left});
    // the right hole flanks the spike at s_r
    double p = map.branch(BranchId::T4b).inverse(0.5);
    double q = map.branch(BranchId::T4c).inverse(0.5);
    hr.pieces.push_back({{p, q}, 0, PieceSide::right});
  }
  return {hl, hr};
}

std::pair<HoleSet, HoleSet> induced_holes(const InducedModel& im) {
  const MapModel& map = im.map();
  const double eps = map.epsilon();
  if (!(eps > 0.0))
    fail(ErrorKind::parameter, "induced_holes requires epsilon > 0");
  const Branch& t1 = map.branch(BranchId::T1);
  const Branch& t2 = map.branch(BranchId::T2);
  const Branch& t3 = map.branch(BranchId::T3);
  const int N = im.cylinder_count();

  HoleSet hl{HoleSide::left, SystemKind::induced, eps, {}, 0.0};
  HoleSet hr{HoleSide::right, SystemKind::induced, eps, {}, 0.0};

  // Left hole: per branch, the preimage of (1/2, 1/2+eps].  The branch
  // image touches 1/2+eps at a_{n-1} (T2 side, decreasing) and at a'_{n-1}
  // (T3 side, increasing, n >= 2); r_n = T1^{-(n-1)}(1/2) marks the 1/2
  // level through the shared T1 chain.
  double r = 0.5;
  double last_width = 0.0;
  for (int n = 1; n <= N; ++n) {
    double w2 = t2.inverse(r);
    hl.pieces.push_back({{im.a(n - 1), w2}, n, PieceSide::left});
    last_width = w2 - im.a(n - 1);
    if (n >= 2) {
      double w3 = t3.inverse(r);
      hl.pieces.push_back({{w3, im.ap(n - 1)}, n, PieceSide::right});
      last_width += im.ap(n - 1) - w3;
    }
    r = t1.inverse(r);
  }
  // power tail: widths fall off like n^{-(1+1/alpha)}
  hl.tail_width_bound = last_width * N * map.alpha();

  double p = map.branch(BranchId::T4b).inverse(0.5);
  double q = map.branch(BranchId::T4c).inverse(0.5);
  const double sr = MapModel::spike_location();
  hr.pieces.push_back({{p, sr}, 1, PieceSide::left});
  hr.pieces.push_back({{sr, q}, 1, PieceSide::right});
  return {hl, hr};
}

double hole_measure(const HoleSet& holes, const StepDensity& density) {
  double s = 0.0;
  for (const auto& p : holes.pieces) s += density.integral_over(p.iv);
  return s;
}

double hole_measure(const HoleSet& holes, const PullbackDensity& density) {
  return hole_measure(holes, density.full);
}

LhrClosedForm lhr_closed_form(const StepDensity& hat_l, const StepDensity& hat_r,
                              const InducedModel& im0) {
  const MapModel& map = im0.map();
  if (map.epsilon() != 0.0)
    fail(ErrorKind::parameter, "lhr_closed_form expects the epsilon = 0 model");
  const Branch& t1 = map.branch(BranchId::T1);
  const double sr = MapModel::spike_location();

  LhrClosedForm r;
  r.numerator = hat_r.value_at(sr) *
                (1.0 / std::abs(map.branch(BranchId::T4b).deriv(sr)) +
                 1.0 / map.branch(BranchId::T4c).deriv(sr));

  const int N = im0.cylinder_count();
  double log_chain = std::log(4.0);  // |DT2| = |DT3| = 4 at epsilon = 0
  double term = 0.0;
  for (int k = 1; k <= N; ++k) {
    double inv_chain = std::exp(-log_chain);
    double single = hat_l.value_at(im0.a(k - 1)) * inv_chain;
    r.denominator_single_piece += single;
    term = single;
    r.denominator += single;
    if (k >= 2) {
      double extra = hat_l.value_at(im0.ap(k - 1)) * inv_chain;
      r.denominator += extra;
      term += extra;
    }
    log_chain += std::log(t1.deriv(im0.b(k - 1)));
  }
  double tail = term * N * map.alpha();  // power tail of k^{-(1+1/alpha)}
  r.tail_rel = tail / r.denominator;
  if (r.tail_rel > 0.005)
    fail(ErrorKind::truncation, "lhr_closed_form: denominator tail exceeds 0.5%");
  r.value = r.numerator / r.denominator;
  r.value_single_piece = r.numerator / r.denominator_single_piece;
  return r;
}

LhrSweep lhr_sweep(double alpha, std::span<const double> eps_list,
                   const StepDensity& hat_l, const StepDensity& hat_r) {
  LhrSweep sweep;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) fail(ErrorKind::parameter, "lhr_sweep: epsilon must be > 0");
    MapModel map(MapParams{alpha, eps});
    InducedModel im(map, {});
    auto [hl, hr] = induced_holes(im);
    LhrSweepRow row;
    row.epsilon = eps;
    row.mu_l_hole = hole_measure(hl, hat_l);
    row.mu_r_hole = hole_measure(hr, hat_r);
    row.ratio = row.mu_r_hole / row.mu_l_hole;
    sweep.rows.push_back(row);
  }
  // linear-in-epsilon Richardson on the last three points: hole endpoints
  // are smooth in epsilon, so ratio(eps) ~ r0 + c eps
  std::size_t n = sweep.rows.size();
  std::size_t first = n > 3 ? n - 3 : 0;
  double se = 0.0, se2 = 0.0, sr = 0.0, ser = 0.0, cnt = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    double e = sweep.rows[i].epsilon, rr = sweep.rows[i].ratio;
    se += e; se2 += e * e; sr += rr; ser += e * rr; cnt += 1.0;
  }
  double det = cnt * se2 - se * se;
  if (std::abs(det) > 1e-30)
    sweep.extrapolated = (sr * se2 - se * ser) / det;
  else
    sweep.extrapolated = n ? sweep.rows.back().ratio : 0.0;
  return sweep;
}

MixtureWeights mixture(double lhr, double c_tau_l, double c_tau_r) {
  if (!(lhr > 0.0)) fail(ErrorKind::parameter, "mixture: lhr must be > 0");
  if (!(c_tau_l > 0.0 && c_tau_l <= 1.0 + 1e-12) ||
      !(c_tau_r > 0.0 && c_tau_r <= 1.0 + 1e-12))
    fail(ErrorKind::parameter, "mixture: Kac constants must lie in (0,1]");
  MixtureWeights w;
  w.lhr = lhr;
  w.lambda_hat = lhr / (1.0 + lhr);
  w.lambda_p = w.lambda_hat * c_tau_r /
               (w.lambda_hat * c_tau_r + (1.0 - w.lambda_hat) * c_tau_l);
  return w;
}

MixtureWeights resolve_weights(const LhrClosedForm& closed, const LhrSweep& sweep,
                               double c_tau_l, double c_tau_r) {
  double rel = std::abs(closed.value - sweep.extrapolated) /
               std::max(closed.value, 1e-300);
  if (rel > 0.25) {
    fail(ErrorKind::diagnostic,
         "limiting hole ratio estimators disagree by more than 25%; "
         "refusing to emit lambda_p");
  }
  return mixture(closed.value, c_tau_l, c_tau_r);
}

namespace {

StepDensity combine_on_refinement(double wf, const StepDensity& f, double wg,
                                  const StepDensity& g) {
  std::vector<double> edges;
  edges.reserve(f.grid.edges().size() + g.grid.edges().size());
  edges.insert(edges.end(), f.grid.edges().begin(), f.grid.edges().end());
  edges.insert(edges.end(), g.grid.edges().begin(), g.grid.edges().end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  StepDensity out(Grid::from_edges(std::move(edges)));
  for (int i = 0; i < out.grid.size(); ++i) {
    double mid = out.grid.cell(i).midpoint();
    out.v[static_cast<std::size_t>(i)] = wf * f.value_at(mid) + wg * g.value_at(mid);
  }
  return out;
}

}  // namespace

PullbackDensity h_p_mix(const MixtureWeights& w, const PullbackDensity& h_l,
                        const PullbackDensity& h_r, double c_tau_l, double c_tau_r) {
  PullbackDensity out;
  out.full = combine_on_refinement(w.lambda_p, h_l.full, 1.0 - w.lambda_p, h_r.full);
  out.c_tau = 1.0 / (w.lambda_hat / c_tau_l + (1.0 - w.lambda_hat) / c_tau_r);
  out.resolved_w = h_l.resolved_w;
  out.x_min = h_l.x_min;
  out.unresolved_mass_bound = w.lambda_p * h_l.unresolved_mass_bound +
                              (1.0 - w.lambda_p) * h_r.unresolved_mass_bound;
  out.integral_pre_renorm = out.full.integral();
  out.renorm_magnitude = std::abs(out.integral_pre_renorm - 1.0);
  out.full.normalize();
  out.sup_h_over_k = w.lambda_p * h_l.sup_h_over_k;
  out.w_sup.resize(h_l.w_sup.size());
  for (std::size_t k = 0; k < h_l.w_sup.size(); ++k)
    out.w_sup[k] = w.lambda_p * h_l.w_sup[k];  // h_r carries no W_k mass
  return out;
}

PullbackDensity h_p_pullback(const MixtureWeights& w, const StepDensity& hat_l,
                             const StepDensity& hat_r, const Grid& onto,
                             const InducedModel& im0, PullbackOptions opts) {
  StepDensity hat_p(onto);
  for (int i = 0; i < onto.size(); ++i) {
    double mid = onto.cell(i).midpoint();
    hat_p.v[static_cast<std::size_t>(i)] =
        w.lambda_hat * hat_l.value_at(mid) + (1.0 - w.lambda_hat) * hat_r.value_at(mid);
  }
  KacConstants kc = kac_constant(im0, hat_p);
  return pullback(im0, hat_p, kc, opts);
}

}  // namespace metamap
