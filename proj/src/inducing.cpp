#include "metamap/inducing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metamap/errors.hpp"

namespace metamap {

BoundaryOrbit boundary_orbit(const MapModel& map, int n) {
  if (n < 1) fail(ErrorKind::parameter, "boundary_orbit: n must be >= 1");
  BoundaryOrbit orbit;
  orbit.b.reserve(static_cast<std::size_t>(n) + 1);
  orbit.b.push_back(0.25);
  for (int i = 0; i < n; ++i) {
    double next = map.t1_inverse(orbit.b.back());
    if (!(next > 0.0 && next < orbit.b.back()))
      fail(ErrorKind::numerical, "boundary orbit is not strictly decreasing");
    orbit.b.push_back(next);
  }
  return orbit;
}

SublemmaReport sublemma_check(const BoundaryOrbit& orbit, double alpha) {
  SublemmaReport r;
  r.alpha = alpha;
  r.k_max = orbit.max_index();
  r.c_formula = 1.0 / (4.0 * std::pow(1.0 + alpha, 1.0 / alpha));
  r.d_formula = std::pow(r.c_formula, alpha) * std::pow(4.0, alpha) * (1.0 + alpha);
  double c_min = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= r.k_max; ++k) {
    double scaled = orbit.b[static_cast<std::size_t>(k)] * std::pow(static_cast<double>(k), 1.0 / alpha);
    c_min = std::min(c_min, scaled);
    if (scaled < r.c_formula) ++r.violations;
  }
  r.c_empirical = c_min;
  r.d_empirical = std::pow(c_min, alpha) * std::pow(4.0, alpha) * (1.0 + alpha);
  r.margin = r.d_empirical - 1.0;
  return r;
}

InducedModel::InducedModel(MapModel map, InducedOptions opts) : map_(std::move(map)) {
  double b_goal = opts.b_target;
  if (opts.cell_width > 0.0) b_goal = std::min(b_goal, opts.cell_width);
  // Unresolved width is below b_{N-1}/2, so aim b_{N-1} just under twice
  // the Lebesgue leak budget.
  const double residual_goal = 1.8 * opts.leak_target;

  orbit_.b.push_back(0.25);
  auto extend = [&] {
    double next = map_.t1_inverse(orbit_.b.back());
    if (!(next > 0.0 && next < orbit_.b.back()))
      fail(ErrorKind::numerical, "boundary orbit is not strictly decreasing");
    orbit_.b.push_back(next);
  };

  if (opts.cylinders > 0) {
    n_cyl_ = opts.cylinders;
    while (orbit_.max_index() < n_cyl_) extend();
  } else {
    while (true) {
      extend();
      int n = orbit_.max_index();
      if ((orbit_.b.back() < b_goal &&
           orbit_.b[static_cast<std::size_t>(n - 1)] < residual_goal) ||
          n >= opts.max_cylinders) {
        n_cyl_ = n;
        break;
      }
    }
  }
  while (orbit_.max_index() < std::max(opts.orbit_length, n_cyl_ + 1)) extend();

  const Branch& t2 = map_.branch(BranchId::T2);
  const Branch& t3 = map_.branch(BranchId::T3);
  a_.resize(static_cast<std::size_t>(n_cyl_) + 1);
  ap_.resize(static_cast<std::size_t>(n_cyl_) + 1);
  a_[0] = 0.25;
  ap_[0] = 1.0;
  for (int n = 1; n <= n_cyl_; ++n) {
    a_[static_cast<std::size_t>(n)] = t2.inverse(b(n - 1));
    ap_[static_cast<std::size_t>(n)] = t3.inverse(b(n - 1));
  }
}

Interval InducedModel::cylinder_piece(int n, PieceSide side) const {
  if (n < 1 || n > n_cyl_) fail(ErrorKind::parameter, "cylinder index out of range");
  auto u = static_cast<std::size_t>(n);
  if (side == PieceSide::left) return {a_[u - 1], a_[u]};
  return {ap_[u], ap_[u - 1]};
}

double InducedModel::cylinder_length(int n) const {
  return cylinder_piece(n, PieceSide::left).length() +
         cylinder_piece(n, PieceSide::right).length();
}

Interval InducedModel::gap(int k) const {
  if (k == 0) return {0.25, 1.0};
  if (k < 0 || k > orbit_.max_index())
    fail(ErrorKind::parameter, "gap index out of range");
  auto u = static_cast<std::size_t>(k);
  return {orbit_.b[u], orbit_.b[u - 1]};
}

InducedBranch InducedModel::branch(int idx) const {
  if (idx < 0 || idx >= branch_count())
    fail(ErrorKind::parameter, "branch index out of range");
  const double eps = map_.epsilon();
  InducedBranch br;
  if (idx < n_cyl_) {
    int n = idx + 1;
    br.return_time = n;
    br.kind = InducedBranchKind::via_t2;
    br.domain = cylinder_piece(n, PieceSide::left);
    br.image = {0.25, 0.5 + eps};
    br.increasing = false;
  } else if (idx < 2 * n_cyl_) {
    int n = idx - n_cyl_ + 1;
    br.return_time = n;
    br.kind = InducedBranchKind::via_t3;
    br.domain = cylinder_piece(n, PieceSide::right);
    if (n == 1) {
      br.domain.hi = 0.5;        // (1/2, 1) belongs to the right component
      br.image = {0.25, 0.5};
    } else {
      br.image = {0.25, 0.5 + eps};
    }
    br.increasing = true;
  } else {
    int t4 = idx - 2 * n_cyl_;
    BranchId id = t4 == 0 ? BranchId::T4a : (t4 == 1 ? BranchId::T4b : BranchId::T4c);
    const Branch& base = map_.branch(id);
    br.return_time = 1;
    br.kind = t4 == 0 ? InducedBranchKind::t4a
                      : (t4 == 1 ? InducedBranchKind::t4b : InducedBranchKind::t4c);
    br.domain = base.domain();
    br.image = base.image();
    br.increasing = base.increasing();
  }
  return br;
}

double InducedModel::branch_eval(int idx, double x) const {
  InducedBranch br = branch(idx);
  switch (br.kind) {
    case InducedBranchKind::t4a: return map_.branch(BranchId::T4a).eval(x);
    case InducedBranchKind::t4b: return map_.branch(BranchId::T4b).eval(x);
    case InducedBranchKind::t4c: return map_.branch(BranchId::T4c).eval(x);
    default: break;
  }
  const Branch& first = map_.branch(
      br.kind == InducedBranchKind::via_t2 ? BranchId::T2 : BranchId::T3);
  const Branch& t1 = map_.branch(BranchId::T1);
  double y = first.eval(x);
  for (int j = 1; j < br.return_time; ++j) y = t1.eval(y);
  return y;
}

double InducedModel::branch_deriv_log(int idx, double x) const {
  InducedBranch br = branch(idx);
  switch (br.kind) {
    case InducedBranchKind::t4a: return std::log(std::abs(map_.branch(BranchId::T4a).deriv(x)));
    case InducedBranchKind::t4b: return std::log(std::abs(map_.branch(BranchId::T4b).deriv(x)));
    case InducedBranchKind::t4c: return std::log(std::abs(map_.branch(BranchId::T4c).deriv(x)));
    default: break;
  }
  const Branch& first = map_.branch(
      br.kind == InducedBranchKind::via_t2 ? BranchId::T2 : BranchId::T3);
  const Branch& t1 = map_.branch(BranchId::T1);
  // log |DT^(n)| accumulated along the forward orbit; avoids overflow for
  // return times in the thousands.
  double log_abs = std::log(std::abs(first.deriv(x)));
  double y = first.eval(x);
  for (int j = 1; j < br.return_time; ++j) {
    log_abs += std::log(t1.deriv(y));
    y = t1.eval(y);
  }
  return log_abs;
}

double InducedModel::branch_deriv_abs(int idx, double x) const {
  return std::exp(branch_deriv_log(idx, x));
}

double InducedModel::branch_inverse(int idx, double y) const {
  InducedBranch br = branch(idx);
  switch (br.kind) {
    case InducedBranchKind::t4a: return map_.branch(BranchId::T4a).inverse(y);
    case InducedBranchKind::t4b: return map_.branch(BranchId::T4b).inverse(y);
    case InducedBranchKind::t4c: return map_.branch(BranchId::T4c).inverse(y);
    default: break;
  }
  if (y < br.image.lo - 1e-15 || y > br.image.hi + 1e-15)
    fail(ErrorKind::range, "induced branch inverse: y outside image");
  const Branch& t1 = map_.branch(BranchId::T1);
  double u = std::clamp(y, br.image.lo, br.image.hi);
  for (int j = 1; j < br.return_time; ++j) u = t1.inverse(u);
  const Branch& first = map_.branch(
      br.kind == InducedBranchKind::via_t2 ? BranchId::T2 : BranchId::T3);
  return first.inverse(u);
}

int InducedModel::cylinder_index(double x) const {
  if (!(x >= 0.25 && x <= 1.0))
    fail(ErrorKind::domain, "cylinder_index: x outside Delta");
  if (x >= 0.5) return 1;
  if (x <= a_[0]) return 1;  // x == 1/4
  if (x > a_.back() && x <= ap_.back())
    fail(ErrorKind::unresolved_region,
         "x lies in the unresolved neighbourhood of 3/8");
  if (x <= a_.back()) {
    // T2 side: a_ is increasing; boundary a_n belongs to Z_n.
    auto it = std::lower_bound(a_.begin(), a_.end(), x);
    return static_cast<int>(it - a_.begin());
  }
  // T3 side: ap_ is decreasing in n; boundary ap_n belongs to the piece on
  // its left, i.e. Z_{n+1}.
  int lo = 0, hi = n_cyl_;  // find n with ap_{n} <= x < ap_{n-1} -> Z_n; equality goes left
  while (lo + 1 < hi) {
    int mid = (lo + hi) / 2;
    if (x > ap_[static_cast<std::size_t>(mid)]) hi = mid; else lo = mid;
  }
  // now ap_[hi] <= x <= ap_[lo] with hi = lo + 1
  if (x == ap_[static_cast<std::size_t>(hi)]) return hi + 1 <= n_cyl_ ? hi + 1 : hi;
  return hi;
}

std::pair<double, int> InducedModel::induced_eval(double x) const {
  int n = cylinder_index(x);
  int idx;
  if (x >= 0.5) {
    if (x <= 0.625) idx = 2 * n_cyl_;
    else if (x <= 0.8125) idx = 2 * n_cyl_ + 1;
    else idx = 2 * n_cyl_ + 2;
    if (x == 0.8125) idx = 2 * n_cyl_ + 1;  // boundary to the left piece
  } else if (x <= a_[static_cast<std::size_t>(n)]) {
    idx = n - 1;            // T2 side
  } else {
    idx = n_cyl_ + n - 1;   // T3 side
  }
  return {branch_eval(idx, x), n};
}

std::optional<int> return_time_oracle(const MapModel& map, double x, int cap) {
  if (!(x >= 0.25 && x <= 1.0))
    fail(ErrorKind::domain, "return_time_oracle: x outside Delta");
  double y = x;
  for (int n = 1; n <= cap; ++n) {
    y = map.eval(y);
    if (y >= 0.25) return n;
  }
  return std::nullopt;
}

Le3Report le3_derivative_check(const InducedModel& im, int k, int n_max, int samples) {
  if (k < 1) fail(ErrorKind::parameter, "le3_derivative_check: k must be >= 1");
  if (im.orbit().max_index() < k)
    fail(ErrorKind::parameter, "le3_derivative_check: orbit too short");
  const MapModel& map = im.map();
  const Branch& t1 = map.branch(BranchId::T1);
  const Branch& t2 = map.branch(BranchId::T2);
  const Branch& t3 = map.branch(BranchId::T3);

  SublemmaReport sub = sublemma_check(im.orbit(), map.alpha());
  Le3Report r;
  r.k = k;
  r.n_max = n_max;
  r.d_used = sub.d_empirical;
  r.eta_k = sub.d_empirical * (k + 2.0) / (k + 2.0 + sub.d_empirical);
  r.min_slack = std::numeric_limits<double>::infinity();

  Interval wk = im.gap(k);
  for (int s = 0; s < samples; ++s) {
    double x = wk.lo + (s + 0.5) / samples * wk.length();
    double y = x;            // T1^{-(n-k-1)}(x)
    double log_chain = 0.0;  // sum of log DT1 along the orbit back up to x
    double sum2 = 0.0, sum3 = 0.0;
    for (int n = k + 1; n <= n_max; ++n) {
      double log_bound = r.eta_k * std::log(static_cast<double>(n) / (k + 2.0));
      double log_d2 = std::log(std::abs(t2.deriv(t2.inverse(y)))) + log_chain;
      double log_d3 = std::log(t3.deriv(t3.inverse(y))) + log_chain;
      for (double log_d : {log_d2, log_d3}) {
        double slack = std::exp(log_d - log_bound);
        r.min_slack = std::min(r.min_slack, slack);
        if (slack < 1.0) ++r.violations;
      }
      sum2 += std::exp(-log_d2);
      sum3 += std::exp(-log_d3);
      // step back once for the next n
      y = t1.inverse(y);
      log_chain += std::log(t1.deriv(y));
    }
    r.reciprocal_sum = std::max(r.reciprocal_sum, std::max(sum2, sum3));
  }
  r.reciprocal_sum_over_k = r.reciprocal_sum / k;
  return r;
}

}  // namespace metamap
