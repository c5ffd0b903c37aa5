#include "metamap/map_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metamap/errors.hpp"

namespace metamap {

namespace {

// x^(1+a) as x * exp(a * ln x), short-circuited at 0 so the neutral fixed
// point never hits a log-domain fault.
double pow1p(double x, double a) {
  if (x <= 0.0) return 0.0;
  return x * std::exp(a * std::log(x));
}

double pow_a(double x, double a) {
  if (x <= 0.0) return 0.0;
  return std::exp(a * std::log(x));
}

}  // namespace

void MapParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorKind::parameter, "alpha must lie in (0,1), got " + std::to_string(alpha));
  if (!(epsilon >= 0.0 && epsilon <= 0.125))
    fail(ErrorKind::parameter, "epsilon must lie in [0,1/8], got " + std::to_string(epsilon));
}

const char* branch_name(BranchId id) {
  switch (id) {
    case BranchId::T1: return "T1";
    case BranchId::T2: return "T2";
    case BranchId::T3: return "T3";
    case BranchId::T4a: return "T4a";
    case BranchId::T4b: return "T4b";
    case BranchId::T4c: return "T4c";
  }
  return "?";
}

Branch::Branch(BranchId id, MapParams params) : id_(id), params_(params) {
  const double eps = params.epsilon;
  switch (id) {
    case BranchId::T1:
      domain_ = {0.0, 0.25};
      increasing_ = true;
      image_ = {0.0, 0.5 + eps};  // T1(1/4) = 1/4 + (1+4e)/4
      break;
    case BranchId::T2:
      domain_ = {0.25, 0.375};
      increasing_ = false;
      slope_ = -4.0 * (1.0 + 2.0 * eps);
      image_ = {0.0, 0.5 + eps};
      break;
    case BranchId::T3:
      domain_ = {0.375, 0.5};
      increasing_ = true;
      slope_ = 4.0;
      image_ = {0.0, 0.5};
      break;
    case BranchId::T4a:
      domain_ = {0.5, 0.625};
      increasing_ = true;
      slope_ = 4.0;
      image_ = {0.5, 1.0};
      break;
    case BranchId::T4b:
      domain_ = {0.625, 0.8125};
      increasing_ = false;
      slope_ = -(8.0 / 3.0) * (1.0 + 2.0 * eps);
      image_ = {0.5 - eps, 1.0};
      break;
    case BranchId::T4c:
      domain_ = {0.8125, 1.0};
      increasing_ = true;
      slope_ = (8.0 / 3.0) * (1.0 + 2.0 * eps);
      image_ = {0.5 - eps, 1.0};
      break;
  }
}

double Branch::eval(double x) const {
  const double a = params_.alpha;
  const double eps = params_.epsilon;
  switch (id_) {
    case BranchId::T1:
      return x + std::exp2(2.0 * a) * (1.0 + 4.0 * eps) * pow1p(x, a);
    case BranchId::T2:
      return slope_ * x + 1.5 + 3.0 * eps;
    case BranchId::T3:
      return slope_ * x - 1.5;
    case BranchId::T4a:
      return slope_ * x - 1.5;
    case BranchId::T4b:
      return 1.0 + slope_ * (x - 0.625);
    case BranchId::T4c:
      return (0.5 - eps) + slope_ * (x - 0.8125);
  }
  return 0.0;
}

double Branch::deriv(double x) const {
  if (id_ == BranchId::T1) {
    const double a = params_.alpha;
    return 1.0 + (1.0 + a) * std::exp2(2.0 * a) * (1.0 + 4.0 * params_.epsilon) * pow_a(x, a);
  }
  return slope_;
}

double Branch::inverse(double y) const {
  const double tol = 1e-15;
  if (y < image_.lo - tol || y > image_.hi + tol)
    fail(ErrorKind::range, std::string(branch_name(id_)) + " inverse: y outside image");
  y = std::clamp(y, image_.lo, image_.hi);

  if (id_ != BranchId::T1) {
    double x0;  // solve eval(x) = y for the linear forms
    switch (id_) {
      case BranchId::T2: x0 = (1.5 + 3.0 * params_.epsilon - y) / (-slope_); break;
      case BranchId::T3: x0 = (y + 1.5) / slope_; break;
      case BranchId::T4a: x0 = (y + 1.5) / slope_; break;
      case BranchId::T4b: x0 = 0.625 + (1.0 - y) / (-slope_); break;
      case BranchId::T4c: x0 = 0.8125 + (y - (0.5 - params_.epsilon)) / slope_; break;
      default: x0 = 0.0;
    }
    return std::clamp(x0, domain_.lo, domain_.hi);
  }

  // T1: safeguarded Newton on f(x) = T1(x) - y with a bisection bracket
  // [0, min(y, 1/4)].  T1 feeds thousand-fold composites, so the residual
  // target is near machine precision.
  if (y <= 0.0) return 0.0;
  double lo = 0.0;
  double hi = std::min(y, 0.25);
  const double c = std::exp2(2.0 * params_.alpha) * (1.0 + 4.0 * params_.epsilon);
  // first-order guess: T1(x) = x + c x^(1+a) has inverse ~ y - c y^(1+a)
  double x = y - c * pow1p(y, params_.alpha);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  const double target = 1e-14;
  for (int it = 0; it < 100; ++it) {
    double f = eval(x) - y;
    if (std::abs(f) <= target) return x;
    if (f > 0.0) hi = x; else lo = x;
    double step = f / deriv(x);
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);  // bisection fallback
    x = xn;
  }
  if (std::abs(eval(x) - y) <= 1e-12) return x;  // flat near 0: accept
  fail(ErrorKind::numerical, "T1 inverse did not converge");
}

MapModel::MapModel(MapParams params) : params_(params) {
  params_.validate();
  for (int i = 0; i < kBranchCount; ++i)
    branches_[i] = Branch(static_cast<BranchId>(i), params_);
}

MapModel build_map(MapParams params) { return MapModel(params); }

int MapModel::branch_index_at(double x) const {
  if (x >= 1.0) return 5;  // left branch at the right endpoint
  const auto pts = partition_points();
  int idx = 0;
  for (int i = 1; i < 6; ++i)
    if (x >= pts[i]) idx = i;  // right branch at interior partition points
  return idx;
}

double MapModel::eval(double x) const {
  if (!(x >= 0.0 && x <= 1.0))
    fail(ErrorKind::domain, "eval: x outside [0,1]");
  return branches_[branch_index_at(x)].eval(x);
}

double MapModel::deriv(double x) const {
  const auto pts = partition_points();
  for (double p : pts)
    if (x == p)
      fail(ErrorKind::ambiguity, "deriv at a partition point needs a side flag");
  if (!(x > 0.0 && x < 1.0)) fail(ErrorKind::domain, "deriv: x outside (0,1)");
  return branches_[branch_index_at(x)].deriv(x);
}

double MapModel::deriv(double x, Side side) const {
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::domain, "deriv: x outside [0,1]");
  if (side == Side::left && x == 0.0) fail(ErrorKind::domain, "no left branch at 0");
  if (side == Side::right && x == 1.0) fail(ErrorKind::domain, "no right branch at 1");
  const auto pts = partition_points();
  int idx = branch_index_at(x);
  if (side == Side::left) {
    for (int i = 1; i <= 6; ++i)
      if (x == pts[i]) { idx = i - 1; break; }
  }
  return branches_[idx].deriv(x);
}

double MapModel::branch_inverse(BranchId id, double y) const {
  return branch(id).inverse(y);
}

double MapModel::t1_inverse(double y) const {
  return branch(BranchId::T1).inverse(y);
}

std::vector<double> MapModel::iterate(double x, int n) const {
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  orbit.push_back(x);
  for (int i = 0; i < n; ++i) {
    x = eval(x);
    orbit.push_back(x);
  }
  return orbit;
}

double adler_constant(const MapModel& map, double t1_cutoff) {
  if (!(t1_cutoff > 0.0 && t1_cutoff < 0.25))
    fail(ErrorKind::parameter, "adler_constant: cutoff must lie in (0,1/4)");
  // |D2 T1| / (DT1)^2 = a(1+a) 4^a (1+4e) x^(a-1) / (1 + (1+a) 4^a (1+4e) x^a)^2,
  // strictly decreasing in x, so the sup over [cutoff, 1/4] sits at the cutoff.
  const double a = map.alpha();
  const double c = std::exp2(2.0 * a) * (1.0 + 4.0 * map.epsilon());
  const double x = t1_cutoff;
  const double num = a * (1.0 + a) * c * std::exp((a - 1.0) * std::log(x));
  const double d1 = 1.0 + (1.0 + a) * c * std::exp(a * std::log(x));
  return num / (d1 * d1);  // all other branches are linear: ratio 0
}

}  // namespace metamap
