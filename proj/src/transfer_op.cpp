#include "metamap/transfer_op.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

#include "metamap/errors.hpp"
#include "metamap/rng.hpp"

namespace metamap {

Grid::Grid(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 3) fail(ErrorKind::grid, "grid needs at least 2 cells");
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (!(edges_[i] > edges_[i - 1]))
      fail(ErrorKind::grid, "grid edges must be strictly increasing");
}

Grid Grid::uniform(double lo, double hi, int m) {
  if (m < 2) fail(ErrorKind::grid, "grid needs at least 2 cells");
  std::vector<double> edges(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i)
    edges[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / m;
  edges.front() = lo;
  edges.back() = hi;
  return Grid(std::move(edges));
}

Grid Grid::two_block(double lo, double mid, double hi, int m_lo, int m_hi) {
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(m_lo + m_hi) + 1);
  for (int i = 0; i < m_lo; ++i) edges.push_back(lo + (mid - lo) * i / m_lo);
  for (int i = 0; i <= m_hi; ++i) edges.push_back(mid + (hi - mid) * i / m_hi);
  return Grid(std::move(edges));
}

Grid Grid::from_edges(std::vector<double> edges) { return Grid(std::move(edges)); }

int Grid::locate(double x) const {
  if (x <= lo()) return 0;
  if (x >= hi()) return size() - 1;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  return static_cast<int>(it - edges_.begin()) - 1;
}

double StepDensity::integral() const {
  double s = 0.0;
  for (int i = 0; i < grid.size(); ++i)
    s += v[static_cast<std::size_t>(i)] * grid.width(i);
  return s;
}

double StepDensity::integral_over(Interval iv) const {
  iv = iv.intersect(grid.support());
  if (iv.empty()) return 0.0;
  int i0 = grid.locate(iv.lo);
  int i1 = grid.locate(iv.hi);
  double s = 0.0;
  for (int i = i0; i <= i1; ++i)
    s += v[static_cast<std::size_t>(i)] * overlap_length(grid.cell(i), iv);
  return s;
}

double StepDensity::value_at(double x) const {
  if (x < grid.lo() || x > grid.hi()) return 0.0;
  return v[static_cast<std::size_t>(grid.locate(x))];
}

double StepDensity::total_variation() const {
  double tv = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) tv += std::abs(v[i] - v[i - 1]);
  return tv;
}

double StepDensity::max_value() const {
  return *std::max_element(v.begin(), v.end());
}

double StepDensity::min_value() const {
  return *std::min_element(v.begin(), v.end());
}

void StepDensity::normalize() {
  double s = integral();
  if (!(s > 0.0)) fail(ErrorKind::numerical, "cannot normalize: integral <= 0");
  for (double& x : v) x /= s;
}

double l1_distance_over(const StepDensity& f, const StepDensity& g, Interval range) {
  if (f.grid.size() < 1 || g.grid.size() < 1)
    fail(ErrorKind::grid, "l1_distance: empty grid");
  if (range.empty()) return 0.0;
  // Walk the common refinement of the two edge sets; each density is zero
  // outside its own support.
  const auto& ef = f.grid.edges();
  const auto& eg = g.grid.edges();
  double s = 0.0;
  double x = range.lo;
  const double end = range.hi;
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(ef.begin(), ef.end(), x) - ef.begin());
  std::size_t j = static_cast<std::size_t>(
      std::upper_bound(eg.begin(), eg.end(), x) - eg.begin());
  while (x < end) {
    while (i < ef.size() && ef[i] <= x) ++i;
    while (j < eg.size() && eg[j] <= x) ++j;
    double next = end;
    if (i < ef.size()) next = std::min(next, ef[i]);
    if (j < eg.size()) next = std::min(next, eg[j]);
    double mid = 0.5 * (x + next);
    s += std::abs(f.value_at(mid) - g.value_at(mid)) * (next - x);
    x = next;
  }
  return s;
}

double l1_distance(const StepDensity& f, const StepDensity& g) {
  double lo = std::min(f.grid.lo(), g.grid.lo());
  double hi = std::max(f.grid.hi(), g.grid.hi());
  return l1_distance_over(f, g, {lo, hi});
}

std::vector<double> cell_masses(const StepDensity& f, const Grid& onto) {
  std::vector<double> m(static_cast<std::size_t>(onto.size()));
  for (int i = 0; i < onto.size(); ++i)
    m[static_cast<std::size_t>(i)] = f.integral_over(onto.cell(i));
  return m;
}

double bv_norm(const StepDensity& f) {
  double l1 = 0.0;
  for (int i = 0; i < f.grid.size(); ++i)
    l1 += std::abs(f.v[static_cast<std::size_t>(i)]) * f.grid.width(i);
  return f.total_variation() + l1;
}

double UlamOperator::row_sum(int i) const {
  double s = 0.0;
  for (std::size_t k = row_ptr_[static_cast<std::size_t>(i)];
       k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
    s += val_[k];
  return s;
}

std::vector<double> UlamOperator::apply_masses(const std::vector<double>& pi) const {
  std::vector<double> out(pi.size(), 0.0);
  const int m = size();
  for (int i = 0; i < m; ++i) {
    const double w = pi[static_cast<std::size_t>(i)];
    if (w == 0.0) continue;
    for (std::size_t k = row_ptr_[static_cast<std::size_t>(i)];
         k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      out[static_cast<std::size_t>(col_[k])] += w * val_[k];
  }
  return out;
}

StepDensity UlamOperator::apply(const StepDensity& f) const {
  if (f.grid.size() != size() || f.grid.lo() != grid_.lo() || f.grid.hi() != grid_.hi())
    fail(ErrorKind::grid, "apply: density grid does not match operator grid");
  std::vector<double> pi(f.v.size());
  for (int i = 0; i < size(); ++i)
    pi[static_cast<std::size_t>(i)] = f.v[static_cast<std::size_t>(i)] * grid_.width(i);
  std::vector<double> out = apply_masses(pi);
  StepDensity g(grid_);
  for (int i = 0; i < size(); ++i)
    g.v[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i)] / grid_.width(i);
  return g;
}

std::vector<std::pair<int, double>> UlamOperator::row(int i) const {
  std::vector<std::pair<int, double>> r;
  for (std::size_t k = row_ptr_[static_cast<std::size_t>(i)];
       k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
    r.emplace_back(col_[k], val_[k]);
  return r;
}

void UlamOperator::export_coordinate_list(std::ostream& os) const {
  os << size() << " " << grid_.lo() << " " << grid_.hi() << " " << leak_total_ << "\n";
  for (int i = 0; i < size(); ++i)
    for (std::size_t k = row_ptr_[static_cast<std::size_t>(i)];
         k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      os << i << " " << col_[k] << " " << val_[k] << "\n";
}

/// Accumulates Lebesgue mass |I_i cap T^{-1} I_j| row by row, then divides
/// by cell widths.
class UlamAssembler {
public:
  explicit UlamAssembler(Grid grid)
      : grid_(std::move(grid)), rows_(static_cast<std::size_t>(grid_.size())) {}

  const Grid& grid() const { return grid_; }

  /// Distribute the preimage segment [xl, xr] (which maps into column j)
  /// over the rows it overlaps.
  void add_segment(double xl, double xr, int j, bool into_profile = false) {
    if (!(xr > xl)) return;
    int i0 = grid_.locate(xl);
    int i1 = grid_.locate(xr);
    for (int i = i0; i <= i1; ++i) {
      double w = overlap_length(grid_.cell(i), {xl, xr});
      if (w <= 0.0) continue;
      rows_[static_cast<std::size_t>(i)][j] += w;
      if (into_profile) {
        if (profile_.empty()) profile_.assign(static_cast<std::size_t>(grid_.size()), 0.0);
        profile_[static_cast<std::size_t>(j)] += w;
      }
    }
  }

  /// Process one monotone branch with a caller-supplied preimage function
  /// for grid edges inside the image.
  void add_branch(const Interval& domain, const Interval& image, bool increasing,
                  const std::function<double(double)>& preimage,
                  bool into_profile = false) {
    Interval visible = image.intersect(grid_.support());
    if (visible.empty()) return;
    // y-breakpoints: visible image endpoints plus interior grid edges
    const auto& edges = grid_.edges();
    auto lo_it = std::upper_bound(edges.begin(), edges.end(), visible.lo);
    auto hi_it = std::lower_bound(edges.begin(), edges.end(), visible.hi);
    std::vector<double> ybreaks;
    ybreaks.reserve(static_cast<std::size_t>(hi_it - lo_it) + 2);
    ybreaks.push_back(visible.lo);
    for (auto it = lo_it; it != hi_it; ++it) ybreaks.push_back(*it);
    ybreaks.push_back(visible.hi);

    std::vector<double> xbreaks(ybreaks.size());
    for (std::size_t k = 0; k < ybreaks.size(); ++k) {
      double y = ybreaks[k];
      double x;
      if (y <= image.lo) x = increasing ? domain.lo : domain.hi;
      else if (y >= image.hi) x = increasing ? domain.hi : domain.lo;
      else x = preimage(y);
      xbreaks[k] = std::clamp(x, domain.lo, domain.hi);
    }
    for (std::size_t k = 0; k + 1 < ybreaks.size(); ++k) {
      double ymid = 0.5 * (ybreaks[k] + ybreaks[k + 1]);
      int j = grid_.locate(ymid);
      double xl = std::min(xbreaks[k], xbreaks[k + 1]);
      double xr = std::max(xbreaks[k], xbreaks[k + 1]);
      add_segment(xl, xr, j, into_profile);
    }
  }

  /// Redistribute per-row leak along the recorded profile (the image mass
  /// distribution of the last resolved cylinder pair), restoring row
  /// stochasticity.  Returns the redistributed Lebesgue mass.
  double redistribute_leak() {
    if (profile_.empty()) return 0.0;
    double psum = 0.0;
    for (double p : profile_) psum += p;
    if (psum <= 0.0) return 0.0;
    double moved = 0.0;
    for (int i = 0; i < grid_.size(); ++i) {
      double assigned = 0.0;
      for (auto& [j, w] : rows_[static_cast<std::size_t>(i)]) assigned += w;
      double missing = grid_.width(i) - assigned;
      if (missing <= 1e-15 * grid_.width(i)) continue;
      for (int j = 0; j < grid_.size(); ++j) {
        double p = profile_[static_cast<std::size_t>(j)];
        if (p > 0.0) rows_[static_cast<std::size_t>(i)][j] += missing * p / psum;
      }
      moved += missing;
    }
    return moved;
  }

  UlamOperator finalize(double redistributed) {
    UlamOperator op;
    op.grid_ = grid_;
    op.redistributed_mass_ = redistributed;
    const int m = grid_.size();
    op.row_ptr_.assign(static_cast<std::size_t>(m) + 1, 0);
    std::size_t nnz = 0;
    for (auto& r : rows_) nnz += r.size();
    op.col_.reserve(nnz);
    op.val_.reserve(nnz);
    op.leak_.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      double wi = grid_.width(i);
      double assigned = 0.0;
      for (auto& [j, w] : rows_[static_cast<std::size_t>(i)]) {
        op.col_.push_back(j);
        op.val_.push_back(w / wi);
        assigned += w;
      }
      op.row_ptr_[static_cast<std::size_t>(i) + 1] = op.col_.size();
      double missing = std::max(0.0, wi - assigned);
      op.leak_[static_cast<std::size_t>(i)] = missing / wi;
      op.leak_total_ += missing;
    }
    return op;
  }

private:
  Grid grid_;
  std::vector<std::map<int, double>> rows_;
  std::vector<double> profile_;
};

UlamOperator build_ulam(std::span<const UlamBranch> branches, const Grid& grid) {
  UlamAssembler A(grid);
  for (const auto& br : branches)
    A.add_branch(br.domain, br.image, br.increasing, br.inverse);
  return A.finalize(0.0);
}

UlamOperator build_ulam(const MapModel& map, const Grid& grid) {
  UlamAssembler A(grid);
  for (const Branch& br : map.branches()) {
    Interval dom = br.domain().intersect(grid.support());
    if (dom.empty()) continue;
    Interval img = Interval::ordered(br.eval(dom.lo), br.eval(dom.hi));
    A.add_branch(dom, img, br.increasing(), [&br](double y) { return br.inverse(y); });
  }
  return A.finalize(0.0);
}

UlamOperator build_ulam(const InducedModel& im, const Grid& grid) {
  UlamAssembler A(grid);
  const MapModel& map = im.map();
  const double eps = map.epsilon();
  const Branch& t1 = map.branch(BranchId::T1);
  const Branch& t2 = map.branch(BranchId::T2);
  const Branch& t3 = map.branch(BranchId::T3);
  const int N = im.cylinder_count();
  const Interval support = grid.support();

  const Interval img{0.25, 0.5 + eps};  // image of every left composite
  const Interval visible = img.intersect(support);
  const bool left_side = support.lo < 0.5 && !visible.empty();
  if (left_side) {
    // Shared y-breakpoints for all left branches: visible image endpoints,
    // interior grid edges, and 1/2 (the n = 1 T3 image stops there).  The
    // T1 part of every preimage chain is the same backward orbit of these
    // breakpoints, advanced one level per cylinder; branch n then needs
    // only closed-form T2/T3 inverses of the shared values.
    std::vector<double> ys;
    ys.push_back(visible.lo);
    for (double e : grid.edges())
      if (e > visible.lo && e < visible.hi) ys.push_back(e);
    if (0.5 > visible.lo && 0.5 < visible.hi) ys.push_back(0.5);
    ys.push_back(visible.hi);
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    std::vector<double> u = ys;  // T1^{-(n-1)} of each breakpoint

    // Emit one monotone piece: breakpoints restricted to its image, exact
    // cylinder endpoints where the image endpoints are visible.
    auto emit = [&](const Branch& first, Interval bimg, double x_img_lo,
                    double x_img_hi, bool profile) {
      Interval vis = bimg.intersect(support);
      if (vis.empty()) return;
      bool have_prev = false;
      double prev_y = 0.0, prev_x = 0.0;
      for (std::size_t k = 0; k < ys.size(); ++k) {
        double y = ys[k];
        if (y < vis.lo || y > vis.hi) continue;
        double x;
        if (y <= bimg.lo) x = x_img_lo;
        else if (y >= bimg.hi) x = x_img_hi;
        else x = first.inverse(u[k]);
        if (have_prev)
          A.add_segment(std::min(prev_x, x), std::max(prev_x, x),
                        grid.locate(0.5 * (prev_y + y)), profile);
        have_prev = true;
        prev_y = y;
        prev_x = x;
      }
    };

    for (int n = 1; n <= N; ++n) {
      const bool profile = (n == N);
      emit(t2, img, im.a(n), im.a(n - 1), profile);
      if (n == 1)
        emit(t3, {0.25, 0.5}, im.ap(1), 0.5, profile);
      else
        emit(t3, img, im.ap(n), im.ap(n - 1), profile);
      if (n < N)
        for (double& uu : u) uu = t1.inverse(uu);
    }
  }

  if (support.hi > 0.5) {
    for (BranchId id : {BranchId::T4a, BranchId::T4b, BranchId::T4c}) {
      const Branch& br = map.branch(id);
      A.add_branch(br.domain(), br.image(), br.increasing(),
                   [&br](double y) { return br.inverse(y); });
    }
  }

  // Redistribute only when the left images fit inside the support, so that
  // genuinely escaping mass stays visible as leak.
  double moved = 0.0;
  if (left_side && img.hi <= support.hi + 1e-15) moved = A.redistribute_leak();
  return A.finalize(moved);
}

StepDensity stationary_density(const UlamOperator& op, double tol, long max_iter) {
  const int m = op.size();
  for (int i = 0; i < m; ++i)
    if (op.leak(i) > 1e-9)
      fail(ErrorKind::parameter,
           "stationary_density: operator leak exceeds 1e-9 in row " + std::to_string(i));

  const Grid& grid = op.grid();
  const double support_len = grid.hi() - grid.lo();
  std::vector<double> pi(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    pi[static_cast<std::size_t>(i)] = grid.width(i) / support_len;

  double residual = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    std::vector<double> next = op.apply_masses(pi);
    double total = 0.0;
    for (double x : next) total += x;
    if (!(total > 0.0)) fail(ErrorKind::numerical, "power iteration lost all mass");
    for (double& x : next) x /= total;
    residual = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i)
      residual += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (residual <= tol) {
      StepDensity h(grid);
      for (int i = 0; i < m; ++i)
        h.v[static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)] / grid.width(i);
      h.normalize();
      return h;
    }
  }
  std::ostringstream msg;
  msg << "power iteration did not reach tol " << tol << " (residual " << residual << ")";
  fail(ErrorKind::convergence, msg.str());
}

LasotaYorkeFit lasota_yorke_fit(const UlamOperator& op,
                                std::span<const StepDensity> family) {
  if (family.size() < 3)
    fail(ErrorKind::parameter, "lasota_yorke_fit needs at least 3 densities");
  // Both sides of var(Pf) <= beta var(f) + B ||f||_1 are 1-homogeneous, so
  // fit on BV-normalized members; otherwise the high-variation members
  // (single-cell spikes) swamp the normal equations.
  double svv = 0.0, svl = 0.0, sll = 0.0, svy = 0.0, sly = 0.0;
  std::vector<std::array<double, 3>> rows;
  for (const StepDensity& f : family) {
    double var = f.total_variation();
    double l1 = 0.0;
    for (int i = 0; i < f.grid.size(); ++i)
      l1 += std::abs(f.v[static_cast<std::size_t>(i)]) * f.grid.width(i);
    double scale = var + l1;
    if (!(scale > 0.0)) continue;
    double v = var / scale;
    double l = l1 / scale;
    double y = op.apply(f).total_variation() / scale;
    rows.push_back({v, l, y});
    svv += v * v;
    svl += v * l;
    sll += l * l;
    svy += v * y;
    sly += l * y;
  }
  double det = svv * sll - svl * svl;
  if (std::abs(det) < 1e-30)
    fail(ErrorKind::numerical, "lasota_yorke_fit: degenerate family");
  LasotaYorkeFit fit;
  fit.beta = (svy * sll - sly * svl) / det;
  fit.bound_b = (svv * sly - svl * svy) / det;
  fit.max_violation = -std::numeric_limits<double>::infinity();
  for (auto& r : rows)
    fit.max_violation = std::max(fit.max_violation,
                                 r[2] - fit.beta * r[0] - fit.bound_b * r[1]);
  return fit;
}

std::vector<StepDensity> make_ly_test_family(const Grid& grid, std::uint64_t seed) {
  std::vector<StepDensity> family;
  const int m = grid.size();
  const double lo = grid.lo(), hi = grid.hi();

  StepDensity flat(grid, 1.0 / (hi - lo));
  family.push_back(flat);

  // dyadic indicators
  for (int level : {1, 2, 3}) {
    int parts = 1 << level;
    for (int p = 0; p < parts; ++p) {
      Interval iv{lo + (hi - lo) * p / parts, lo + (hi - lo) * (p + 1) / parts};
      StepDensity f(grid);
      for (int i = 0; i < m; ++i)
        if (iv.contains(grid.cell(i).midpoint()))
          f.v[static_cast<std::size_t>(i)] = 1.0 / iv.length();
      if (f.integral() > 0) family.push_back(std::move(f));
    }
  }

  // seeded rough densities
  CounterRng rng(seed, "ly-family");
  for (int rep = 0; rep < 4; ++rep) {
    StepDensity f(grid);
    for (int i = 0; i < m; ++i)
      f.v[static_cast<std::size_t>(i)] = 0.25 + rng.uniform();
    f.normalize();
    family.push_back(std::move(f));
  }

  // single-cell spikes near the accumulation point and the spike location
  for (double x : {0.375 - 1e-3, 0.8125}) {
    if (x < lo || x > hi) continue;
    int i = grid.locate(x);
    StepDensity f(grid);
    f.v[static_cast<std::size_t>(i)] = 1.0 / grid.width(i);
    family.push_back(std::move(f));
  }
  return family;
}

}  // namespace metamap
