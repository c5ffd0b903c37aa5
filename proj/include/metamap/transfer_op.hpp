#ifndef METAMAP_TRANSFER_OP_HPP
#define METAMAP_TRANSFER_OP_HPP

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "metamap/inducing.hpp"
#include "metamap/interval.hpp"
#include "metamap/map_core.hpp"

namespace metamap {

/// Ordered cell partition of an interval.  Cells are left-closed; the last
/// cell is closed.  Supports non-uniform edge sets.
class Grid {
public:
  Grid() = default;
  static Grid uniform(double lo, double hi, int m);
  /// Two uniform blocks meeting at `mid` (so `mid` is an exact edge).
  static Grid two_block(double lo, double mid, double hi, int m_lo, int m_hi);
  static Grid from_edges(std::vector<double> edges);

  int size() const { return static_cast<int>(edges_.size()) - 1; }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  double edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  double width(int i) const { return edge(i + 1) - edge(i); }
  Interval cell(int i) const { return {edge(i), edge(i + 1)}; }
  Interval support() const { return {lo(), hi()}; }
  const std::vector<double>& edges() const { return edges_; }

  /// Index of the cell containing x (clamped to the support).
  int locate(double x) const;

private:
  explicit Grid(std::vector<double> edges);
  std::vector<double> edges_;
};

/// Piecewise-constant density over a grid.
struct StepDensity {
  Grid grid;
  std::vector<double> v;

  StepDensity() = default;
  StepDensity(Grid g, double fill = 0.0)
      : grid(std::move(g)), v(static_cast<std::size_t>(grid.size()), fill) {}

  double integral() const;
  double integral_over(Interval iv) const;
  double value_at(double x) const;  // 0 outside the support
  double total_variation() const;
  double max_value() const;
  double min_value() const;
  void normalize();  // to integral 1; Error(numerical) if integral <= 0
};

/// Integral of |f - g| over the union of supports, each density extended
/// by zero, computed on the common refinement of the two edge sets.
double l1_distance(const StepDensity& f, const StepDensity& g);

/// Same restricted to a range.
double l1_distance_over(const StepDensity& f, const StepDensity& g, Interval range);

/// Integral of f over each cell of `onto`.
std::vector<double> cell_masses(const StepDensity& f, const Grid& onto);

/// Total variation plus the L1 norm.
double bv_norm(const StepDensity& f);

/// A monotone branch as consumed by the Ulam assembler.
struct UlamBranch {
  Interval domain;
  Interval image;
  bool increasing = true;
  std::function<double(double)> inverse;  // image -> domain
};

/// Row-stochastic Ulam discretization P[i][j] = |I_i cap T^{-1} I_j| / |I_i|
/// with exact endpoint-inverse-image geometry (no sampling).  Mass of a cell
/// not assigned to any column (unresolved cylinders, image outside the
/// support) is tracked per row in `leak`.
class UlamOperator {
public:
  const Grid& grid() const { return grid_; }
  int size() const { return grid_.size(); }

  double leak(int i) const { return leak_[static_cast<std::size_t>(i)]; }
  /// Unassigned Lebesgue mass left after assembly (absolute units).
  double leak_total() const { return leak_total_; }
  /// Lebesgue mass moved back onto the last resolved cylinder's image.
  double redistributed_mass() const { return redistributed_mass_; }
  double row_sum(int i) const;

  /// One discrete transfer-operator step acting on a density over the same
  /// grid.
  StepDensity apply(const StepDensity& f) const;
  std::vector<double> apply_masses(const std::vector<double>& pi) const;

  void export_coordinate_list(std::ostream& os) const;

  /// Entries of row i as (col, value) pairs, for tests and export.
  std::vector<std::pair<int, double>> row(int i) const;

private:
  friend class UlamAssembler;
  Grid grid_;
  std::vector<std::size_t> row_ptr_;
  std::vector<int> col_;
  std::vector<double> val_;
  std::vector<double> leak_;
  double leak_total_ = 0.0;
  double redistributed_mass_ = 0.0;
};

UlamOperator build_ulam(std::span<const UlamBranch> branches, const Grid& grid);

/// Full map on [0,1] (or a sub-support; mass leaving the support leaks).
UlamOperator build_ulam(const MapModel& map, const Grid& grid);

/// First-return map on the grid support.  Branches whose domain intersects
/// the support contribute; the unresolved residual leaks and its mass is
/// then redistributed along the image profile of the last resolved
/// cylinder, keeping rows stochastic (the magnitude is reported).
UlamOperator build_ulam(const InducedModel& im, const Grid& grid);

/// Left fixed vector by power iteration, normalized to integral 1.
/// Requires post-redistribution leak <= 1e-9; throws Error(convergence)
/// with the residual in the message if max_iter is exhausted.
StepDensity stationary_density(const UlamOperator& op, double tol = 1e-12,
                               long max_iter = 200000);

struct LasotaYorkeFit {
  double beta = 0.0;
  double bound_b = 0.0;
  double max_violation = 0.0;  // max of var(Pf) - beta var(f) - B ||f||_1
};

/// Least-squares fit of var(Pf) <= beta var(f) + B ||f||_1 over a family.
LasotaYorkeFit lasota_yorke_fit(const UlamOperator& op,
                                std::span<const StepDensity> family);

/// Deterministic test family on a grid: constants, dyadic indicators,
/// seeded rough densities and single-cell spikes.
std::vector<StepDensity> make_ly_test_family(const Grid& grid,
                                             std::uint64_t seed);

}  // namespace metamap

#endif
