#ifndef METAMAP_MAP_CORE_HPP
#define METAMAP_MAP_CORE_HPP

#include <array>
#include <vector>

#include "metamap/interval.hpp"

namespace metamap {

/// Parameters of the interval map family: a neutral-fixed-point exponent
/// alpha in (0,1) and a perturbation size epsilon in [0, 1/8].  epsilon = 0
/// is the unperturbed map whose left and right halves are invariant;
/// epsilon > 0 opens small holes across x = 1/2.
struct MapParams {
  double alpha = 0.5;
  double epsilon = 0.0;

  void validate() const;  // throws Error(parameter)
};

enum class BranchId { T1, T2, T3, T4a, T4b, T4c };
enum class Side { left, right };

constexpr int kBranchCount = 6;

const char* branch_name(BranchId id);

/// One monotone branch of the map.  eval/deriv/inverse are exact closed
/// forms except for the T1 inverse, which is a safeguarded Newton solve.
class Branch {
public:
  Branch() = default;
  Branch(BranchId id, MapParams params);

  BranchId id() const { return id_; }
  const Interval& domain() const { return domain_; }
  const Interval& image() const { return image_; }
  bool increasing() const { return increasing_; }

  double eval(double x) const;
  double deriv(double x) const;          // signed
  double inverse(double y) const;        // throws Error(range) outside image

private:
  BranchId id_ = BranchId::T1;
  MapParams params_;
  Interval domain_;
  Interval image_;
  bool increasing_ = true;
  double slope_ = 0.0;  // linear branches; unused for T1
};

/// The six-branch map on [0,1].  The right component is the canonical
/// three-piece linear family: up on [1/2,5/8] with slope 4, down to the
/// spike bottom 1/2 - epsilon at s_r = 13/16, and back up to 1.  Immutable
/// after construction; all queries are pure.
class MapModel {
public:
  explicit MapModel(MapParams params);

  const MapParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }
  double epsilon() const { return params_.epsilon; }

  static constexpr std::array<double, 7> partition_points() {
    return {0.0, 0.25, 0.375, 0.5, 0.625, 0.8125, 1.0};
  }
  static constexpr double spike_location() { return 0.8125; }  // s_r
  static constexpr double boundary() { return 0.5; }           // b
  static constexpr double induction_left() { return 0.25; }    // a_0 = b_0

  const Branch& branch(BranchId id) const {
    return branches_[static_cast<int>(id)];
  }
  const std::array<Branch, kBranchCount>& branches() const { return branches_; }

  /// Branch active at x under the evaluation convention: right branch at
  /// interior partition points, left branch at x = 1.
  int branch_index_at(double x) const;

  double eval(double x) const;  // throws Error(domain) outside [0,1]

  /// Signed derivative.  At a partition point the side must be given,
  /// otherwise Error(ambiguity).
  double deriv(double x) const;
  double deriv(double x, Side side) const;

  double branch_inverse(BranchId id, double y) const;

  /// Inverse of the neutral branch T1 on [0, 1/4]; valid for
  /// y in [0, 1/2 + epsilon].  Residual |T1(x) - y| <= 1e-14.
  double t1_inverse(double y) const;

  /// Orbit [x, T x, ..., T^n x].
  std::vector<double> iterate(double x, int n) const;

private:
  MapParams params_;
  std::array<Branch, kBranchCount> branches_;
};

MapModel build_map(MapParams params);

/// Sup over branches of the distortion ratio |D2 T| / (DT)^2.  Linear
/// branches contribute 0.  On the neutral branch the ratio is strictly
/// decreasing and blows up like x^(alpha-1) at the fixed point, so the sup
/// is taken over [t1_cutoff, 1/4]; the cutoff must be positive.
double adler_constant(const MapModel& map, double t1_cutoff = 1.0 / 1024);

}  // namespace metamap

#endif
