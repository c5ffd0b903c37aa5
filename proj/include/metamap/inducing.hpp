#ifndef METAMAP_INDUCING_HPP
#define METAMAP_INDUCING_HPP

#include <optional>
#include <utility>
#include <vector>

#include "metamap/map_core.hpp"

namespace metamap {

/// Backward orbit of 1/4 under the neutral branch: b_0 = 1/4,
/// b_{n+1} = T1^{-1}(b_n).  Strictly decreasing towards the fixed point.
struct BoundaryOrbit {
  std::vector<double> b;
  int max_index() const { return static_cast<int>(b.size()) - 1; }
};

BoundaryOrbit boundary_orbit(const MapModel& map, int n);

/// Diagnostic for the lower bound b_k >= c k^(-1/alpha) with
/// c = 1/(4 (1+alpha)^(1/alpha)); at that base value the expansion
/// constant d = c^alpha 4^alpha (1+alpha) equals exactly 1, and the
/// empirical margin comes from the actual infimum of b_k k^(1/alpha).
struct SublemmaReport {
  double alpha = 0.0;
  double c_formula = 0.0;
  double d_formula = 0.0;    // == 1 up to rounding
  double c_empirical = 0.0;  // min over k of b_k k^(1/alpha)
  double d_empirical = 0.0;  // > 1 when the bound holds with slack
  double margin = 0.0;       // d_empirical - 1
  long violations = 0;       // #{ k : b_k < c_formula k^(-1/alpha) }
  int k_max = 0;
};

SublemmaReport sublemma_check(const BoundaryOrbit& orbit, double alpha);

enum class InducedBranchKind { via_t2, via_t3, t4a, t4b, t4c };
enum class PieceSide { left, right };  // T2 side / T3 side of a cylinder

struct InducedBranch {
  int return_time = 1;
  InducedBranchKind kind = InducedBranchKind::t4a;
  Interval domain;
  Interval image;
  bool increasing = true;
};

struct InducedOptions {
  int cylinders = 0;          // 0: choose from b_target / leak_target
  int orbit_length = 0;       // 0: cylinders + 1 (callers may ask for more)
  double b_target = 1e-6;     // want b_N below this
  double cell_width = 0.0;    // also want b_N below the grid cell width
  double leak_target = 1e-8;  // unresolved width <= leak_target * |Delta|
  int max_cylinders = 300000;
};

/// First-return system of the map on Delta = [1/4, 1].  Cylinder Z_n
/// (return time exactly n) has a T2-side piece (a_{n-1}, a_n) and a
/// T3-side piece (a'_n, a'_{n-1}), with a_n = T2^{-1}(b_{n-1}) and
/// a'_n = T3^{-1}(b_{n-1}); Z_1's right piece extends over (1/2, 1),
/// where the first-return map is the right component itself.  Pieces
/// accumulate at 3/8 from both sides; the unresolved neighbourhood
/// (a_N, a'_N) is tracked, never silently dropped.
///
/// Immutable after construction; queries are pure and thread-safe.
class InducedModel {
public:
  InducedModel(MapModel map, InducedOptions opts = {});

  const MapModel& map() const { return map_; }
  const BoundaryOrbit& orbit() const { return orbit_; }
  double b(int n) const { return orbit_.b[static_cast<std::size_t>(n)]; }

  int cylinder_count() const { return n_cyl_; }
  static Interval domain() { return {0.25, 1.0}; }
  Interval residual() const { return {a_.back(), ap_.back()}; }

  double a(int n) const { return a_[static_cast<std::size_t>(n)]; }
  double ap(int n) const { return ap_[static_cast<std::size_t>(n)]; }

  /// Z_n as stored intervals; for n = 1 the right piece is (a'_1, 1).
  Interval cylinder_piece(int n, PieceSide side) const;
  double cylinder_length(int n) const;
  Interval gap(int k) const;  // W_k = (b_k, b_{k-1}); W_0 = (1/4, 1)

  // Branch composites T1^(n-1) o T_i plus the three right-side pieces.
  int branch_count() const { return 2 * n_cyl_ + 3; }
  InducedBranch branch(int idx) const;
  double branch_eval(int idx, double x) const;
  double branch_deriv_abs(int idx, double x) const;
  double branch_deriv_log(int idx, double x) const;
  double branch_inverse(int idx, double y) const;

  /// Return time by position.  Boundary points go to the cylinder on
  /// their left; the unresolved region throws Error(unresolved_region).
  int cylinder_index(double x) const;

  /// One step of the first-return map: (T^tau(x), tau).
  std::pair<double, int> induced_eval(double x) const;

private:
  MapModel map_;
  BoundaryOrbit orbit_;
  int n_cyl_ = 0;
  std::vector<double> a_;   // a_[0] = 1/4
  std::vector<double> ap_;  // ap_[0] = 1 (Z_1 bookkeeping)
};

/// Smallest n >= 1 with T^n(x) back in Delta, by direct iteration of the
/// full map; nullopt if it exceeds `cap`.  Independent of the cylinder
/// construction, so it can arbitrate it.
std::optional<int> return_time_oracle(const MapModel& map, double x, int cap);

/// Verifies |DT^(n-k)| >= (n/(k+2))^eta_k on sampled points of W_k for
/// n <= n_max, and accumulates the reciprocal sums that control the
/// pulled-back density.
struct Le3Report {
  int k = 0;
  int n_max = 0;
  double d_used = 0.0;
  double eta_k = 0.0;
  double min_slack = 0.0;  // min of chain / bound; >= 1 when the bound holds
  long violations = 0;
  double reciprocal_sum = 0.0;  // max over i in {2,3} and samples
  double reciprocal_sum_over_k = 0.0;
};

Le3Report le3_derivative_check(const InducedModel& im, int k, int n_max,
                               int samples = 8);

}  // namespace metamap

#endif
