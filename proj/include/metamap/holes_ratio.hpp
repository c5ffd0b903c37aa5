#ifndef METAMAP_HOLES_RATIO_HPP
#define METAMAP_HOLES_RATIO_HPP

#include <span>

#include "metamap/pullback.hpp"

namespace metamap {

enum class HoleSide { left, right };
enum class SystemKind { full, induced };

struct HolePiece {
  Interval iv;
  int cylinder = 0;  // induced left holes carry their cylinder tag
  PieceSide branch_side = PieceSide::left;
};

struct HoleSet {
  HoleSide side = HoleSide::left;
  SystemKind system = SystemKind::full;
  double epsilon = 0.0;
  std::vector<HolePiece> pieces;
  double tail_width_bound = 0.0;  // pieces beyond the resolved cylinders

  double total_width() const;
};

/// Full-system holes: the set of points of one half whose image lands in
/// the other half.  Exact interval endpoints via branch inverses of the
/// level 1/2; both empty at epsilon = 0.
std::pair<HoleSet, HoleSet> full_holes(const MapModel& map);

/// Induced-system holes from the definition (membership of the branch
/// image relative to 1/2): per cylinder, the T2-side piece always crosses
/// 1/2, and the T3-side piece does for n >= 2; the right hole is the two
/// pieces flanking the spike.  Requires epsilon > 0.
std::pair<HoleSet, HoleSet> induced_holes(const InducedModel& im);

double hole_measure(const HoleSet& holes, const StepDensity& density);
double hole_measure(const HoleSet& holes, const PullbackDensity& density);

/// Limit of the hole-measure ratio as epsilon -> 0, in closed form from
/// the unperturbed densities: spike term over the sum of per-branch terms
/// h_l(endpoint)/|DT_hat(endpoint)| at the points where the branch image
/// touches 1/2.  `denominator_single_piece` keeps only one piece per
/// cylinder (the T2 side); the definition also charges the T3-side pieces
/// for n >= 2, and the difference between the two sums is reported.
struct LhrClosedForm {
  double value = 0.0;  // definition-based limit
  double numerator = 0.0;
  double denominator = 0.0;
  double denominator_single_piece = 0.0;
  double value_single_piece = 0.0;
  double tail_rel = 0.0;
};

LhrClosedForm lhr_closed_form(const StepDensity& hat_l, const StepDensity& hat_r,
                              const InducedModel& im0);

struct LhrSweepRow {
  double epsilon = 0.0;
  double mu_l_hole = 0.0;
  double mu_r_hole = 0.0;
  double ratio = 0.0;
};

struct LhrSweep {
  std::vector<LhrSweepRow> rows;
  double extrapolated = 0.0;  // linear-in-epsilon fit on the last 3 points
};

/// Hole-measure ratio per epsilon using the unperturbed densities, plus
/// the epsilon -> 0 extrapolation.
LhrSweep lhr_sweep(double alpha, std::span<const double> eps_list,
                   const StepDensity& hat_l, const StepDensity& hat_r);

struct MixtureWeights {
  double lhr = 0.0;
  double lambda_hat = 0.0;
  double lambda_p = 0.0;
};

MixtureWeights mixture(double lhr, double c_tau_l, double c_tau_r);

/// Cross-validates the two independent limiting-ratio estimates and only
/// then produces the weights; disagreement beyond 25% is a diagnostic
/// failure, not a result.
MixtureWeights resolve_weights(const LhrClosedForm& closed, const LhrSweep& sweep,
                               double c_tau_l, double c_tau_r);

/// lambda_p h_l + (1 - lambda_p) h_r on the merged partition.
PullbackDensity h_p_mix(const MixtureWeights& w, const PullbackDensity& h_l,
                        const PullbackDensity& h_r, double c_tau_l, double c_tau_r);

/// hat_p = lambda_hat hat_l + (1 - lambda_hat) hat_r on `onto`, then the
/// usual Kac constant and pull-back.
PullbackDensity h_p_pullback(const MixtureWeights& w, const StepDensity& hat_l,
                             const StepDensity& hat_r, const Grid& onto,
                             const InducedModel& im0, PullbackOptions opts = {});

}  // namespace metamap

#endif
