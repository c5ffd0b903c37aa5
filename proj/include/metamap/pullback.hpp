#ifndef METAMAP_PULLBACK_HPP
#define METAMAP_PULLBACK_HPP

#include "metamap/inducing.hpp"
#include "metamap/transfer_op.hpp"

namespace metamap {

/// Kac normalization: c_tau^{-1} = sum_k k mu_hat(Z_k), truncated at the
/// resolved cylinders with a certified tail bound.
struct KacConstants {
  double c_tau = 1.0;
  double inv_sum = 1.0;     // truncated sum
  double tail_bound = 0.0;  // bound on the dropped part of inv_sum
  int n_used = 0;
};

/// hat_density must integrate to 1 over Delta (zero extension allowed,
/// e.g. block densities).  Error(truncation) if the tail bound exceeds 1e-3.
KacConstants kac_constant(const InducedModel& im, const StepDensity& hat_density);

struct PullbackOptions {
  int w_count = 1024;      // resolved gaps W_1..W_K
  int cells_per_w = 16;    // sub-cells per gap
  double tail_rel = 2e-3;  // relative accuracy of the backward recursion
};

/// Full-interval invariant density reconstructed from an induced one:
/// c_tau * hat on Delta, and on each W_k the preimage series evaluated by
/// the backward T1-orbit recursion on per-gap sub-grids.  `full` is
/// normalized to integral 1; the pre-normalization integral (the Kac
/// consistency check) and the truncated-mass bound below b_K are reported.
struct PullbackDensity {
  StepDensity full;  // over [b_K, 1], non-uniform cells
  double c_tau = 1.0;
  int resolved_w = 0;
  int cells_per_w = 0;  // 0 when the W-block cell layout is not preserved
  double x_min = 0.0;   // b_K
  double unresolved_mass_bound = 0.0;
  double integral_pre_renorm = 1.0;
  double renorm_magnitude = 0.0;
  double sup_h_over_k = 0.0;      // max over k <= K of sup_{W_k} h / k
  std::vector<double> w_sup;      // sup_{W_k} h, index k (entry 0 unused)

  double value_at(double x) const { return full.value_at(x); }
  /// "delta", "W<k>" or "unresolved"
  std::string region_tag(double x) const;
};

PullbackDensity pullback(const InducedModel& im, const StepDensity& hat_density,
                         const KacConstants& kc, PullbackOptions opts = {});

struct SeriesOptions {
  double term_rel_cut = 1e-12;
  double remainder_rel = 0.005;
  long max_terms = 100000;
};

struct SeriesResult {
  double value = 0.0;
  double remainder_estimate = 0.0;
  long terms = 0;
};

/// Literal evaluation of the preimage series at one point of [0, 1/4),
/// with the incremental backward orbit and log-space chain products.
/// Independent path used to cross-check the grid recursion.  Throws
/// Error(truncation) when the remainder estimate exceeds 1% of the sum.
SeriesResult pullback_series_at(const InducedModel& im, const StepDensity& hat_density,
                                double c_tau, double x, SeriesOptions opts = {});

/// epsilon = 0 reference pipeline: block stationary densities and their
/// pull-backs (h_r is the right-block density extended by zero, c_tau_r = 1).
struct ReferenceDensities {
  StepDensity hat_l, hat_r;
  KacConstants kc_l, kc_r;
  PullbackDensity h_l, h_r;
};

ReferenceDensities reference_densities(double alpha, int grid_m,
                                       PullbackOptions opts = {});

/// epsilon > 0 pipeline: induced stationary density on all of Delta,
/// pulled back.
struct PerturbedDensity {
  StepDensity hat;
  KacConstants kc;
  PullbackDensity h;
  double operator_leak = 0.0;
  double redistributed_mass = 0.0;
};

PerturbedDensity perturbed_density(double alpha, double epsilon, int grid_m,
                                   PullbackOptions opts = {});

/// The grid used for induced-map operators: uniform blocks on [1/4,1/2]
/// and [1/2,1] with ~equal cell widths, so 1/2 is an exact edge and block
/// densities embed without resampling.
Grid delta_grid(int m);

}  // namespace metamap

#endif
