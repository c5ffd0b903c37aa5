#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metamap/errors.hpp"
#include "metamap/holes_ratio.hpp"
#include "metamap/rng.hpp"

using namespace metamap;

namespace {

struct Setup {
  InducedModel im0;
  StepDensity hat_l, hat_r;
  KacConstants kc_l, kc_r;
  PullbackDensity h_l, h_r;
};

Setup make_setup(double alpha, int m, int w_count = 512) {
  MapModel map(MapParams{alpha, 0.0});
  Grid dg = delta_grid(m);
  int m_l = 0;
  while (m_l < dg.size() && dg.edge(m_l) < 0.5) ++m_l;
  Grid left = Grid::from_edges(
      std::vector<double>(dg.edges().begin(), dg.edges().begin() + m_l + 1));
  Grid right = Grid::from_edges(
      std::vector<double>(dg.edges().begin() + m_l, dg.edges().end()));
  InducedOptions opts;
  opts.cell_width = left.width(0);
  InducedModel im(map, opts);
  StepDensity hat_l = stationary_density(build_ulam(im, left));
  StepDensity hat_r = stationary_density(build_ulam(im, right));
  KacConstants kc_l = kac_constant(im, hat_l);
  KacConstants kc_r = kac_constant(im, hat_r);
  PullbackOptions popts;
  popts.w_count = w_count;
  PullbackDensity h_l = pullback(im, hat_l, kc_l, popts);
  PullbackDensity h_r = pullback(im, hat_r, kc_r, popts);
  return {std::move(im), std::move(hat_l), std::move(hat_r),
          kc_l,          kc_r,             std::move(h_l),
          std::move(h_r)};
}

}  // namespace

TEST_CASE("full holes") {
  MapModel flat(MapParams{0.5, 0.0});
  auto [l0, r0] = full_holes(flat);
  CHECK(l0.pieces.empty());
  CHECK(r0.pieces.empty());

  for (double eps : {0.01, 0.05, 0.1}) {
    MapModel map(MapParams{0.5, eps});
    auto [hl, hr] = full_holes(map);
    REQUIRE(hl.pieces.size() == 1);
    REQUIRE(hr.pieces.size() == 1);
    // left hole straddles 1/4, endpoints sit on the level 1/2
    Interval piece = hl.pieces[0].iv;
    CHECK(piece.lo < 0.25);
    CHECK(piece.hi > 0.25);
    CHECK(map.eval(piece.lo) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(map.eval(piece.hi) == doctest::Approx(0.5).epsilon(1e-12));
    // right hole width in closed form: 2 eps / ((8/3)(1+2 eps))
    CHECK(hr.pieces[0].iv.length() ==
          doctest::Approx(2.0 * eps / ((8.0 / 3.0) * (1.0 + 2.0 * eps))).epsilon(1e-13));
    CHECK(hr.pieces[0].iv.contains(MapModel::spike_location()));
  }
}

TEST_CASE("induced holes from the definition") {
  {
    InducedOptions opts;
    opts.cylinders = 64;
    InducedModel im0(MapModel(MapParams{0.5, 0.0}), opts);
    CHECK_THROWS_AS(induced_holes(im0), Error);
  }

  MapModel map(MapParams{0.5, 0.05});
  InducedModel im(map, {});
  auto [hl, hr] = induced_holes(im);

  // right hole: exactly two pieces flanking the spike
  REQUIRE(hr.pieces.size() == 2);
  CHECK(hr.pieces[0].iv.hi == MapModel::spike_location());
  CHECK(hr.pieces[1].iv.lo == MapModel::spike_location());

  // definition-level membership: interior points map across 1/2
  CounterRng rng(11, "hole-membership");
  int tested = 0;
  for (const HolePiece& p : hl.pieces) {
    if (p.cylinder > 20) continue;
    for (int i = 0; i < 200; ++i) {
      double x = rng.uniform(p.iv.lo, p.iv.hi);
      if (!p.iv.contains_interior(x)) continue;
      CHECK(im.induced_eval(x).first > 0.5);
      ++tested;
    }
  }
  CHECK(tested > 3000);
  for (const HolePiece& p : hr.pieces)
    for (int i = 0; i < 200; ++i) {
      double x = rng.uniform(p.iv.lo, p.iv.hi);
      if (p.iv.contains_interior(x)) CHECK(im.induced_eval(x).first < 0.5);
    }
  // and points just outside the T2-side pieces do not
  for (const HolePiece& p : hl.pieces) {
    if (p.cylinder > 20 || p.branch_side != PieceSide::left) continue;
    double just_out = p.iv.hi + 0.02 * p.iv.length();
    if (just_out < im.a(p.cylinder))
      CHECK(im.induced_eval(just_out).first <= 0.5 + 1e-12);
  }

  // mean-value sizing: |piece| ~ eps / |DT_hat| on the piece
  for (const HolePiece& p : hl.pieces) {
    if (p.cylinder > 10 || p.branch_side != PieceSide::left) continue;
    int idx = p.cylinder - 1;  // T2-side branch index
    double dlo = im.branch_deriv_abs(idx, p.iv.lo);
    double dhi = im.branch_deriv_abs(idx, p.iv.hi);
    double dmin = std::min(dlo, dhi) * 0.99;
    double dmax = std::max(dlo, dhi) * 1.01;
    CHECK(p.iv.length() >= 0.05 / dmax);
    CHECK(p.iv.length() <= 0.05 / dmin);
  }
}

TEST_CASE("hole measures") {
  MapModel map(MapParams{0.5, 0.05});
  InducedModel im(map, {});
  auto [hl, hr] = induced_holes(im);

  HoleSet empty{HoleSide::left, SystemKind::full, 0.0, {}, 0.0};
  StepDensity flat(Grid::uniform(0.25, 1.0, 64), 1.0);
  CHECK(hole_measure(empty, flat) == 0.0);

  // constant-2 density: measure is twice the width
  StepDensity two(Grid::uniform(0.5, 1.0, 4096), 2.0);
  CHECK(hole_measure(hr, two) == doctest::Approx(2.0 * hr.total_width()).epsilon(1e-10));
}

TEST_CASE("hole measure scaling in epsilon") {
  Setup s = make_setup(0.5, 1536);
  double prev = -1.0;
  for (double eps : {0.05, 0.025, 0.0125}) {
    MapModel map(MapParams{0.5, eps});
    InducedModel im(map, {});
    auto [hl, hr] = induced_holes(im);
    double scaled = hole_measure(hl, s.hat_l) / eps;
    CHECK(scaled > 0.1);
    CHECK(scaled < 10.0);
    if (prev > 0.0) CHECK(std::abs(scaled - prev) / prev < 0.2);
    prev = scaled;
  }
}

TEST_CASE("closed-form limiting ratio") {
  Setup s = make_setup(0.5, 1536);
  LhrClosedForm cf = lhr_closed_form(s.hat_l, s.hat_r, s.im0);
  // numerator: hat_h_r(s_r) * (3/8 + 3/8) = 2 * 3/4
  CHECK(cf.numerator == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(cf.denominator > 0.0);
  CHECK(std::isfinite(cf.denominator));
  CHECK(cf.tail_rel < 0.005);
  // the single-piece bookkeeping drops the T3-side pieces, so its sum is
  // smaller and its ratio larger
  CHECK(cf.denominator_single_piece < cf.denominator);
  CHECK(cf.value_single_piece > cf.value);
  CHECK(cf.value > 0.0);

  // wrong-epsilon input is rejected
  InducedOptions opts;
  opts.cylinders = 64;
  InducedModel im_eps(MapModel(MapParams{0.5, 0.05}), opts);
  CHECK_THROWS_AS(lhr_closed_form(s.hat_l, s.hat_r, im_eps), Error);
}

TEST_CASE("sweep ratio and extrapolation") {
  Setup s = make_setup(0.5, 1536);
  std::vector<double> eps_list{0.05, 0.025, 0.0125, 0.00625};
  LhrSweep sweep = lhr_sweep(0.5, eps_list, s.hat_l, s.hat_r);
  REQUIRE(sweep.rows.size() == 4);
  double lo = 1e300, hi = 0.0;
  for (const auto& row : sweep.rows) {
    CHECK(row.ratio > 0.0);
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
  }
  CHECK((hi - lo) / lo < 0.2);  // varies by < 20% over the sweep range

  LhrClosedForm cf = lhr_closed_form(s.hat_l, s.hat_r, s.im0);
  CHECK(std::abs(sweep.extrapolated - cf.value) / cf.value < 0.10);
}

TEST_CASE("mixture weights") {
  MixtureWeights even = mixture(1.0, 0.7, 0.7);
  CHECK(even.lambda_hat == doctest::Approx(0.5));
  CHECK(even.lambda_p == doctest::Approx(0.5));

  MixtureWeights tiny = mixture(1e-6, 0.4, 1.0);
  CHECK(tiny.lambda_p < 1e-5);  // lhr -> 0 forces lambda_p -> 0

  // with c_tau_r = 1: lambda_p odds = lhr / c_tau_l
  MixtureWeights w = mixture(0.53, 0.39, 1.0);
  CHECK(w.lambda_p / (1.0 - w.lambda_p) == doctest::Approx(0.53 / 0.39).epsilon(1e-12));

  CHECK_THROWS_AS(mixture(-1.0, 0.5, 0.5), Error);
  CHECK_THROWS_AS(mixture(1.0, 0.0, 0.5), Error);

  // the diagnostic guard refuses inconsistent estimators
  LhrClosedForm closed;
  closed.value = 1.0;
  LhrSweep sweep;
  sweep.extrapolated = 2.0;
  CHECK_THROWS_AS(resolve_weights(closed, sweep, 0.5, 1.0), Error);
}

TEST_CASE("weight sanity across alpha") {
  for (double alpha : {0.3, 0.45, 0.5}) {
    Setup s = make_setup(alpha, 1536);
    LhrClosedForm cf = lhr_closed_form(s.hat_l, s.hat_r, s.im0);
    MixtureWeights w = mixture(cf.value, s.kc_l.c_tau, s.kc_r.c_tau);
    CHECK(w.lambda_hat > 0.0);
    CHECK(w.lambda_hat < 1.0);
    CHECK(w.lambda_p > 0.0);
    CHECK(w.lambda_p < 1.0);
  }
  // near alpha = 1 the return-time tail decays too slowly for the certified
  // Kac budget at desk-scale cylinder counts; the truncation error is the
  // designed outcome, not a silent degradation
  CHECK_THROWS_AS(make_setup(0.75, 512), Error);
}

TEST_CASE("both h_p constructions agree") {
  Setup s = make_setup(0.5, 1536);
  LhrClosedForm cf = lhr_closed_form(s.hat_l, s.hat_r, s.im0);
  MixtureWeights w = mixture(cf.value, s.kc_l.c_tau, s.kc_r.c_tau);

  PullbackDensity mix = h_p_mix(w, s.h_l, s.h_r, s.kc_l.c_tau, s.kc_r.c_tau);
  Grid dg = delta_grid(1536);
  PullbackOptions popts;
  popts.w_count = 512;
  PullbackDensity pulled = h_p_pullback(w, s.hat_l, s.hat_r, dg, s.im0, popts);

  CHECK(mix.integral_pre_renorm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(pulled.integral_pre_renorm - 1.0) < 0.005);
  CHECK(l1_distance(mix.full, pulled.full) < 2e-3);

  // on the gaps h_p is lambda_p * h_l (h_r carries no mass there)
  for (double x : {0.2, 0.1, 0.02}) {
    CHECK(pulled.value_at(x) ==
          doctest::Approx(w.lambda_p * s.h_l.value_at(x)).epsilon(2e-3));
  }
  // c_tau_p mixture identity
  CHECK(1.0 / pulled.c_tau ==
        doctest::Approx(w.lambda_hat / s.kc_l.c_tau +
                        (1.0 - w.lambda_hat) / s.kc_r.c_tau).epsilon(1e-9));
}

TEST_CASE("perturbed-measure identities") {
  // mu_eps(H) = c_tau_eps * mu_hat_eps(H_hat) and the ratio transfer
  double eps = 0.05;
  PerturbedDensity pd = perturbed_density(0.5, eps, 3072);
  MapModel map(MapParams{0.5, eps});
  InducedModel im(map, {});
  auto [hl_full, hr_full] = full_holes(map);
  auto [hl_ind, hr_ind] = induced_holes(im);
  double mu_l = hole_measure(hl_full, pd.h);
  double mu_r = hole_measure(hr_full, pd.h);
  double mu_hat_l = hole_measure(hl_ind, pd.hat);
  double mu_hat_r = hole_measure(hr_ind, pd.hat);
  CHECK(std::abs(mu_l - pd.kc.c_tau * mu_hat_l) / mu_l < 0.01);
  CHECK(std::abs(mu_r - pd.kc.c_tau * mu_hat_r) / mu_r < 0.01);
  double ratio_full = mu_r / mu_l;
  double ratio_induced = mu_hat_r / mu_hat_l;
  CHECK(std::abs(ratio_full - ratio_induced) / ratio_induced < 0.01);
}
