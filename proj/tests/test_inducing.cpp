#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <tuple>

#include "metamap/errors.hpp"
#include "metamap/inducing.hpp"
#include "metamap/rng.hpp"

using namespace metamap;

namespace {

double t1_inverse_bisect(double alpha, double eps, double y) {
  const double c = std::pow(4.0, alpha) * (1.0 + 4.0 * eps);
  double lo = 0.0, hi = 0.25;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = mid + c * std::pow(mid, 1.0 + alpha) - y;
    (f < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

InducedModel small_model(double alpha, double eps, int cylinders = 0) {
  InducedOptions opts;
  opts.cylinders = cylinders;
  return InducedModel(MapModel(MapParams{alpha, eps}), opts);
}

}  // namespace

TEST_CASE("boundary orbit basics") {
  MapModel map(MapParams{0.5, 0.0});
  BoundaryOrbit orbit = boundary_orbit(map, 10000);
  CHECK(orbit.b[0] == 0.25);
  CHECK(orbit.b[1] == doctest::Approx(t1_inverse_bisect(0.5, 0.0, 0.25)).epsilon(1e-12));
  for (int n = 0; n < 1000; ++n) {
    CHECK(orbit.b[static_cast<std::size_t>(n) + 1] < orbit.b[static_cast<std::size_t>(n)]);
    CHECK(std::abs(map.branch(BranchId::T1).eval(orbit.b[static_cast<std::size_t>(n) + 1]) -
                   orbit.b[static_cast<std::size_t>(n)]) <= 1e-12);
  }
  // b_k k^2 stays inside [c, 1] deep in the orbit (c = 1/9 at alpha = 1/2)
  for (int k = 1000; k <= 10000; k += 500) {
    double scaled = orbit.b[static_cast<std::size_t>(k)] * k * static_cast<double>(k);
    CHECK(scaled >= 1.0 / 9.0);
    CHECK(scaled <= 1.02);  // approaches 1 from above (1.0141 at k=1000)
  }
}

TEST_CASE("sublemma lower bound") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    MapModel map(MapParams{alpha, 0.0});
    BoundaryOrbit orbit = boundary_orbit(map, 10000);
    SublemmaReport rep = sublemma_check(orbit, alpha);
    CHECK(rep.violations == 0);
    CHECK(rep.d_formula == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.c_formula ==
          doctest::Approx(1.0 / (4.0 * std::pow(1.0 + alpha, 1.0 / alpha))).epsilon(1e-14));
    CHECK(rep.margin > 0.0);
  }
  // the perturbation only strengthens the derivative; the base bound survives
  MapModel pert(MapParams{0.5, 0.05});
  SublemmaReport rep = sublemma_check(boundary_orbit(pert, 5000), 0.5);
  CHECK(rep.violations == 0);
}

TEST_CASE("cylinder endpoints") {
  InducedModel im = small_model(0.5, 0.0, 200);
  CHECK(im.a(0) == 0.25);
  CHECK(im.ap(1) == doctest::Approx(7.0 / 16).epsilon(1e-14));
  CHECK(im.a(1) == doctest::Approx(5.0 / 16).epsilon(1e-14));
  // accumulation at 3/8 from both sides
  CHECK(im.a(200) < 0.375);
  CHECK(im.ap(200) > 0.375);
  CHECK(im.residual().contains(0.375));
  CHECK(im.a(200) == doctest::Approx(0.375).epsilon(1e-3));
  for (int n = 2; n <= 200; ++n) {
    CHECK(im.a(n) > im.a(n - 1));
    CHECK(im.ap(n) < im.ap(n - 1));
  }
}

TEST_CASE("return times: oracle vs cylinders") {
  InducedModel im = small_model(0.5, 0.05);
  const MapModel& map = im.map();

  CHECK(*return_time_oracle(map, 0.9, 100) == 1);
  // Z_7 left piece midpoint
  double mid7 = im.cylinder_piece(7, PieceSide::left).midpoint();
  CHECK(*return_time_oracle(map, mid7, 100) == 7);
  CHECK(im.cylinder_index(mid7) == 7);
  // any x with T(x) in W_3 returns in 4 steps
  double x = map.branch(BranchId::T2).inverse(im.gap(3).midpoint());
  CHECK(*return_time_oracle(map, x, 100) == 4);
  CHECK(im.cylinder_index(x) == 4);

  // agreement on random points (excluding the unresolved region)
  CounterRng rng(7, "cylinder-oracle");
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    double p = rng.uniform(0.25, 1.0);
    int idx;
    try {
      idx = im.cylinder_index(p);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::unresolved_region);
      continue;
    }
    auto oracle = return_time_oracle(map, p, im.cylinder_count() + 10);
    REQUIRE(oracle.has_value());
    CHECK(idx == *oracle);
    ++checked;
  }
  CHECK(checked > 9900);
}

TEST_CASE("oracle at the unperturbed map") {
  MapModel map(MapParams{0.5, 0.0});
  CHECK(*return_time_oracle(map, 0.3, 10) == 1);  // T2(0.3) = 0.3 stays in Delta
}

TEST_CASE("induced evaluation") {
  InducedModel im = small_model(0.5, 0.0);
  auto [y1, tau1] = im.induced_eval(0.55);
  CHECK(y1 == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(tau1 == 1);
  auto [y2, tau2] = im.induced_eval(0.5);
  CHECK(y2 == 0.5);  // boundary fixed point
  CHECK(tau2 == 1);
  auto [y3, tau3] = im.induced_eval(0.46);
  CHECK(y3 == doctest::Approx(0.34).epsilon(1e-14));
  CHECK(tau3 == 1);
  CHECK_THROWS_AS(im.induced_eval(0.375), Error);  // unresolved neighbourhood
  CHECK_THROWS_AS(im.induced_eval(0.1), Error);    // outside Delta

  // agrees with direct iteration
  CounterRng rng(8, "induced-vs-iterate");
  for (int i = 0; i < 2000; ++i) {
    double p = rng.uniform(0.25, 1.0);
    double y;
    int tau;
    try {
      std::tie(y, tau) = im.induced_eval(p);
    } catch (const Error&) {
      continue;
    }
    auto orbit = im.map().iterate(p, tau);
    CHECK(std::abs(orbit.back() - y) <= 1e-10);
  }
}

TEST_CASE("branch images and composites") {
  for (double eps : {0.0, 0.05}) {
    InducedModel im = small_model(0.5, eps);
    const double tol = 1e-10;
    for (int idx = 0; idx < im.branch_count(); ++idx) {
      InducedBranch br = im.branch(idx);
      bool t4 = br.kind == InducedBranchKind::t4a ||
                br.kind == InducedBranchKind::t4b ||
                br.kind == InducedBranchKind::t4c;
      if (br.return_time > 50 && !t4) continue;
      double lo_val = im.branch_eval(idx, br.domain.lo);
      double hi_val = im.branch_eval(idx, br.domain.hi);
      if (!br.increasing) std::swap(lo_val, hi_val);
      CHECK(std::abs(lo_val - br.image.lo) <= tol);
      CHECK(std::abs(hi_val - br.image.hi) <= tol);
      // inverse round trip at the midpoint of the image
      double y = br.image.midpoint();
      double x = im.branch_inverse(idx, y);
      CHECK(br.domain.contains(x));
      CHECK(std::abs(im.branch_eval(idx, x) - y) <= 1e-10);
      // chain-rule derivative matches a finite difference on short composites
      if (br.return_time <= 12) {
        double h = br.domain.length() * 1e-6;
        double xm = br.domain.midpoint();
        double fd = (im.branch_eval(idx, xm + h) - im.branch_eval(idx, xm - h)) / (2 * h);
        CHECK(im.branch_deriv_abs(idx, xm) == doctest::Approx(std::abs(fd)).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("cylinder lengths and measure summability") {
  for (double alpha : {0.5, 0.8}) {
    InducedModel im = small_model(alpha, 0.0, 100000);
    const int N = im.cylinder_count();
    REQUIRE(N == 100000);
    double c_len = 0.0;
    for (int k = 2; k <= N; k *= 2)
      c_len = std::max(c_len, im.cylinder_length(k) *
                                  std::pow(static_cast<double>(k), 1.0 / alpha + 1.0));
    CHECK(c_len < 1.5);  // pre-asymptotic peak 1.389 at k=16, alpha=0.5; limit is 1
    // Cauchy increment at N = 1e5 below 1e-6, and block increments shrinking
    CHECK(N * im.cylinder_length(N) < 1e-6);
    double inc1 = 0.0, inc2 = 0.0;
    for (int k = N / 4 + 1; k <= N / 2; ++k) inc1 += k * im.cylinder_length(k);
    for (int k = N / 2 + 1; k <= N; ++k) inc2 += k * im.cylinder_length(k);
    CHECK(inc2 < inc1);
  }
}

TEST_CASE("epsilon continuity of the construction") {
  InducedModel im0 = small_model(0.5, 0.0, 50);
  double prev_gap_b = 1.0, prev_gap_a = 1.0;
  for (double eps : {0.1, 0.05, 0.01}) {
    InducedModel im = small_model(0.5, eps, 50);
    double gap_b = 0.0, gap_a = 0.0;
    for (int n = 1; n <= 50; ++n) {
      CHECK(im.b(n) <= im0.b(n));  // monotone in epsilon
      gap_b = std::max(gap_b, std::abs(im.b(n) - im0.b(n)));
      gap_a = std::max(gap_a, std::abs(im.a(n) - im0.a(n)));
    }
    CHECK(gap_b < prev_gap_b);
    CHECK(gap_a < prev_gap_a);
    prev_gap_b = gap_b;
    prev_gap_a = gap_a;
  }
}

TEST_CASE("derivative lower bound along preimage chains") {
  InducedModel im = small_model(0.5, 0.0);
  for (int k : {1, 5, 20}) {
    Le3Report rep = le3_derivative_check(im, k, k + 200);
    CHECK(rep.violations == 0);
    CHECK(rep.min_slack >= 1.0);
    CHECK(rep.eta_k > 0.0);
    CHECK(rep.d_used > 1.0);
    CHECK(rep.reciprocal_sum_over_k < 10.0);
  }
}

TEST_CASE("boundary assignment conventions") {
  InducedModel im = small_model(0.5, 0.05, 100);
  CHECK(im.cylinder_index(0.25) == 1);
  CHECK(im.cylinder_index(1.0) == 1);
  // a_n belongs to Z_n (the cylinder on its left)
  for (int n : {1, 2, 5}) CHECK(im.cylinder_index(im.a(n)) == n);
}
