#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "metamap/ergodic_graph.hpp"
#include "metamap/rng.hpp"

using namespace metamap;

TEST_CASE("interval union normalization") {
  IntervalUnion u{{{0.6, 0.9}, {0.1, 0.3}, {0.3, 0.5}}};
  u.normalize();
  REQUIRE(u.parts.size() == 2);
  CHECK(u.parts[0].lo == 0.1);
  CHECK(u.parts[0].hi == 0.5);
  CHECK(u.measure() == doctest::Approx(0.7));
  CHECK(u.covers({0.15, 0.45}, 0.0));
  CHECK(!u.covers({0.45, 0.65}, 1e-10));
}

TEST_CASE("one-step images of the partition intervals") {
  MapModel map0(MapParams{0.5, 0.0});
  IntervalUnion i3 = image_union(map0, IntervalUnion::single({0.375, 0.5}), 1);
  REQUIRE(i3.parts.size() == 1);
  CHECK(i3.parts[0].lo == doctest::Approx(0.0));
  CHECK(i3.parts[0].hi == doctest::Approx(0.5));

  IntervalUnion i4 = image_union(map0, IntervalUnion::single({0.5, 0.625}), 1);
  REQUIRE(i4.parts.size() == 1);
  CHECK(i4.parts[0].lo == doctest::Approx(0.5));
  CHECK(i4.parts[0].hi == doctest::Approx(1.0));

  MapModel map(MapParams{0.5, 0.05});
  IntervalUnion i5 = image_union(map, IntervalUnion::single({0.625, 0.8125}), 1);
  REQUIRE(i5.parts.size() == 1);
  CHECK(i5.parts[0].lo == doctest::Approx(0.45).epsilon(1e-13));
  CHECK(i5.parts[0].hi == doctest::Approx(1.0));
}

TEST_CASE("image monotonicity and growth") {
  MapModel map(MapParams{0.5, 0.01});
  CounterRng rng(5, "image-monotone");
  for (int rep = 0; rep < 200; ++rep) {
    double a = rng.uniform(0.0, 0.9);
    double b = a + rng.uniform(0.0, 1.0 - a);
    double c = a + rng.uniform(0.0, (b - a));
    double d = c + rng.uniform(0.0, b - c);
    IntervalUnion big = image_union(map, IntervalUnion::single({a, b}), 2);
    IntervalUnion small = image_union(map, IntervalUnion::single({c, d}), 2);
    for (const Interval& p : small.parts) CHECK(big.covers(p, 1e-12));
  }
  // Lebesgue measure of iterated images grows until the union stabilizes
  IntervalUnion u = IntervalUnion::single({0.0, 0.25});
  double prev = u.measure();
  for (int k = 0; k < 8; ++k) {
    u = image_union(map, u, 1);
    CHECK(u.measure() >= prev - 1e-12);
    prev = u.measure();
  }
}

TEST_CASE("two invariant blocks at epsilon zero") {
  AccessGraph g = build_access_graph(MapModel(MapParams{0.5, 0.0}), 64);
  ClassReport r = ergodic_component_bound(g);
  REQUIRE(r.count() == 2);
  CHECK(r.closed_classes[0] == std::vector<int>{0, 1, 2});
  CHECK(r.closed_classes[1] == std::vector<int>{3, 4, 5});
  // the halves never reach each other
  for (int i : {0, 1, 2})
    for (int j : {3, 4, 5}) {
      CHECK(!g.edge(i, j));
      CHECK(!g.edge(j, i));
    }
  // T3 covers itself in one step
  CHECK(g.witness[2][2] == 1);
}

TEST_CASE("single class for every positive epsilon") {
  for (double eps : {1e-4, 0.00625, 0.05, 0.1}) {
    AccessGraph g = build_access_graph(MapModel(MapParams{0.5, eps}), 64);
    ClassReport r = ergodic_component_bound(g);
    CHECK(r.count() == 1);
    REQUIRE(r.closed_classes.size() == 1);
    CHECK(r.closed_classes[0].size() == 6);
    // every node reaches every node
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) CHECK(g.edge(i, j));
  }
}

TEST_CASE("stability in the horizon") {
  for (double eps : {0.0, 1e-4, 0.05}) {
    MapModel map(MapParams{0.5, eps});
    int c32 = ergodic_component_bound(build_access_graph(map, 32)).count();
    int c64 = ergodic_component_bound(build_access_graph(map, 64)).count();
    CHECK(c32 == c64);
  }
}

TEST_CASE("dot export") {
  AccessGraph g = build_access_graph(MapModel(MapParams{0.5, 0.05}), 64);
  std::string dot = to_dot(g);
  CHECK(dot.find("digraph access") != std::string::npos);
  CHECK(dot.find("I1 -> I4") != std::string::npos);
  CHECK(dot.find("I5 -> I1") != std::string::npos);
  std::string rep = class_report_text(g, ergodic_component_bound(g));
  CHECK(rep.find("closed accessible classes: 1") != std::string::npos);
}
