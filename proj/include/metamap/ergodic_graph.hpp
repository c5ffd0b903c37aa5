#ifndef METAMAP_ERGODIC_GRAPH_HPP
#define METAMAP_ERGODIC_GRAPH_HPP

#include <array>
#include <string>
#include <vector>

#include "metamap/map_core.hpp"

namespace metamap {

/// Sorted union of disjoint intervals; touching parts merge canonically.
struct IntervalUnion {
  std::vector<Interval> parts;

  void normalize(double merge_tol = 1e-14);
  double measure() const;
  bool covers(const Interval& iv, double tol) const;

  static IntervalUnion single(Interval iv) { return {{iv}}; }
};

/// Exact forward image of an interval union under `steps` applications of
/// the map, branch by branch (monotone pieces map intervals to intervals).
IntervalUnion image_union(const MapModel& map, IntervalUnion u, int steps);

/// Accessibility digraph over the monotonicity partition {I_1..I_6}:
/// an edge i -> j means some iterate T^k(I_i) covers I_j (smallest witness
/// k recorded, 0 = no edge within the horizon).
struct AccessGraph {
  std::array<Interval, kBranchCount> nodes;
  std::array<std::array<int, kBranchCount>, kBranchCount> witness{};
  int k_max = 0;

  bool edge(int i, int j) const { return witness[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > 0; }
};

AccessGraph build_access_graph(const MapModel& map, int k_max = 64,
                               double tol = 1e-10);

/// Closed accessible classes (sinks of the quotient by mutual access);
/// their count upper-bounds the number of ergodic a.c.i.m.s with disjoint
/// supports.
struct ClassReport {
  std::vector<std::vector<int>> closed_classes;  // node indices, 0-based
  int count() const { return static_cast<int>(closed_classes.size()); }
};

ClassReport ergodic_component_bound(const AccessGraph& g);

std::string to_dot(const AccessGraph& g);
std::string class_report_text(const AccessGraph& g, const ClassReport& r);

}  // namespace metamap

#endif
