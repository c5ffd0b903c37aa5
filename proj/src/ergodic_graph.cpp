#include "metamap/ergodic_graph.hpp"

#include <algorithm>
#include <sstream>

#include "metamap/errors.hpp"

namespace metamap {

void IntervalUnion::normalize(double merge_tol) {
  std::sort(parts.begin(), parts.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& p : parts) {
    if (p.empty()) continue;
    if (!merged.empty() && p.lo <= merged.back().hi + merge_tol)
      merged.back().hi = std::max(merged.back().hi, p.hi);
    else
      merged.push_back(p);
  }
  parts = std::move(merged);
}

double IntervalUnion::measure() const {
  double s = 0.0;
  for (const Interval& p : parts) s += p.length();
  return s;
}

bool IntervalUnion::covers(const Interval& iv, double tol) const {
  for (const Interval& p : parts)
    if (p.covers(iv, tol)) return true;
  return false;
}

IntervalUnion image_union(const MapModel& map, IntervalUnion u, int steps) {
  if (steps < 1) fail(ErrorKind::parameter, "image_union: steps must be >= 1");
  u.normalize();
  for (int s = 0; s < steps; ++s) {
    IntervalUnion next;
    for (const Interval& p : u.parts) {
      for (const Branch& br : map.branches()) {
        Interval piece = p.intersect(br.domain());
        if (piece.empty()) continue;
        next.parts.push_back(Interval::ordered(br.eval(piece.lo), br.eval(piece.hi)));
      }
    }
    next.normalize();
    u = std::move(next);
  }
  return u;
}

AccessGraph build_access_graph(const MapModel& map, int k_max, double tol) {
  if (k_max < 1) fail(ErrorKind::parameter, "build_access_graph: k_max must be >= 1");
  AccessGraph g;
  g.k_max = k_max;
  const auto pts = MapModel::partition_points();
  for (int i = 0; i < kBranchCount; ++i)
    g.nodes[static_cast<std::size_t>(i)] = {pts[static_cast<std::size_t>(i)],
                                            pts[static_cast<std::size_t>(i) + 1]};
  for (int i = 0; i < kBranchCount; ++i) {
    IntervalUnion u = IntervalUnion::single(g.nodes[static_cast<std::size_t>(i)]);
    for (int k = 1; k <= k_max; ++k) {
      u = image_union(map, u, 1);
      for (int j = 0; j < kBranchCount; ++j) {
        auto& w = g.witness[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (w == 0 && u.covers(g.nodes[static_cast<std::size_t>(j)], tol)) w = k;
      }
    }
  }
  return g;
}

ClassReport ergodic_component_bound(const AccessGraph& g) {
  // Mutual-access equivalence classes, then keep the closed ones (no edge
  // leaving the class).
  std::array<int, kBranchCount> comp;
  comp.fill(-1);
  int n_comp = 0;
  for (int i = 0; i < kBranchCount; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    comp[static_cast<std::size_t>(i)] = n_comp;
    for (int j = i + 1; j < kBranchCount; ++j)
      if (g.edge(i, j) && g.edge(j, i) && comp[static_cast<std::size_t>(j)] < 0)
        comp[static_cast<std::size_t>(j)] = n_comp;
    ++n_comp;
  }
  ClassReport report;
  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> members;
    for (int i = 0; i < kBranchCount; ++i)
      if (comp[static_cast<std::size_t>(i)] == c) members.push_back(i);
    bool closed = true;
    for (int i : members)
      for (int j = 0; j < kBranchCount; ++j)
        if (g.edge(i, j) && comp[static_cast<std::size_t>(j)] != c) closed = false;
    if (closed) report.closed_classes.push_back(std::move(members));
  }
  return report;
}

std::string to_dot(const AccessGraph& g) {
  std::ostringstream os;
  os << "digraph access {\n";
  for (int i = 0; i < kBranchCount; ++i)
    os << "  I" << i + 1 << " [label=\"I" << i + 1 << " [" << g.nodes[static_cast<std::size_t>(i)].lo
       << "," << g.nodes[static_cast<std::size_t>(i)].hi << "]\"];\n";
  for (int i = 0; i < kBranchCount; ++i)
    for (int j = 0; j < kBranchCount; ++j)
      if (g.edge(i, j))
        os << "  I" << i + 1 << " -> I" << j + 1 << " [label=\"k="
           << g.witness[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] << "\"];\n";
  os << "}\n";
  return os.str();
}

std::string class_report_text(const AccessGraph& g, const ClassReport& r) {
  std::ostringstream os;
  os << "closed accessible classes: " << r.count() << "\n";
  for (const auto& cls : r.closed_classes) {
    os << "  {";
    for (std::size_t m = 0; m < cls.size(); ++m)
      os << (m ? "," : "") << "I" << cls[m] + 1;
    os << "}\n";
  }
  os << "horizon k_max = " << g.k_max << "\n";
  return os.str();
}

}  // namespace metamap
