// Composition table of the cardinal direction calculus generated from points
// on a small integer grid.
#pragma once

#include <map>
#include <vector>

#include "qsim/calculus.hpp"

namespace qsim::testing {

// Direction of point a seen from point b, named as in the cardinal calculus.
inline const char* direction(int ax, int ay, int bx, int by) {
  const int dx = (ax > bx) - (ax < bx), dy = (ay > by) - (ay < by);
  static const std::map<std::pair<int, int>, const char*> names = {
      {{0, 1}, "N"},  {{1, 1}, "NE"},  {{1, 0}, "E"},  {{1, -1}, "SE"},       {{0, -1}, "S"},
      {{-1, -1}, "SW"}, {{-1, 0}, "W"}, {{-1, 1}, "NW"}, {{0, 0}, "samepoint"}};
  return names.at({dx, dy});
}

/// Entry [r * |Q| + s] collects every direction a→c seen with a→b = r and
/// b→c = s over all point triples in [-2, 2]^2.
inline std::vector<RelationSet> cardinal_grid_table(const Calculus& c) {
  auto rel = [&](const char* name) { return *c.index_of(name); };
  std::vector<RelationSet> table(static_cast<std::size_t>(c.size()) * c.size());
  const int lo = -2, hi = 2;
  for (int ax = lo; ax <= hi; ++ax)
    for (int ay = lo; ay <= hi; ++ay)
      for (int bx = lo; bx <= hi; ++bx)
        for (int by = lo; by <= hi; ++by)
          for (int cx = lo; cx <= hi; ++cx)
            for (int cy = lo; cy <= hi; ++cy) {
              const int ab = rel(direction(ax, ay, bx, by));
              const int bc = rel(direction(bx, by, cx, cy));
              table[ab * c.size() + bc].insert(rel(direction(ax, ay, cx, cy)));
            }
  return table;
}

}  // namespace qsim::testing
