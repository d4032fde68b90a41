// Writes data/cardinal.calc. Composition is obtained by enumerating point
// triples on the integer grid {-2..2}^2; every realizable configuration of
// three points up to order type appears on that grid.
#include <array>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr std::array<const char*, 9> kNames = {"N", "NE", "E", "SE", "S", "SW", "W", "NW", "samepoint"};

int sign(int v) { return (v > 0) - (v < 0); }

// Direction of point a as seen from point b.
int direction(int ax, int ay, int bx, int by) {
  const int dx = sign(ax - bx);
  const int dy = sign(ay - by);
  if (dx == 0 && dy == 0) return 8;
  if (dx == 0) return dy > 0 ? 0 : 4;
  if (dy == 0) return dx > 0 ? 2 : 6;
  if (dx > 0) return dy > 0 ? 1 : 3;
  return dy > 0 ? 7 : 5;
}

// x and y sign of each relation, used for the convex (rectangle) subclass.
constexpr std::array<int, 9> kDx = {0, 1, 1, 1, 0, -1, -1, -1, 0};
constexpr std::array<int, 9> kDy = {1, 1, 0, -1, -1, -1, 0, 1, 0};

std::string set_text(std::uint32_t mask) {
  std::string out = "{";
  bool first = true;
  for (int r = 0; r < 9; ++r)
    if (mask >> r & 1u) {
      out += first ? "" : ", ";
      out += kNames[r];
      first = false;
    }
  return out + "}";
}

}  // namespace

int main() {
  std::array<std::array<std::uint32_t, 9>, 9> comp{};
  for (int ax = -2; ax <= 2; ++ax)
    for (int ay = -2; ay <= 2; ++ay)
      for (int bx = -2; bx <= 2; ++bx)
        for (int by = -2; by <= 2; ++by)
          for (int cx = -2; cx <= 2; ++cx)
            for (int cy = -2; cy <= 2; ++cy) {
              const int r = direction(ax, ay, bx, by);
              const int s = direction(bx, by, cx, cy);
              const int t = direction(ax, ay, cx, cy);
              comp[r][s] |= 1u << t;
            }

  std::cout << "# Cardinal direction calculus on points (projection based).\n"
               "# Q[a,b] = NE: a is north-east of b. Generated by tools/gen_cardinal_table.cpp.\n"
               "# format-version 1\n"
               "calculus cardinal\nrelations:";
  for (const char* n : kNames) std::cout << ' ' << n;
  std::cout << "\nidentity: samepoint\n\nconverse:\n";
  for (int r = 0; r < 9; ++r) {
    const int conv = direction(0, 0, kDx[r], kDy[r]);
    std::cout << "  " << kNames[r] << " -> " << kNames[conv] << "\n";
  }
  std::cout << "\ncomposition:\n";
  for (int r = 0; r < 9; ++r)
    for (int s = 0; s < 9; ++s)
      std::cout << "  " << kNames[r] << " ; " << kNames[s] << " -> " << set_text(comp[r][s]) << "\n";

  std::cout << "\n# compass ring; samepoint is adjacent to every direction\nneighbourhood:\n";
  for (int r = 0; r < 8; ++r) std::cout << "  " << kNames[r] << " -- " << kNames[(r + 1) % 8] << "\n";
  for (int r = 0; r < 8; ++r) std::cout << "  samepoint -- " << kNames[r] << "\n";

  // Products of convex point-algebra relations on each axis.
  const std::vector<std::vector<int>> convex = {{-1}, {0}, {1}, {-1, 0}, {0, 1}, {-1, 0, 1}};
  std::cout << "\n# convex relations (rectangles of point-algebra intervals); tractable\ntractable:\n";
  for (const auto& xs : convex)
    for (const auto& ys : convex) {
      std::uint32_t mask = 0;
      for (int r = 0; r < 9; ++r) {
        bool in_x = false, in_y = false;
        for (int v : xs) in_x |= kDx[r] == v;
        for (int v : ys) in_y |= kDy[r] == v;
        if (in_x && in_y) mask |= 1u << r;
      }
      std::cout << "  " << set_text(mask) << "\n";
    }
  return 0;
}
