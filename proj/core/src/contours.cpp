#include <nsgeo/contours.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace nsgeo {

GridData::GridData(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw std::invalid_argument("GridData: value count does not match grid dims");
}

namespace {

// Edge key: (cell i, cell j, 0 = bottom horizontal edge / 1 = left vertical edge).
using EdgeKey = std::uint64_t;

EdgeKey edge_key(std::size_t i, std::size_t j, int orientation) {
  return (static_cast<std::uint64_t>(i) << 34) | (static_cast<std::uint64_t>(j) << 2) |
         static_cast<std::uint64_t>(orientation);
}

struct Segment {
  EdgeKey a, b;
  Point pa, pb;
};

}  // namespace

std::vector<Polyline> contour_polylines(const GridData& field, double level) {
  const Grid& g = field.grid;
  if (g.nx < 2 || g.ny < 2) return {};

  const auto value = [&](std::size_t i, std::size_t j) { return field.values[g.index(i, j)]; };
  // Interpolated crossing on the edge from node (i0,j0) to (i1,j1).
  const auto crossing = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    const double v0 = value(i0, j0);
    const double v1 = value(i1, j1);
    double t = (level - v0) / (v1 - v0);
    t = std::clamp(t, 0.0, 1.0);
    const Point p0 = g.node(i0, j0);
    const Point p1 = g.node(i1, j1);
    return Point{p0.x + t * (p1.x - p0.x), p0.y + t * (p1.y - p0.y)};
  };

  std::vector<Segment> segments;
  for (std::size_t j = 0; j + 1 < g.ny; ++j) {
    for (std::size_t i = 0; i + 1 < g.nx; ++i) {
      const double v00 = value(i, j);
      const double v10 = value(i + 1, j);
      const double v11 = value(i + 1, j + 1);
      const double v01 = value(i, j + 1);
      int mask = 0;
      if (v00 >= level) mask |= 1;
      if (v10 >= level) mask |= 2;
      if (v11 >= level) mask |= 4;
      if (v01 >= level) mask |= 8;
      if (mask == 0 || mask == 15) continue;

      // Cell edges: 0 bottom, 1 right, 2 top, 3 left.
      const auto edge_id = [&](int e) -> EdgeKey {
        switch (e) {
          case 0: return edge_key(i, j, 0);
          case 1: return edge_key(i + 1, j, 1);
          case 2: return edge_key(i, j + 1, 0);
          default: return edge_key(i, j, 1);
        }
      };
      const auto edge_point = [&](int e) -> Point {
        switch (e) {
          case 0: return crossing(i, j, i + 1, j);
          case 1: return crossing(i + 1, j, i + 1, j + 1);
          case 2: return crossing(i, j + 1, i + 1, j + 1);
          default: return crossing(i, j, i, j + 1);
        }
      };
      const auto emit = [&](int e1, int e2) {
        segments.push_back({edge_id(e1), edge_id(e2), edge_point(e1), edge_point(e2)});
      };

      switch (mask) {
        case 1: case 14: emit(3, 0); break;
        case 2: case 13: emit(0, 1); break;
        case 4: case 11: emit(1, 2); break;
        case 8: case 7:  emit(2, 3); break;
        case 3: case 12: emit(3, 1); break;
        case 6: case 9:  emit(0, 2); break;
        case 5: case 10: {
          // Saddle: disambiguate by the cell-center value.
          const double center = 0.25 * (v00 + v10 + v11 + v01);
          const bool center_in = center >= level;
          if ((mask == 5) == center_in) {
            emit(3, 2);
            emit(0, 1);
          } else {
            emit(3, 0);
            emit(1, 2);
          }
          break;
        }
        default: break;
      }
    }
  }

  // Chain segments into polylines by shared edge keys.
  std::multimap<EdgeKey, std::size_t> by_edge;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    by_edge.emplace(segments[s].a, s);
    by_edge.emplace(segments[s].b, s);
  }
  std::vector<bool> used(segments.size(), false);
  std::vector<Polyline> out;

  const auto take_next = [&](EdgeKey key, std::size_t& seg_out) {
    auto [lo, hi] = by_edge.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
      if (!used[it->second]) {
        seg_out = it->second;
        return true;
      }
    }
    return false;
  };

  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    Polyline line;
    line.vertices.push_back(segments[s].pa);
    line.vertices.push_back(segments[s].pb);
    EdgeKey head = segments[s].a;
    EdgeKey tail = segments[s].b;

    // Grow forward from the tail, then backward from the head.
    for (bool forward : {true, false}) {
      EdgeKey cursor = forward ? tail : head;
      std::size_t next = 0;
      while (take_next(cursor, next)) {
        used[next] = true;
        const Segment& seg = segments[next];
        const bool from_a = seg.a == cursor;
        const EdgeKey far = from_a ? seg.b : seg.a;
        const Point far_pt = from_a ? seg.pb : seg.pa;
        if (forward)
          line.vertices.push_back(far_pt);
        else
          line.vertices.insert(line.vertices.begin(), far_pt);
        cursor = far;
        if (cursor == (forward ? head : tail)) {
          line.closed = true;
          break;
        }
      }
      if (line.closed) break;
      if (forward)
        tail = cursor;
      else
        head = cursor;
    }
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace nsgeo
