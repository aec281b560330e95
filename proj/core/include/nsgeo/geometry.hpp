#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace nsgeo {

/// Planar location / lag vector. Coordinates are taken as planar (no projection).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(double c, Point p) { return {c * p.x, c * p.y}; }
  friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
};

inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double squared_norm(Point p) { return p.x * p.x + p.y * p.y; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Axis-aligned bounding box of a point set.
struct BoundingBox {
  Point lo;
  Point hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diameter() const { return std::hypot(width(), height()); }
};

inline BoundingBox bounding_box(const std::vector<Point>& pts) {
  if (pts.empty()) throw std::invalid_argument("bounding_box: empty point set");
  BoundingBox b{pts.front(), pts.front()};
  for (const Point& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

/// Regular node-registered raster: node (i, j) sits at origin + (i*dx, j*dy),
/// 0 <= i < nx, 0 <= j < ny.
struct Grid {
  Point origin;
  double dx = 1.0;
  double dy = 1.0;
  std::size_t nx = 1;
  std::size_t ny = 1;

  Grid() = default;
  Grid(Point origin_, double dx_, double dy_, std::size_t nx_, std::size_t ny_)
      : origin(origin_), dx(dx_), dy(dy_), nx(nx_), ny(ny_) {
    if (dx <= 0.0 || dy <= 0.0) throw std::invalid_argument("Grid: cell sizes must be positive");
    if (nx < 1 || ny < 1) throw std::invalid_argument("Grid: dims must be >= 1");
  }

  std::size_t size() const { return nx * ny; }
  Point node(std::size_t i, std::size_t j) const {
    return {origin.x + static_cast<double>(i) * dx, origin.y + static_cast<double>(j) * dy};
  }
  std::size_t index(std::size_t i, std::size_t j) const { return j * nx + i; }

  std::vector<Point> nodes() const {
    std::vector<Point> out;
    out.reserve(size());
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) out.push_back(node(i, j));
    return out;
  }
};

/// Grid covering a bounding box (inclusive of both ends) with nx-by-ny nodes.
inline Grid grid_over(const BoundingBox& box, std::size_t nx, std::size_t ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid_over: dims must be >= 1");
  const double dx = nx > 1 ? box.width() / static_cast<double>(nx - 1) : 1.0;
  const double dy = ny > 1 ? box.height() / static_cast<double>(ny - 1) : 1.0;
  return Grid(box.lo, dx > 0 ? dx : 1.0, dy > 0 ? dy : 1.0, nx, ny);
}

}  // namespace nsgeo
