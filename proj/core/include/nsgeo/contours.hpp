#pragma once

#include <nsgeo/geometry.hpp>

#include <vector>

namespace nsgeo {

/// Scalar field sampled on a grid, row-major from the origin.
struct GridData {
  Grid grid;
  std::vector<double> values;

  GridData() = default;
  GridData(Grid g, std::vector<double> v);
};

struct Polyline {
  std::vector<Point> vertices;
  bool closed = false;
};

/// Level-set polylines of the sampled field: marching squares with linear
/// edge interpolation, segments chained into polylines.
std::vector<Polyline> contour_polylines(const GridData& field, double level);

}  // namespace nsgeo
