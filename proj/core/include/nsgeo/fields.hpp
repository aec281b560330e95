#pragma once

#include <nsgeo/anisotropy.hpp>
#include <nsgeo/geometry.hpp>

#include <functional>

namespace nsgeo {

/// Spatially varying model parameters, evaluable at any query location.
using ScalarField = std::function<double(Point)>;
using AnisotropyField = std::function<AnisotropyParams(Point)>;

inline ScalarField constant_field(double value) {
  return [value](Point) { return value; };
}

inline AnisotropyField constant_field(const AnisotropyParams& value) {
  return [value](Point) { return value; };
}

}  // namespace nsgeo
