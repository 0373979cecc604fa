#pragma once

#include "voxmill/grid.hpp"

namespace voxmill {

/// Stationary part of a problem setup: the design domain mask (Omega_0),
/// fixture obstacles, and regions frozen during optimization. All masks are
/// binary fields on the scene grid.
struct Scene {
  GridSpec grid;
  ScalarField domain;    // 1 inside Omega_0
  ScalarField fixtures;  // 1_F
  ScalarField retained;  // density frozen at 1
  ScalarField voids;     // density frozen at 0

  static Scene full_domain(const GridSpec& grid) {
    Scene s;
    s.grid = grid;
    s.domain = ScalarField(grid, 1.0);
    s.fixtures = ScalarField(grid, 0.0);
    s.retained = ScalarField(grid, 0.0);
    s.voids = ScalarField(grid, 0.0);
    return s;
  }
};

}  // namespace voxmill
