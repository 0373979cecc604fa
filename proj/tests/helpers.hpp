#pragma once

#include <random>

#include "voxmill/grid.hpp"

namespace testutil {

using voxmill::GridSpec;
using voxmill::ScalarField;

inline GridSpec grid2d(int nx, int ny, double spacing = 1.0, double ox = 0.0, double oy = 0.0) {
  GridSpec g;
  g.dims = {nx, ny, 1};
  g.spacing = {spacing, spacing, spacing};
  g.origin = {ox, oy, 0.0};
  return g;
}

inline GridSpec grid3d(int nx, int ny, int nz, double spacing = 1.0) {
  GridSpec g;
  g.dims = {nx, ny, nz};
  g.spacing = {spacing, spacing, spacing};
  g.origin = {0.0, 0.0, 0.0};
  return g;
}

inline ScalarField random_field(const GridSpec& g, unsigned seed, double lo = 0.0,
                                double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  ScalarField f(g);
  for (auto& v : f.values()) v = dist(rng);
  return f;
}

inline ScalarField random_binary(const GridSpec& g, unsigned seed, double p = 0.5) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution dist(p);
  ScalarField f(g);
  for (auto& v : f.values()) v = dist(rng) ? 1.0 : 0.0;
  return f;
}

inline bool rel_close(double a, double b, double tol, double floor = 1e-14) {
  double diff = std::abs(a - b);
  if (diff <= floor) return true;
  return diff <= tol * std::max(std::abs(a), std::abs(b));
}

inline bool fields_rel_close(const ScalarField& a, const ScalarField& b, double tol,
                             double floor = 1e-14) {
  if (a.spec() != b.spec()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!rel_close(a[i], b[i], tol, floor)) return false;
  return true;
}

inline bool fields_identical(const ScalarField& a, const ScalarField& b) {
  return a.spec() == b.spec() && a.values() == b.values();
}

}  // namespace testutil
