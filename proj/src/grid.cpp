#include "voxmill/grid.hpp"

#include <cmath>

namespace voxmill {

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw ParamError("grid dims must be >= 1");
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
      throw ParamError("grid spacing must be > 0");
    if (!std::isfinite(origin[a])) throw ParamError("grid origin must be finite");
  }
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.cell_count())
    throw ShapeError("value array length does not match grid dims");
}

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op) {
  if (a.spec() != b.spec())
    throw ShapeError(std::string(op) + ": fields are on different grids");
}

double volume_integral(const ScalarField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v;
  return s * f.spec().dv();
}

ScalarField threshold(const ScalarField& f, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ParamError("threshold tau must be in (0, 1)");
  ScalarField out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] > tau ? 1.0 : 0.0;
  return out;
}

ScalarField implicit_union(const ScalarField& rho_omega, const ScalarField& indicator_f) {
  require_same_grid(rho_omega, indicator_f, "implicit_union");
  ScalarField out(rho_omega.spec());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double v = rho_omega[i] + indicator_f[i];
    out[i] = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }
  return out;
}

double field_min(const ScalarField& f) {
  double m = f[0];
  for (double v : f.values()) m = v < m ? v : m;
  return m;
}

double field_max(const ScalarField& f) {
  double m = f[0];
  for (double v : f.values()) m = v > m ? v : m;
  return m;
}

bool all_finite(const ScalarField& f) {
  for (double v : f.values())
    if (!std::isfinite(v)) return false;
  return true;
}

ScalarField field_min(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a, b, "field_min");
  ScalarField out(a.spec());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] < b[i] ? a[i] : b[i];
  return out;
}

namespace {

// Integer voxel offset between two grids sharing a lattice, or throws.
std::array<long long, 3> lattice_offset(const GridSpec& from, const GridSpec& to) {
  if (!from.same_spacing(to)) throw ShapeError("resample_onto: spacing mismatch");
  std::array<long long, 3> off{};
  for (int a = 0; a < 3; ++a) {
    double d = (to.origin[a] - from.origin[a]) / from.spacing[a];
    double r = std::round(d);
    if (std::abs(d - r) > 1e-9)
      throw ShapeError("resample_onto: grids are not lattice-aligned");
    off[a] = static_cast<long long>(r);
  }
  return off;
}

}  // namespace

ScalarField resample_onto(const ScalarField& f, const GridSpec& target) {
  auto off = lattice_offset(f.spec(), target);
  const auto& sd = f.spec().dims;
  ScalarField out(target);
  for (int z = 0; z < target.dims[2]; ++z) {
    long long sz = z + off[2];
    if (sz < 0 || sz >= sd[2]) continue;
    for (int y = 0; y < target.dims[1]; ++y) {
      long long sy = y + off[1];
      if (sy < 0 || sy >= sd[1]) continue;
      for (int x = 0; x < target.dims[0]; ++x) {
        long long sx = x + off[0];
        if (sx < 0 || sx >= sd[0]) continue;
        out.at(x, y, z) = f.at(static_cast<int>(sx), static_cast<int>(sy),
                               static_cast<int>(sz));
      }
    }
  }
  return out;
}

double sample_trilinear(const ScalarField& f, const Vec3& p) {
  const GridSpec& g = f.spec();
  double fx = (p.x - g.origin[0]) / g.spacing[0];
  double fy = (p.y - g.origin[1]) / g.spacing[1];
  double fz = (p.z - g.origin[2]) / g.spacing[2];

  auto snap = [](double v) {
    double r = std::round(v);
    return std::abs(v - r) <= 1e-9 ? r : v;
  };
  fx = snap(fx);
  fy = snap(fy);
  fz = snap(fz);
  if (g.is_2d()) fz = 0.0;  // 2D fields ignore the z coordinate

  int x0 = static_cast<int>(std::floor(fx));
  int y0 = static_cast<int>(std::floor(fy));
  int z0 = static_cast<int>(std::floor(fz));
  double tx = fx - x0, ty = fy - y0, tz = fz - z0;

  double acc = 0.0;
  for (int dz = 0; dz <= 1; ++dz) {
    double wz = dz ? tz : 1.0 - tz;
    if (wz == 0.0) continue;
    int z = z0 + dz;
    if (z < 0 || z >= g.dims[2]) continue;
    for (int dy = 0; dy <= 1; ++dy) {
      double wy = dy ? ty : 1.0 - ty;
      if (wy == 0.0) continue;
      int y = y0 + dy;
      if (y < 0 || y >= g.dims[1]) continue;
      for (int dx = 0; dx <= 1; ++dx) {
        double wx = dx ? tx : 1.0 - tx;
        if (wx == 0.0) continue;
        int x = x0 + dx;
        if (x < 0 || x >= g.dims[0]) continue;
        acc += wx * wy * wz * f.at(x, y, z);
      }
    }
  }
  return acc;
}

}  // namespace voxmill
