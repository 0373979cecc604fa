#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxmill/errors.hpp"
#include "voxmill/geometry.hpp"

namespace voxmill {

/// Uniform Cartesian voxel grid. nz = 1 encodes 2D (unit thickness).
///
/// Index convention used by every module: linear index
///   i = x + nx * (y + ny * z)
/// i.e. x fastest, z slowest. Voxel (x, y, z) has its center at
///   origin + spacing .* (x, y, z).
struct GridSpec {
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  /// Voxel volume (area in 2D with unit thickness).
  double dv() const { return spacing[0] * spacing[1] * spacing[2]; }

  bool is_2d() const { return dims[2] == 1; }

  bool isotropic(double rel = 1e-12) const {
    double s = spacing[0];
    if (std::abs(spacing[1] - s) > rel * s) return false;
    if (!is_2d() && std::abs(spacing[2] - s) > rel * s) return false;
    return true;
  }

  std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * z);
  }

  Vec3 center(int x, int y, int z) const {
    return {origin[0] + spacing[0] * x, origin[1] + spacing[1] * y,
            origin[2] + spacing[2] * z};
  }

  bool operator==(const GridSpec& o) const {
    return dims == o.dims && spacing == o.spacing && origin == o.origin;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

  bool same_spacing(const GridSpec& o, double rel = 1e-12) const {
    for (int a = 0; a < 3; ++a)
      if (std::abs(spacing[a] - o.spacing[a]) > rel * spacing[a]) return false;
    return true;
  }

  /// Throws ParamError unless dims >= 1 and spacing > 0.
  void validate() const;
};

/// Dense real-valued field on a GridSpec. Binary masks are the {0,1}-valued
/// special case. Fields are treated as immutable values by all public
/// operations; results come back as new fields.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec, double fill = 0.0)
      : spec_(spec), values_(spec.cell_count(), fill) {
    spec_.validate();
  }
  ScalarField(GridSpec spec, std::vector<double> values);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(int x, int y, int z) const { return values_[spec_.index(x, y, z)]; }
  double& at(int x, int y, int z) { return values_[spec_.index(x, y, z)]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// Accessible / inaccessible / secluded decomposition of the design domain.
/// A and B partition the domain mask; Gamma = B minus the design.
struct RegionMasks {
  ScalarField accessible;    // A
  ScalarField inaccessible;  // B
  ScalarField secluded;      // Gamma
};

// -- basic field operations ------------------------------------------------

/// dv * sum of values (discrete Lebesgue measure).
double volume_integral(const ScalarField& f);

/// 1 where f > tau (strict), else 0. Requires 0 < tau < 1.
ScalarField threshold(const ScalarField& f, double tau);

/// clamp(rho + indicator, 0, 1); identity when the indicator is empty.
ScalarField implicit_union(const ScalarField& rho_omega, const ScalarField& indicator_f);

double field_min(const ScalarField& f);
double field_max(const ScalarField& f);
bool all_finite(const ScalarField& f);

/// Pointwise min of two fields on the same grid.
ScalarField field_min(const ScalarField& a, const ScalarField& b);

/// Copies f onto `target`, matching voxels by world position. Source and
/// target must share spacing and be offset by integer voxel counts;
/// voxels of `target` outside f are 0.
ScalarField resample_onto(const ScalarField& f, const GridSpec& target);

/// Trilinear (bilinear in 2D) interpolation of f at world point p; 0 outside
/// the support. Fractional coordinates within 1e-9 of a lattice point are
/// snapped so lattice-aligned queries reproduce stored values exactly.
double sample_trilinear(const ScalarField& f, const Vec3& p);

void require_same_grid(const ScalarField& a, const ScalarField& b, const char* op);

}  // namespace voxmill
