#pragma once

#include <array>
#include <memory>

#include "voxmill/grid.hpp"

namespace voxmill {

/// Grid that bounds the support of f rotated by R about the world origin
/// (same spacing, voxel centers on the same lattice).
GridSpec rotated_bounds(const GridSpec& spec, const Orientation& R);

/// Rotates f about the world origin and resamples onto the bounding grid by
/// inverse mapping with trilinear (bilinear in 2D) interpolation, zero
/// outside the support. Identity rotations return f unchanged. Requires
/// isotropic spacing; 2D fields additionally require a z-axis rotation.
ScalarField rotate_resample(const ScalarField& f, const Orientation& R);

/// Point reflection through the world origin: out(x) = in(-x). Involution.
ScalarField reflect(const ScalarField& f);

/// FFT workspace for linear convolutions of one stationary field with many
/// kernels of bounded size. The padded transform size satisfies
/// padded >= dims_a + max_kernel - 1 per axis (no circular wrap-around), so
/// one cached spectrum of the stationary field serves every kernel in the
/// batch. A plan may be shared across threads: convolve_with() keeps its
/// scratch local.
class ConvolutionPlan {
 public:
  ConvolutionPlan(const GridSpec& stationary, const std::array<int, 3>& max_kernel_dims);
  ~ConvolutionPlan();
  ConvolutionPlan(const ConvolutionPlan&) = delete;
  ConvolutionPlan& operator=(const ConvolutionPlan&) = delete;

  const std::array<int, 3>& padded_dims() const;

  /// Transforms and caches the stationary field; must match the GridSpec
  /// the plan was built for.
  void set_stationary(const ScalarField& a);

  /// Discrete linear convolution (a * b) scaled by dv, so that for binary
  /// fields the value at a lattice translation t is the overlap volume of
  /// the two supports. Output support = support(a) (+) support(b); values at
  /// translations with no overlap are exactly 0 (FFT noise below
  /// 1e-12 * max(dv, |out|_max) is snapped to zero).
  ScalarField convolve_with(const ScalarField& b) const;

  /// Per-call scratch footprint, for sizing concurrent batches.
  std::size_t workspace_bytes() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot linear convolution of two fields with equal spacing.
ScalarField convolve(const ScalarField& a, const ScalarField& b);

/// Raw translational C-obstacle field for obstacle density rho_O and the
/// full tool assembly indicator at orientation R:
///   g(t) = (rho_O * reflect(indicator(R T)))(t),
/// the collision measure for placing the tool at translation t. The strict
/// positive support of g is the C-obstacle slice D.
ScalarField cobstacle_slice(const ScalarField& rho_O, const ScalarField& tool,
                            const Orientation& R);

/// Binary sweep of the cutter over all collision-free translations:
///   sign((not 1_D) * 1_{RK}).
/// D_free must be the binary complement of the thresholded C-obstacle slice
/// on the digitized translation window. When `domain` is given the result is
/// clipped onto that grid (intersection with the design domain box).
ScalarField sweep_accessible(const ScalarField& D_free, const ScalarField& cutter,
                             const Orientation& R, const GridSpec* domain = nullptr);

/// 1 where f > 0, else 0 (the sign map for nonnegative fields).
ScalarField positive_support(const ScalarField& f);

}  // namespace voxmill
