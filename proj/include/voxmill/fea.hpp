#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "voxmill/grid.hpp"

namespace voxmill {

/// Isotropic linear-elastic material with modified-SIMP interpolation:
/// element stiffness scale = E * (rho_min + (1 - rho_min) * rho^p).
struct MaterialModel {
  double youngs_modulus = 1.0;
  double poisson_ratio = 0.3;
  double simp_exponent = 3.0;
  double rho_min = 1e-3;

  void validate() const {
    if (!(youngs_modulus > 0.0)) throw ParamError("youngs_modulus must be > 0");
    if (!(poisson_ratio > -1.0 && poisson_ratio < 0.5))
      throw ParamError("poisson_ratio must be in (-1, 0.5)");
    if (!(simp_exponent >= 1.0)) throw ParamError("simp_exponent must be >= 1");
    if (!(rho_min > 0.0 && rho_min < 1.0)) throw ParamError("rho_min must be in (0, 1)");
  }
};

/// Boundary conditions on the nodal grid. Voxels are elements; the node grid
/// has dims+1 nodes per axis (one z layer of nodes in 2D). DOF ids are
/// node_id * ndim + axis with node_id = ix + nnx*(iy + nny*iz).
struct LoadCase {
  std::vector<std::size_t> fixed_dofs;
  std::vector<std::pair<std::size_t, double>> forces;
};

int grid_ndim(const GridSpec& grid);  // 2 when nz = 1, else 3
std::array<int, 3> node_grid_dims(const GridSpec& grid);
std::size_t node_count(const GridSpec& grid);
std::size_t dof_count(const GridSpec& grid);
std::size_t dof_index(const GridSpec& grid, int ix, int iy, int iz, int axis);

struct FESolution {
  std::vector<double> displacements;
  double compliance = 0.0;
  int cg_iterations = 0;
  double residual = 0.0;  // final relative residual
};

/// Canonical element stiffness for unit Young's modulus on this grid's voxel
/// (2x2(x2) Gauss quadrature; plane stress with unit thickness in 2D).
/// Row-major (8x8 in 2D, 24x24 in 3D).
std::vector<double> element_stiffness_matrix(const GridSpec& grid, const MaterialModel& model);

/// Matrix-free K(rho) * u with per-element SIMP scaling; no boundary
/// conditions applied. Parallel assembly is element-colored so the result is
/// bitwise independent of the worker count.
std::vector<double> apply_stiffness(const ScalarField& rho, const std::vector<double>& u,
                                    const MaterialModel& model);

/// Jacobi-preconditioned conjugate gradient on the free DOFs to relative
/// residual <= tol. max_iter = 0 picks a size-based default. Throws
/// SolverError (with the residual history) on non-convergence.
FESolution solve(const ScalarField& rho, const LoadCase& load, const MaterialModel& model,
                 double tol = 1e-6, int max_iter = 0);

/// Adjoint compliance sensitivity per element (self-adjoint objective):
///   S_e = -p * (1 - rho_min) * rho_e^(p-1) * E * u_e^T k0 u_e,
/// everywhere <= 0.
ScalarField compliance_sensitivity(const ScalarField& rho, const FESolution& sol,
                                   const MaterialModel& model);

/// S / max|S| (in [-1, 0] for compliance sensitivities); zero field when
/// max|S| = 0.
ScalarField normalize_sensitivity(const ScalarField& s);

}  // namespace voxmill
