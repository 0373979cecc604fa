#include "voxmill/fea.hpp"

#include <algorithm>
#include <cmath>

#include "voxmill/parallel.hpp"

namespace voxmill {

int grid_ndim(const GridSpec& grid) { return grid.is_2d() ? 2 : 3; }

std::array<int, 3> node_grid_dims(const GridSpec& grid) {
  return {grid.dims[0] + 1, grid.dims[1] + 1, grid.is_2d() ? 1 : grid.dims[2] + 1};
}

std::size_t node_count(const GridSpec& grid) {
  auto nd = node_grid_dims(grid);
  return static_cast<std::size_t>(nd[0]) * nd[1] * nd[2];
}

std::size_t dof_count(const GridSpec& grid) {
  return node_count(grid) * static_cast<std::size_t>(grid_ndim(grid));
}

std::size_t dof_index(const GridSpec& grid, int ix, int iy, int iz, int axis) {
  auto nd = node_grid_dims(grid);
  std::size_t nid = static_cast<std::size_t>(ix) +
                    static_cast<std::size_t>(nd[0]) *
                        (static_cast<std::size_t>(iy) + static_cast<std::size_t>(nd[1]) * iz);
  return nid * static_cast<std::size_t>(grid_ndim(grid)) + static_cast<std::size_t>(axis);
}

namespace {

// Local node order: (0,0),(1,0),(1,1),(0,1) in 2D; the same quad repeated at
// z=0 then z=1 in 3D.
constexpr int kQuadOffsets[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

std::vector<double> quad_k0(double hx, double hy, double nu) {
  // Plane stress, unit thickness, unit E.
  double c = 1.0 / (1.0 - nu * nu);
  double D[3][3] = {{c, c * nu, 0.0}, {c * nu, c, 0.0}, {0.0, 0.0, c * (1.0 - nu) / 2.0}};
  std::vector<double> K(8 * 8, 0.0);
  const double gp[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  double detJ = hx * hy / 4.0;
  for (double s : gp)
    for (double t : gp) {
      double dNds[4] = {-0.25 * (1 - t), 0.25 * (1 - t), 0.25 * (1 + t), -0.25 * (1 + t)};
      double dNdt[4] = {-0.25 * (1 - s), -0.25 * (1 + s), 0.25 * (1 + s), 0.25 * (1 - s)};
      double B[3][8] = {};
      for (int i = 0; i < 4; ++i) {
        double dNdx = dNds[i] * 2.0 / hx;
        double dNdy = dNdt[i] * 2.0 / hy;
        B[0][2 * i] = dNdx;
        B[1][2 * i + 1] = dNdy;
        B[2][2 * i] = dNdy;
        B[2][2 * i + 1] = dNdx;
      }
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
          double v = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) v += B[a][i] * D[a][b] * B[b][j];
          K[i * 8 + j] += v * detJ;
        }
    }
  return K;
}

std::vector<double> hex_k0(double hx, double hy, double hz, double nu) {
  double lam = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  double mu = 1.0 / (2.0 * (1.0 + nu));
  double D[6][6] = {};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) D[a][b] = a == b ? lam + 2.0 * mu : lam;
  for (int a = 3; a < 6; ++a) D[a][a] = mu;

  std::vector<double> K(24 * 24, 0.0);
  const double gp[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  double detJ = hx * hy * hz / 8.0;
  for (double s : gp)
    for (double t : gp)
      for (double r : gp) {
        double N_s[8], N_t[8], N_r[8];
        for (int i = 0; i < 8; ++i) {
          double xs = kQuadOffsets[i % 4][0] ? 1.0 : -1.0;
          double yt = kQuadOffsets[i % 4][1] ? 1.0 : -1.0;
          double zr = i < 4 ? -1.0 : 1.0;
          N_s[i] = 0.125 * xs * (1 + yt * t) * (1 + zr * r);
          N_t[i] = 0.125 * yt * (1 + xs * s) * (1 + zr * r);
          N_r[i] = 0.125 * zr * (1 + xs * s) * (1 + yt * t);
        }
        double B[6][24] = {};
        for (int i = 0; i < 8; ++i) {
          double dNdx = N_s[i] * 2.0 / hx;
          double dNdy = N_t[i] * 2.0 / hy;
          double dNdz = N_r[i] * 2.0 / hz;
          B[0][3 * i] = dNdx;
          B[1][3 * i + 1] = dNdy;
          B[2][3 * i + 2] = dNdz;
          B[3][3 * i + 1] = dNdz;  // yz
          B[3][3 * i + 2] = dNdy;
          B[4][3 * i] = dNdz;  // xz
          B[4][3 * i + 2] = dNdx;
          B[5][3 * i] = dNdy;  // xy
          B[5][3 * i + 1] = dNdx;
        }
        for (int i = 0; i < 24; ++i)
          for (int j = 0; j < 24; ++j) {
            double v = 0.0;
            for (int a = 0; a < 6; ++a)
              for (int b = 0; b < 6; ++b) v += B[a][i] * D[a][b] * B[b][j];
            K[i * 24 + j] += v * detJ;
          }
      }
  return K;
}

struct ElementContext {
  GridSpec grid;
  int ndim = 2;
  int nodes_per_element = 4;
  int edof = 8;
  std::vector<double> k0;  // unit-E element stiffness

  std::size_t element_count() const { return grid.cell_count(); }

  // Global DOF ids of element (ex, ey, ez), in local node order.
  void element_dofs(int ex, int ey, int ez, std::size_t* dofs) const {
    int n = 0;
    int zmax = ndim == 3 ? 1 : 0;
    for (int dz = 0; dz <= zmax; ++dz)
      for (int l = 0; l < 4; ++l) {
        int ix = ex + kQuadOffsets[l][0];
        int iy = ey + kQuadOffsets[l][1];
        int iz = ez + dz;
        for (int a = 0; a < ndim; ++a) dofs[n * ndim + a] = dof_index(grid, ix, iy, iz, a);
        ++n;
      }
  }
};

ElementContext make_context(const GridSpec& grid, const MaterialModel& model) {
  model.validate();
  ElementContext ctx;
  ctx.grid = grid;
  ctx.ndim = grid_ndim(grid);
  ctx.nodes_per_element = ctx.ndim == 2 ? 4 : 8;
  ctx.edof = ctx.nodes_per_element * ctx.ndim;
  ctx.k0 = ctx.ndim == 2 ? quad_k0(grid.spacing[0], grid.spacing[1], model.poisson_ratio)
                         : hex_k0(grid.spacing[0], grid.spacing[1], grid.spacing[2],
                                  model.poisson_ratio);
  return ctx;
}

double simp_scale(double rho, const MaterialModel& m) {
  return m.youngs_modulus * (m.rho_min + (1.0 - m.rho_min) * std::pow(rho, m.simp_exponent));
}

// Runs fn over all elements, partitioned into 2^ndim parity colors; elements
// of one color share no nodes, so scatter writes are race-free and the
// per-node accumulation order is fixed regardless of worker count.
void for_each_element_colored(const ElementContext& ctx,
                              const std::function<void(int, int, int)>& fn) {
  const auto& d = ctx.grid.dims;
  int zcolors = ctx.ndim == 3 ? 2 : 1;
  for (int cz = 0; cz < zcolors; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx) {
        int nx = (d[0] - cx + 1) / 2;
        int ny = (d[1] - cy + 1) / 2;
        int nz = (d[2] - cz + zcolors - 1) / zcolors;
        std::int64_t count = static_cast<std::int64_t>(nx) * ny * nz;
        if (count <= 0) continue;
        parallel_for(count, [&](std::int64_t b, std::int64_t e) {
          for (std::int64_t i = b; i < e; ++i) {
            int ex = cx + 2 * static_cast<int>(i % nx);
            int ey = cy + 2 * static_cast<int>((i / nx) % ny);
            int ez = cz + zcolors * static_cast<int>(i / (static_cast<std::int64_t>(nx) * ny));
            fn(ex, ey, ez);
          }
        });
      }
}

}  // namespace

std::vector<double> element_stiffness_matrix(const GridSpec& grid, const MaterialModel& model) {
  return make_context(grid, model).k0;
}

std::vector<double> apply_stiffness(const ScalarField& rho, const std::vector<double>& u,
                                    const MaterialModel& model) {
  ElementContext ctx = make_context(rho.spec(), model);
  if (u.size() != dof_count(rho.spec()))
    throw ShapeError("apply_stiffness: displacement vector length mismatch");

  std::vector<double> y(u.size(), 0.0);
  const int edof = ctx.edof;
  for_each_element_colored(ctx, [&](int ex, int ey, int ez) {
    std::size_t dofs[24];
    double ue[24], ye[24];
    ctx.element_dofs(ex, ey, ez, dofs);
    for (int i = 0; i < edof; ++i) ue[i] = u[dofs[i]];
    double scale = simp_scale(rho.at(ex, ey, ez), model);
    for (int i = 0; i < edof; ++i) {
      double v = 0.0;
      const double* row = &ctx.k0[static_cast<std::size_t>(i) * edof];
      for (int j = 0; j < edof; ++j) v += row[j] * ue[j];
      ye[i] = v * scale;
    }
    for (int i = 0; i < edof; ++i) y[dofs[i]] += ye[i];
  });
  return y;
}

namespace {

std::vector<double> stiffness_diagonal(const ElementContext& ctx, const ScalarField& rho,
                                       const MaterialModel& model) {
  std::vector<double> diag(dof_count(ctx.grid), 0.0);
  const int edof = ctx.edof;
  for_each_element_colored(ctx, [&](int ex, int ey, int ez) {
    std::size_t dofs[24];
    ctx.element_dofs(ex, ey, ez, dofs);
    double scale = simp_scale(rho.at(ex, ey, ez), model);
    for (int i = 0; i < edof; ++i)
      diag[dofs[i]] += scale * ctx.k0[static_cast<std::size_t>(i) * edof + i];
  });
  return diag;
}

}  // namespace

FESolution solve(const ScalarField& rho, const LoadCase& load, const MaterialModel& model,
                 double tol, int max_iter) {
  const GridSpec& grid = rho.spec();
  std::size_t n = dof_count(grid);
  if (load.fixed_dofs.empty()) throw ParamError("load case has no fixed DOFs");

  std::vector<char> fixed(n, 0);
  for (std::size_t d : load.fixed_dofs) {
    if (d >= n) throw ParamError("fixed DOF id out of range");
    fixed[d] = 1;
  }
  std::vector<double> f(n, 0.0);
  bool any_force = false;
  for (const auto& [d, v] : load.forces) {
    if (d >= n) throw ParamError("force DOF id out of range");
    if (fixed[d]) continue;  // forces on fixed DOFs do no work
    f[d] += v;
    any_force = any_force || v != 0.0;
  }
  if (!any_force) {
    FESolution zero;
    zero.displacements.assign(n, 0.0);
    return zero;
  }
  if (max_iter <= 0) max_iter = std::max<std::size_t>(1000, 4 * n);

  ElementContext ctx = make_context(grid, model);
  std::vector<double> diag = stiffness_diagonal(ctx, rho, model);
  for (std::size_t i = 0; i < n; ++i)
    if (fixed[i] || diag[i] <= 0.0) diag[i] = 1.0;

  auto project = [&](std::vector<double>& v) {
    for (std::size_t i = 0; i < n; ++i)
      if (fixed[i]) v[i] = 0.0;
  };

  double fnorm = 0.0;
  for (double v : f) fnorm += v * v;
  fnorm = std::sqrt(fnorm);

  std::vector<double> x(n, 0.0), r = f, z(n), p(n);
  project(r);
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = 0.0;
  for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

  std::vector<double> history;
  double rel = 1.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::vector<double> q = apply_stiffness(rho, p, model);
    project(q);
    double pq = 0.0;
    for (std::size_t i = 0; i < n; ++i) pq += p[i] * q[i];
    if (pq <= 0.0) throw SolverError("CG breakdown: non-positive curvature", history);
    double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rel = std::sqrt(rnorm) / fnorm;
    history.push_back(rel);
    if (rel <= tol) {
      ++it;
      break;
    }
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = r[i] / diag[i];
      rz_new += r[i] * z[i];
    }
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (rel > tol)
    throw SolverError("CG did not converge in " + std::to_string(max_iter) + " iterations",
                      history);

  FESolution sol;
  sol.cg_iterations = it;
  sol.residual = rel;
  sol.compliance = 0.0;
  for (std::size_t i = 0; i < n; ++i) sol.compliance += f[i] * x[i];
  sol.displacements = std::move(x);
  return sol;
}

ScalarField compliance_sensitivity(const ScalarField& rho, const FESolution& sol,
                                   const MaterialModel& model) {
  ElementContext ctx = make_context(rho.spec(), model);
  if (sol.displacements.size() != dof_count(rho.spec()))
    throw ShapeError("compliance_sensitivity: displacement vector length mismatch");

  const int edof = ctx.edof;
  ScalarField s(rho.spec());
  for_each_element_colored(ctx, [&](int ex, int ey, int ez) {
    std::size_t dofs[24];
    double ue[24];
    ctx.element_dofs(ex, ey, ez, dofs);
    for (int i = 0; i < edof; ++i) ue[i] = sol.displacements[dofs[i]];
    double uku = 0.0;
    for (int i = 0; i < edof; ++i) {
      const double* row = &ctx.k0[static_cast<std::size_t>(i) * edof];
      double v = 0.0;
      for (int j = 0; j < edof; ++j) v += row[j] * ue[j];
      uku += ue[i] * v;
    }
    double r = rho.at(ex, ey, ez);
    double dscale = model.youngs_modulus * (1.0 - model.rho_min) * model.simp_exponent *
                    std::pow(r, model.simp_exponent - 1.0);
    s.at(ex, ey, ez) = -dscale * uku;
  });
  return s;
}

ScalarField normalize_sensitivity(const ScalarField& s) {
  double m = 0.0;
  for (double v : s.values()) m = std::max(m, std::abs(v));
  ScalarField out(s.spec());
  if (m == 0.0) return out;
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] / m;
  return out;
}

}  // namespace voxmill
