#pragma once

#include <functional>
#include <vector>

#include "voxmill/accessibility.hpp"
#include "voxmill/fea.hpp"
#include "voxmill/grid.hpp"
#include "voxmill/scene.hpp"

namespace voxmill {

struct TOConfig {
  double volume_fraction = 0.5;
  double w_acc = 0.0;          // accessibility filtering weight in [0, 1)
  bool adaptive_w_acc = false; // ramp 0.1 -> 0.5 while secluded volume exceeds tolerance
  double lambda = 0.01;        // IMF allowance
  double beta = 2.0;           // Heaviside sharpness (2D default; 8 for 3D)
  double tau = 0.5;            // density threshold
  double filter_radius = 0.0;  // cone filter radius (length units); 0 -> 1.5 voxels
  double move_limit = 0.2;
  double oc_damping = 0.5;
  double delta = -1.0;         // stop when dv * sum|xi_new - xi| < delta; <0 -> 1e-3 * vol(domain)
  int max_iter = 100;
  double secluded_tolerance = 0.01;  // fraction of vol(domain)
  int imf_stride = 1;                // recompute the IMF every k iterations

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double compliance = 0.0;
  double volume_fraction = 0.0;
  double secluded_fraction = -1.0;  // -1 when the IMF was not evaluated
  double w_acc = 0.0;
};

struct TOState {
  ScalarField xi;   // design variables
  ScalarField rho;  // Heaviside-projected density
  int iteration = 0;
  std::vector<IterationRecord> history;
  bool converged = false;
};

/// rho = 1 - exp(-beta xi) + xi exp(-beta); monotone in xi, maps 0->0, 1->1.
ScalarField heaviside_project(const ScalarField& xi, double beta);
double heaviside_project(double xi, double beta);

/// Normalized accessibility filter:
///   f_bar on the design (rho > tau), 1 on the secluded region, 0 elsewhere.
ScalarField build_access_filter(const AccessResult& imf, const ScalarField& rho, double tau);

/// S = (1 - w_acc) * s_phi_norm - w_acc * s_imf. Both inputs are "keep"
/// strengths: s_phi_norm in [-1, 0] (more negative = structurally more
/// valuable) and s_imf in [0, 1] (larger = less machinable), so the filter
/// enters with the compliance sign and inaccessible voxels are retained as
/// solid rather than carved into unreachable voids. w_acc = 0 returns
/// s_phi_norm bitwise. Requires 0 <= w_acc < 1.
ScalarField blend_sensitivity(const ScalarField& s_phi_norm, const ScalarField& s_imf,
                              double w_acc);

/// Linear cone smoothing with the given radius (length units), weights
/// renormalized at the boundary.
ScalarField cone_filter(const ScalarField& f, double radius);

/// Optimality-criteria step: smooths S with the cone filter, then
///   xi_new = clamp(xi * (-S/L)^damping, xi +- move_limit, [0, 1]),
/// with voxels where S >= 0 taking the downward move, and the multiplier L
/// bisected until the projected volume matches volume_fraction * vol(domain)
/// within 1e-4 relative. If the target lies outside what the move limits
/// allow this step, the nearest envelope is returned. `scene` supplies
/// frozen-region masks and the domain; null means the whole grid.
ScalarField oc_update(const ScalarField& xi, const ScalarField& S, const TOConfig& cfg,
                      const Scene* scene = nullptr);

/// Accessibility-constrained SIMP loop: project -> FEA -> sensitivity ->
/// IMF (when w_acc > 0) -> blend -> OC, until dv * sum|xi_new - xi| < delta
/// or max_iter. `on_iteration` (optional) observes each completed iteration.
TOState run_to(const Scene& scene, const std::vector<ToolAssembly>& tools,
               const LoadCase& load, const MaterialModel& model, const TOConfig& cfg,
               const std::function<void(const TOState&)>& on_iteration = {});

}  // namespace voxmill
