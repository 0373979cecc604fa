#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voxmill/grid.hpp"
#include "voxmill/scene.hpp"

namespace voxmill {

/// Cutting tool assembly T = H (holder) u K (cutter) on a local grid whose
/// world origin is the tool's reference point. Sharp points are cutter
/// boundary locations (offsets from that origin) that may touch a query
/// point; orientations are the rotations available for this tool.
struct ToolAssembly {
  ScalarField holder;
  ScalarField cutter;
  std::vector<Vec3> sharp_points;
  OrientationSet orientations;
  std::string name;

  /// Binary indicator of H u K.
  ScalarField assembly() const { return implicit_union(holder, cutter); }

  /// Enforces the type invariants (disjoint supports, nonempty assembly,
  /// sharp points on the cutter boundary, nonempty orientation set).
  void validate() const;
};

/// Cutter boundary voxels whose face neighbor lies outside H u K, in index
/// order, down-sampled by `stride`. Returned as world offsets (voxel
/// centers) from the tool's local origin.
std::vector<Vec3> default_sharp_points(const ScalarField& holder, const ScalarField& cutter,
                                       int stride = 1);

struct AccessResult {
  ScalarField imf;  // normalized, allowance-zeroed f_IMF in [0,1]
  RegionMasks masks;
  double secluded_volume = 0.0;
  std::optional<std::vector<ScalarField>> per_tool_imf;  // unnormalized
};

/// Inaccessibility measure field for one tool (volume units): at each design
/// voxel x, the least collision volume over all orientations R and sharp
/// points k of placing the tool so the sharp point touches x,
///   f(x) = min_{R,k} (rho_O * reflect(1_{RT}))(x - R k),
/// sampled trilinearly between lattice translations.
ScalarField imf_single_tool(const ScalarField& rho_O, const ToolAssembly& tool);

/// Pointwise minimum of imf_single_tool over all tools.
ScalarField imf_multi_tool(const ScalarField& rho_O, const std::vector<ToolAssembly>& tools,
                           std::vector<ScalarField>* per_tool = nullptr);

/// Normalizes f by its global max, applies the allowance lambda (values
/// <= lambda are zeroed), and decomposes the domain:
///   B = {f_bar > lambda},  A = domain - B,  Gamma = B & {rho_omega <= tau},
/// with fixture voxels excluded from Gamma. `domain` defaults to the whole
/// grid. Requires 0 <= lambda < 1 and 0 < tau < 1.
AccessResult normalize_and_classify(const ScalarField& f_imf, const ScalarField& rho_omega,
                                    double lambda, double tau,
                                    const ScalarField* domain = nullptr,
                                    const ScalarField* fixtures = nullptr);

/// Post-hoc manufacturability verdict for a finished (binary) design:
/// computes the multi-tool IMF of design u fixtures and classifies.
AccessResult access_check(const ScalarField& design, const Scene& scene,
                          const std::vector<ToolAssembly>& tools, double lambda = 0.01,
                          double tau = 0.5, bool keep_per_tool = false);

/// Workspace budget for concurrent convolution batches (CLI --mem-budget-mb).
void set_memory_budget_mb(int mb);
int memory_budget_mb();

}  // namespace voxmill
