#pragma once

#include <vector>

#include "voxmill/accessibility.hpp"
#include "voxmill/grid.hpp"
#include "voxmill/scene.hpp"

namespace voxmill {

struct PlanStep {
  int tool_index = 0;
  Orientation orientation;
  ScalarField removed;      // binary, subset of stock minus target
  double removed_volume = 0.0;
  ScalarField stock_after;  // binary
};

struct ProcessPlan {
  std::vector<PlanStep> steps;
  double residual_volume = 0.0;  // negative space no oriented tool can remove
};

/// Stock voxels outside the target that some collision-free placement of the
/// cutter covers at orientation R. Collisions are checked against the final
/// target union fixtures (removed stock is air and cannot collide).
/// `allowance` > 0 tolerates placements whose collision measure stays below
/// allowance * max(collision field) — the same relaxation the accessibility
/// classification applies — so plans agree with access_check verdicts;
/// 0 demands exactly collision-free placements. Fixture voxels are never
/// removable.
ScalarField removable_region(const ScalarField& stock, const ScalarField& target,
                             const ScalarField& fixtures, const ToolAssembly& tool,
                             const Orientation& R, double allowance = 0.0);

/// Greedy process planning: repeatedly apply the (tool, orientation) that
/// removes the largest volume of the remaining negative space. Ties break on
/// the lowest tool index, then the lowest orientation id; every emitted step
/// removes positive volume, so the loop terminates. A nonzero residual on an
/// accessibility-feasible design is reported, not raised.
ProcessPlan greedy_plan(const ScalarField& design, const Scene& scene,
                        const std::vector<ToolAssembly>& tools, double allowance = 0.0);

}  // namespace voxmill
