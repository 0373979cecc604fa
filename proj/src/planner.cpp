#include "voxmill/planner.hpp"

#include <cmath>

#include "voxmill/morphology.hpp"
#include "voxmill/parallel.hpp"

namespace voxmill {

namespace {

// Translation window: all t for which the oriented cutter can touch the
// design grid, i.e. the box grid (+) support(-RK).
GridSpec translation_window(const GridSpec& grid, const GridSpec& cutter_bounds) {
  GridSpec refl = cutter_bounds;
  for (int a = 0; a < 3; ++a)
    refl.origin[a] = -(cutter_bounds.origin[a] + (cutter_bounds.dims[a] - 1) * cutter_bounds.spacing[a]);
  GridSpec w;
  w.spacing = grid.spacing;
  for (int a = 0; a < 3; ++a) {
    w.dims[a] = grid.dims[a] + cutter_bounds.dims[a] - 1;
    w.origin[a] = grid.origin[a] + refl.origin[a];
  }
  return w;
}

ScalarField oriented_indicator(const ScalarField& f, const Orientation& R) {
  return R.is_identity() ? f : threshold(rotate_resample(f, R), 0.5);
}

// Cutter sweep over tolerated translations, on the design grid. Placements
// whose collision measure is at most allowance * max(g) count as free.
ScalarField accessible_sweep(const ScalarField& obstacles, const ToolAssembly& tool,
                             const Orientation& R, double allowance) {
  const GridSpec& grid = obstacles.spec();
  ScalarField assembly = oriented_indicator(tool.assembly(), R);
  ScalarField rotated_cutter = oriented_indicator(tool.cutter, R);

  ScalarField g = convolve(obstacles, reflect(assembly));
  double cutoff = allowance > 0.0 ? allowance * field_max(g) : 0.0;
  ScalarField d_obstacle(g.spec());
  for (std::size_t i = 0; i < g.size(); ++i) d_obstacle[i] = g[i] > cutoff ? 1.0 : 0.0;

  GridSpec window = translation_window(grid, rotated_cutter.spec());
  ScalarField d_clipped = resample_onto(d_obstacle, window);
  ScalarField d_free(window);
  for (std::size_t i = 0; i < d_free.size(); ++i) d_free[i] = 1.0 - d_clipped[i];

  // sweep_accessible applies R to the cutter itself
  return sweep_accessible(d_free, tool.cutter, R, &grid);
}

}  // namespace

ScalarField removable_region(const ScalarField& stock, const ScalarField& target,
                             const ScalarField& fixtures, const ToolAssembly& tool,
                             const Orientation& R, double allowance) {
  require_same_grid(stock, target, "removable_region");
  require_same_grid(stock, fixtures, "removable_region");
  if (!(allowance >= 0.0 && allowance < 1.0))
    throw ParamError("removable_region: allowance must be in [0, 1)");
  for (std::size_t i = 0; i < target.size(); ++i)
    if (target[i] > stock[i]) throw ParamError("removable_region: target must lie in stock");

  ScalarField obstacles = implicit_union(target, fixtures);
  ScalarField sweep = accessible_sweep(obstacles, tool, R, allowance);
  ScalarField out(stock.spec());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (sweep[i] > 0.0 && stock[i] > 0.0 && target[i] == 0.0 && fixtures[i] == 0.0)
                 ? 1.0
                 : 0.0;
  return out;
}

ProcessPlan greedy_plan(const ScalarField& design, const Scene& scene,
                        const std::vector<ToolAssembly>& tools, double allowance) {
  require_same_grid(design, scene.domain, "greedy_plan");
  if (!(allowance >= 0.0 && allowance < 1.0))
    throw ParamError("greedy_plan: allowance must be in [0, 1)");
  for (std::size_t i = 0; i < design.size(); ++i)
    if (design[i] > scene.domain[i])
      throw ParamError("greedy_plan: design must lie inside the design domain");

  struct Candidate {
    int tool_index;
    Orientation orientation;
    ScalarField sweep;  // removable mask against the final target, stock-independent
  };
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < tools.size(); ++t)
    for (const Orientation& R : tools[t].orientations)
      candidates.push_back({static_cast<int>(t), R, ScalarField()});

  ScalarField obstacles = implicit_union(design, scene.fixtures);
  parallel_tasks(static_cast<int>(candidates.size()), thread_count(), [&](int i) {
    Candidate& c = candidates[static_cast<std::size_t>(i)];
    c.sweep = accessible_sweep(obstacles, tools[static_cast<std::size_t>(c.tool_index)],
                               c.orientation, allowance);
  });

  ProcessPlan plan;
  ScalarField stock = scene.domain;
  const double dv = design.spec().dv();
  for (;;) {
    // Largest removable volume this round; ties break on tool, then
    // orientation id, which the candidate order already encodes.
    int best = -1;
    long long best_count = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      long long count = 0;
      const ScalarField& sweep = candidates[c].sweep;
      for (std::size_t i = 0; i < stock.size(); ++i)
        if (sweep[i] > 0.0 && stock[i] > 0.0 && design[i] == 0.0 &&
            scene.fixtures[i] == 0.0)
          ++count;
      if (count > best_count) {
        best_count = count;
        best = static_cast<int>(c);
      }
    }
    if (best < 0 || best_count == 0) break;

    const Candidate& c = candidates[static_cast<std::size_t>(best)];
    PlanStep step;
    step.tool_index = c.tool_index;
    step.orientation = c.orientation;
    step.removed = ScalarField(stock.spec());
    for (std::size_t i = 0; i < stock.size(); ++i)
      if (c.sweep[i] > 0.0 && stock[i] > 0.0 && design[i] == 0.0 &&
          scene.fixtures[i] == 0.0) {
        step.removed[i] = 1.0;
        stock[i] = 0.0;
      }
    step.removed_volume = dv * static_cast<double>(best_count);
    step.stock_after = stock;
    plan.steps.push_back(std::move(step));
  }

  // Fixture voxels stay in the stock by definition; they are clamps, not
  // negative space, so they do not count toward the residual.
  double residual = 0.0;
  for (std::size_t i = 0; i < stock.size(); ++i)
    if (stock[i] > 0.0 && design[i] == 0.0 && scene.fixtures[i] == 0.0) residual += 1.0;
  plan.residual_volume = residual * dv;
  return plan;
}

}  // namespace voxmill
