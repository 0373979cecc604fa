#include "voxmill/accessibility.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

#include "voxmill/morphology.hpp"
#include "voxmill/parallel.hpp"

namespace voxmill {

namespace {
std::atomic<int> g_mem_budget_mb{2048};

bool is_binary(const ScalarField& f) {
  for (double v : f.values())
    if (v != 0.0 && v != 1.0) return false;
  return true;
}

// Maps a world offset to lattice indices of the tool grid, or returns false.
bool to_voxel(const GridSpec& g, const Vec3& p, int idx[3]) {
  double c[3] = {p.x, p.y, p.z};
  for (int a = 0; a < 3; ++a) {
    double f = (c[a] - g.origin[a]) / g.spacing[a];
    double r = std::round(f);
    if (std::abs(f - r) > 1e-6) return false;
    if (r < 0 || r >= g.dims[a]) return false;
    idx[a] = static_cast<int>(r);
  }
  return true;
}

bool has_non_cutter_face_neighbor(const ScalarField& cutter, int x, int y, int z) {
  const auto& d = cutter.spec().dims;
  const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (const auto& o : off) {
    int nx = x + o[0], ny = y + o[1], nz = z + o[2];
    if (nx < 0 || ny < 0 || nz < 0 || nx >= d[0] || ny >= d[1] || nz >= d[2]) return true;
    if (cutter.at(nx, ny, nz) == 0.0) return true;
  }
  return false;
}

}  // namespace

void set_memory_budget_mb(int mb) { g_mem_budget_mb.store(mb < 1 ? 1 : mb); }
int memory_budget_mb() { return g_mem_budget_mb.load(); }

void ToolAssembly::validate() const {
  require_same_grid(holder, cutter, "ToolAssembly");
  if (!is_binary(holder) || !is_binary(cutter))
    throw ParamError("tool holder/cutter fields must be binary");
  bool any = false;
  for (std::size_t i = 0; i < holder.size(); ++i) {
    if (holder[i] > 0.0 && cutter[i] > 0.0)
      throw ParamError("tool holder and cutter supports must be disjoint");
    any = any || holder[i] > 0.0 || cutter[i] > 0.0;
  }
  if (!any) throw ParamError("tool assembly is empty");
  if (sharp_points.empty()) throw ParamError("tool has no sharp points");
  if (orientations.empty()) throw ParamError("tool has no orientations");
  for (const Vec3& k : sharp_points) {
    int idx[3];
    if (!to_voxel(cutter.spec(), k, idx))
      throw ParamError("sharp point is not on the cutter lattice");
    if (cutter.at(idx[0], idx[1], idx[2]) == 0.0)
      throw ParamError("sharp point is not a cutter voxel");
    if (!has_non_cutter_face_neighbor(cutter, idx[0], idx[1], idx[2]))
      throw ParamError("sharp point is interior to the cutter");
  }
}

std::vector<Vec3> default_sharp_points(const ScalarField& holder, const ScalarField& cutter,
                                       int stride) {
  require_same_grid(holder, cutter, "default_sharp_points");
  if (stride < 1) throw ParamError("sharp point stride must be >= 1");
  const GridSpec& g = cutter.spec();
  const auto& d = g.dims;
  const int off[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<Vec3> pts;
  std::size_t seen = 0;
  for (int z = 0; z < d[2]; ++z)
    for (int y = 0; y < d[1]; ++y)
      for (int x = 0; x < d[0]; ++x) {
        if (cutter.at(x, y, z) == 0.0) continue;
        bool boundary = false;
        for (const auto& o : off) {
          int nx = x + o[0], ny = y + o[1], nz = z + o[2];
          if (nx < 0 || ny < 0 || nz < 0 || nx >= d[0] || ny >= d[1] || nz >= d[2]) {
            boundary = true;
            break;
          }
          if (cutter.at(nx, ny, nz) == 0.0 && holder.at(nx, ny, nz) == 0.0) {
            boundary = true;
            break;
          }
        }
        if (!boundary) continue;
        if (seen++ % static_cast<std::size_t>(stride) == 0) pts.push_back(g.center(x, y, z));
      }
  return pts;
}

namespace {

// Per-orientation IMF pass: min over sharp points of the convolution field
// sampled at t = x - R k for every design voxel x.
void min_over_sharp_points(const ScalarField& g, const GridSpec& design,
                           const Orientation& R, const std::vector<Vec3>& sharp_points,
                           ScalarField& gamma) {
  std::vector<Vec3> shifts(sharp_points.size());
  for (std::size_t i = 0; i < sharp_points.size(); ++i) shifts[i] = R.apply(sharp_points[i]);
  const int nx = design.dims[0], ny = design.dims[1];
  parallel_for(design.cell_count(), [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      int x = static_cast<int>(i % nx);
      int y = static_cast<int>((i / nx) % ny);
      int z = static_cast<int>(i / (static_cast<std::int64_t>(nx) * ny));
      Vec3 c = design.center(x, y, z);
      double best = gamma[static_cast<std::size_t>(i)];
      for (const Vec3& rk : shifts) {
        double v = sample_trilinear(g, c - rk);
        if (v < best) best = v;
      }
      gamma[static_cast<std::size_t>(i)] = best;
    }
  });
}

}  // namespace

ScalarField imf_single_tool(const ScalarField& rho_O, const ToolAssembly& tool) {
  tool.validate();
  if (!rho_O.spec().same_spacing(tool.cutter.spec()))
    throw ShapeError("imf_single_tool: tool and design grids must share spacing");

  ScalarField assembly = tool.assembly();

  // One padded transform size serves every orientation, so the spectrum of
  // rho_O is computed once per call.
  std::array<int, 3> max_kernel{1, 1, 1};
  for (const Orientation& R : tool.orientations) {
    GridSpec b = rotated_bounds(assembly.spec(), R);
    for (int a = 0; a < 3; ++a) max_kernel[a] = std::max(max_kernel[a], b.dims[a]);
  }
  ConvolutionPlan plan(rho_O.spec(), max_kernel);
  plan.set_stationary(rho_O);

  ScalarField gamma(rho_O.spec(), std::numeric_limits<double>::infinity());
  std::mutex merge_mu;

  // Orientation batches are capped by the workspace memory budget
  // (excess work is serialized).
  std::size_t per_task = plan.workspace_bytes() + rho_O.size() * sizeof(double) * 2;
  std::size_t budget = static_cast<std::size_t>(memory_budget_mb()) * 1024 * 1024;
  int workers = static_cast<int>(std::max<std::size_t>(1, budget / std::max<std::size_t>(per_task, 1)));
  workers = std::min(workers, thread_count());

  int n_orient = static_cast<int>(tool.orientations.size());
  parallel_tasks(n_orient, workers, [&](int oi) {
    const Orientation& R = tool.orientations[static_cast<std::size_t>(oi)];
    ScalarField oriented =
        R.is_identity() ? assembly : threshold(rotate_resample(assembly, R), 0.5);
    ScalarField g = plan.convolve_with(reflect(oriented));
    ScalarField local(rho_O.spec(), std::numeric_limits<double>::infinity());
    min_over_sharp_points(g, rho_O.spec(), R, tool.sharp_points, local);
    std::lock_guard<std::mutex> lk(merge_mu);
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (local[i] < gamma[i]) gamma[i] = local[i];
  });
  return gamma;
}

ScalarField imf_multi_tool(const ScalarField& rho_O, const std::vector<ToolAssembly>& tools,
                           std::vector<ScalarField>* per_tool) {
  if (tools.empty()) throw ParamError("imf_multi_tool: tool list is empty");
  if (per_tool) per_tool->clear();
  ScalarField result;
  for (std::size_t i = 0; i < tools.size(); ++i) {
    ScalarField f = imf_single_tool(rho_O, tools[i]);
    if (per_tool) per_tool->push_back(f);
    result = i == 0 ? std::move(f) : field_min(result, f);
  }
  return result;
}

AccessResult normalize_and_classify(const ScalarField& f_imf, const ScalarField& rho_omega,
                                    double lambda, double tau, const ScalarField* domain,
                                    const ScalarField* fixtures) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ParamError("allowance lambda must be in [0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ParamError("threshold tau must be in (0, 1)");
  require_same_grid(f_imf, rho_omega, "normalize_and_classify");
  if (domain) require_same_grid(f_imf, *domain, "normalize_and_classify");
  if (fixtures) require_same_grid(f_imf, *fixtures, "normalize_and_classify");

  const GridSpec& g = f_imf.spec();
  double max_f = field_max(f_imf);

  AccessResult res;
  res.imf = ScalarField(g);
  res.masks.accessible = ScalarField(g);
  res.masks.inaccessible = ScalarField(g);
  res.masks.secluded = ScalarField(g);

  for (std::size_t i = 0; i < f_imf.size(); ++i) {
    double fbar = max_f > 0.0 ? f_imf[i] / max_f : 0.0;
    bool in_domain = domain ? (*domain)[i] > 0.0 : true;
    bool inaccessible = fbar > lambda;
    res.imf[i] = inaccessible ? fbar : 0.0;  // allowance
    if (!in_domain) continue;
    res.masks.inaccessible[i] = inaccessible ? 1.0 : 0.0;
    res.masks.accessible[i] = inaccessible ? 0.0 : 1.0;
    bool in_design = rho_omega[i] > tau;
    bool in_fixture = fixtures ? (*fixtures)[i] > 0.0 : false;
    res.masks.secluded[i] = (inaccessible && !in_design && !in_fixture) ? 1.0 : 0.0;
  }
  res.secluded_volume = volume_integral(res.masks.secluded);
  return res;
}

AccessResult access_check(const ScalarField& design, const Scene& scene,
                          const std::vector<ToolAssembly>& tools, double lambda, double tau,
                          bool keep_per_tool) {
  if (!is_binary(design)) throw ParamError("access_check: design must be a binary field");
  require_same_grid(design, scene.fixtures, "access_check");
  ScalarField rho_O = implicit_union(design, scene.fixtures);
  std::vector<ScalarField> per_tool;
  ScalarField f = imf_multi_tool(rho_O, tools, keep_per_tool ? &per_tool : nullptr);
  AccessResult res =
      normalize_and_classify(f, design, lambda, tau, &scene.domain, &scene.fixtures);
  if (keep_per_tool) res.per_tool_imf = std::move(per_tool);
  return res;
}

}  // namespace voxmill
