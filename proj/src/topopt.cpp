#include "voxmill/topopt.hpp"

#include <algorithm>
#include <cmath>

namespace voxmill {

void TOConfig::validate() const {
  if (!(volume_fraction > 0.0 && volume_fraction < 1.0))
    throw ParamError("volume_fraction must be in (0, 1)");
  if (!(w_acc >= 0.0 && w_acc < 1.0)) throw ParamError("w_acc must be in [0, 1)");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ParamError("lambda must be in [0, 1)");
  if (!(beta > 0.0)) throw ParamError("beta must be > 0");
  if (!(tau > 0.0 && tau < 1.0)) throw ParamError("tau must be in (0, 1)");
  if (filter_radius < 0.0) throw ParamError("filter_radius must be >= 0");
  if (!(move_limit >= 0.0 && move_limit <= 1.0)) throw ParamError("move_limit must be in [0, 1]");
  if (!(oc_damping > 0.0 && oc_damping <= 1.0)) throw ParamError("oc_damping must be in (0, 1]");
  if (max_iter < 1) throw ParamError("max_iter must be >= 1");
  if (!(secluded_tolerance >= 0.0)) throw ParamError("secluded_tolerance must be >= 0");
  if (imf_stride < 1) throw ParamError("imf_stride must be >= 1");
}

double heaviside_project(double xi, double beta) {
  return 1.0 - std::exp(-beta * xi) + xi * std::exp(-beta);
}

ScalarField heaviside_project(const ScalarField& xi, double beta) {
  if (!(beta > 0.0)) throw ParamError("beta must be > 0");
  ScalarField rho(xi.spec());
  const double eb = std::exp(-beta);
  for (std::size_t i = 0; i < xi.size(); ++i)
    rho[i] = 1.0 - std::exp(-beta * xi[i]) + xi[i] * eb;
  return rho;
}

ScalarField build_access_filter(const AccessResult& imf, const ScalarField& rho, double tau) {
  require_same_grid(imf.imf, rho, "build_access_filter");
  ScalarField s(rho.spec());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i] > tau)
      s[i] = imf.imf[i];
    else if (imf.masks.secluded[i] > 0.0)
      s[i] = 1.0;
  }
  return s;
}

ScalarField blend_sensitivity(const ScalarField& s_phi_norm, const ScalarField& s_imf,
                              double w_acc) {
  if (!(w_acc >= 0.0 && w_acc < 1.0)) throw ParamError("w_acc must be in [0, 1)");
  if (w_acc == 0.0) return s_phi_norm;
  require_same_grid(s_phi_norm, s_imf, "blend_sensitivity");
  ScalarField s(s_phi_norm.spec());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = (1.0 - w_acc) * s_phi_norm[i] - w_acc * s_imf[i];
  return s;
}

ScalarField cone_filter(const ScalarField& f, double radius) {
  if (radius <= 0.0) return f;
  const GridSpec& g = f.spec();
  // Neighborhood offsets with cone weights w = radius - dist(centers).
  struct Tap {
    int dx, dy, dz;
    double w;
  };
  std::vector<Tap> taps;
  int rx = static_cast<int>(std::floor(radius / g.spacing[0]));
  int ry = static_cast<int>(std::floor(radius / g.spacing[1]));
  int rz = g.is_2d() ? 0 : static_cast<int>(std::floor(radius / g.spacing[2]));
  for (int dz = -rz; dz <= rz; ++dz)
    for (int dy = -ry; dy <= ry; ++dy)
      for (int dx = -rx; dx <= rx; ++dx) {
        double dist = std::sqrt(std::pow(dx * g.spacing[0], 2) + std::pow(dy * g.spacing[1], 2) +
                                std::pow(dz * g.spacing[2], 2));
        if (dist < radius) taps.push_back({dx, dy, dz, radius - dist});
      }

  ScalarField out(g);
  for (int z = 0; z < g.dims[2]; ++z)
    for (int y = 0; y < g.dims[1]; ++y)
      for (int x = 0; x < g.dims[0]; ++x) {
        double acc = 0.0, wsum = 0.0;
        for (const Tap& t : taps) {
          int nx = x + t.dx, ny = y + t.dy, nz = z + t.dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= g.dims[0] || ny >= g.dims[1] ||
              nz >= g.dims[2])
            continue;
          acc += t.w * f.at(nx, ny, nz);
          wsum += t.w;
        }
        out.at(x, y, z) = acc / wsum;
      }
  return out;
}

namespace {

enum class FreezeKind : char { kFree = 0, kSolid = 1, kVoid = 2 };

std::vector<FreezeKind> freeze_map(const GridSpec& g, const Scene* scene) {
  std::vector<FreezeKind> fr(g.cell_count(), FreezeKind::kFree);
  if (!scene) return fr;
  for (std::size_t i = 0; i < fr.size(); ++i) {
    if (scene->voids[i] > 0.0 || scene->domain[i] == 0.0)
      fr[i] = FreezeKind::kVoid;
    else if (scene->retained[i] > 0.0)
      fr[i] = FreezeKind::kSolid;
  }
  return fr;
}

void apply_freeze(ScalarField& xi, const std::vector<FreezeKind>& fr) {
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (fr[i] == FreezeKind::kSolid) xi[i] = 1.0;
    if (fr[i] == FreezeKind::kVoid) xi[i] = 0.0;
  }
}

}  // namespace

ScalarField oc_update(const ScalarField& xi, const ScalarField& S, const TOConfig& cfg,
                      const Scene* scene) {
  cfg.validate();
  require_same_grid(xi, S, "oc_update");
  if (!all_finite(S)) throw ParamError("oc_update: sensitivity field is not finite");
  const GridSpec& g = xi.spec();

  double radius = cfg.filter_radius > 0.0 ? cfg.filter_radius : 1.5 * g.spacing[0];
  ScalarField Sf = cone_filter(S, radius);
  std::vector<FreezeKind> fr = freeze_map(g, scene);

  double domain_volume =
      scene ? volume_integral(scene->domain) : g.dv() * static_cast<double>(g.cell_count());
  double target = cfg.volume_fraction * domain_volume;

  auto candidate = [&](double lam) {
    ScalarField out(g);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (fr[i] == FreezeKind::kSolid) {
        out[i] = 1.0;
        continue;
      }
      if (fr[i] == FreezeKind::kVoid) {
        out[i] = 0.0;
        continue;
      }
      double v;
      if (Sf[i] >= 0.0) {
        v = xi[i] - cfg.move_limit;  // no stiffness gain: move down
      } else {
        v = xi[i] * std::pow(-Sf[i] / lam, cfg.oc_damping);
        v = std::clamp(v, xi[i] - cfg.move_limit, xi[i] + cfg.move_limit);
      }
      out[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
  };
  auto envelope = [&](bool up) {
    ScalarField out(g);
    for (std::size_t i = 0; i < xi.size(); ++i) {
      if (fr[i] == FreezeKind::kSolid) {
        out[i] = 1.0;
        continue;
      }
      if (fr[i] == FreezeKind::kVoid) {
        out[i] = 0.0;
        continue;
      }
      double v = (up && Sf[i] < 0.0) ? xi[i] + cfg.move_limit : xi[i] - cfg.move_limit;
      out[i] = std::clamp(v, 0.0, 1.0);
    }
    return out;
  };
  auto projected_volume = [&](const ScalarField& x) {
    return volume_integral(heaviside_project(x, cfg.beta));
  };

  // The move envelope bounds what one step can reach; outside it, return the
  // nearest feasible update and let subsequent iterations close the gap.
  ScalarField up = envelope(true);
  if (projected_volume(up) <= target) return up;
  ScalarField down = envelope(false);
  if (projected_volume(down) >= target) return down;

  double lo = 0.0, hi = 1.0;
  while (projected_volume(candidate(hi)) > target) {
    hi *= 10.0;
    if (hi > 1e30) throw SolverError("OC bisection: failed to bracket the multiplier");
  }
  ScalarField best;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    best = candidate(mid);
    double vol = projected_volume(best);
    if (std::abs(vol - target) <= 1e-4 * target) return best;
    if (vol > target)
      lo = mid;
    else
      hi = mid;
  }
  throw SolverError("OC bisection did not converge in 100 iterations");
}

TOState run_to(const Scene& scene, const std::vector<ToolAssembly>& tools,
               const LoadCase& load, const MaterialModel& model, const TOConfig& cfg,
               const std::function<void(const TOState&)>& on_iteration) {
  cfg.validate();
  model.validate();
  const GridSpec& g = scene.grid;
  bool use_imf = cfg.w_acc > 0.0 || cfg.adaptive_w_acc;
  if (use_imf && tools.empty())
    throw ParamError("run_to: accessibility weighting requires at least one tool");

  double domain_volume = volume_integral(scene.domain);
  double delta = cfg.delta >= 0.0 ? cfg.delta : 1e-3 * domain_volume;

  TOState st;
  st.xi = ScalarField(g, cfg.volume_fraction);
  std::vector<FreezeKind> fr = freeze_map(g, &scene);
  apply_freeze(st.xi, fr);

  // Adaptive schedule: ramp 0.1 -> 0.5 over the first 40% of max_iter,
  // advancing only while the secluded volume exceeds its tolerance.
  int ramp_progress = 0;
  double ramp_span = std::max(1.0, 0.4 * cfg.max_iter);
  auto scheduled_w = [&]() {
    if (!cfg.adaptive_w_acc) return cfg.w_acc;
    double t = std::min(1.0, ramp_progress / ramp_span);
    return 0.1 + (0.5 - 0.1) * t;
  };

  ScalarField s_imf_cached;
  bool have_s_imf = false;
  double last_secluded_fraction = -1.0;

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    st.rho = heaviside_project(st.xi, cfg.beta);
    apply_freeze(st.rho, fr);

    FESolution sol = solve(st.rho, load, model);
    ScalarField s_phi = normalize_sensitivity(compliance_sensitivity(st.rho, sol, model));

    double w = scheduled_w();
    ScalarField S;
    if (use_imf) {
      if (!have_s_imf || iter % cfg.imf_stride == 0) {
        ScalarField rho_O = implicit_union(st.rho, scene.fixtures);
        ScalarField f = imf_multi_tool(rho_O, tools);
        AccessResult acc = normalize_and_classify(f, st.rho, cfg.lambda, cfg.tau,
                                                  &scene.domain, &scene.fixtures);
        last_secluded_fraction = acc.secluded_volume / domain_volume;
        s_imf_cached = build_access_filter(acc, st.rho, cfg.tau);
        have_s_imf = true;
      }
      if (cfg.adaptive_w_acc && last_secluded_fraction > cfg.secluded_tolerance)
        ++ramp_progress;
      S = blend_sensitivity(s_phi, s_imf_cached, w);
    } else {
      S = s_phi;
    }

    ScalarField xi_new = oc_update(st.xi, S, cfg, &scene);
    if (!all_finite(xi_new) || !std::isfinite(sol.compliance))
      throw SolverError("run_to: NaN at iteration " + std::to_string(iter));

    double change = 0.0;
    for (std::size_t i = 0; i < xi_new.size(); ++i) change += std::abs(xi_new[i] - st.xi[i]);
    change *= g.dv();

    st.xi = std::move(xi_new);
    st.iteration = iter + 1;
    IterationRecord rec;
    rec.iteration = iter + 1;
    rec.compliance = sol.compliance;
    rec.volume_fraction = volume_integral(st.rho) / domain_volume;
    rec.secluded_fraction = use_imf ? last_secluded_fraction : -1.0;
    rec.w_acc = w;
    st.history.push_back(rec);
    if (on_iteration) on_iteration(st);

    if (change < delta) {
      st.converged = true;
      break;
    }
  }
  st.rho = heaviside_project(st.xi, cfg.beta);
  apply_freeze(st.rho, fr);
  return st;
}

}  // namespace voxmill
