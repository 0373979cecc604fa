#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "voxmill/accessibility.hpp"
#include "voxmill/config.hpp"
#include "voxmill/field_io.hpp"
#include "voxmill/parallel.hpp"
#include "voxmill/planner.hpp"
#include "voxmill/topopt.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace voxmill;

int log_level() {
  static int level = [] {
    const char* env = std::getenv("MT_LOG");
    if (!env) return 1;
    std::string s(env);
    if (s == "error") return 0;
    if (s == "warn") return 1;
    if (s == "info") return 2;
    if (s == "debug") return 3;
    return 1;
  }();
  return level;
}

void log_at(int level, const std::string& msg) {
  if (log_level() >= level) std::cerr << "mt: " << msg << "\n";
}
void log_warn(const std::string& m) { log_at(1, m); }
void log_info(const std::string& m) { log_at(2, m); }

struct CommonOpts {
  std::string out_dir = ".";
  int threads = 0;
  int mem_budget_mb = 2048;
  bool dump_intermediate = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--out-dir", o.out_dir, "Directory for output files");
  cmd->add_option("--threads", o.threads, "Worker thread cap (0 = hardware)");
  cmd->add_option("--mem-budget-mb", o.mem_budget_mb,
                  "Workspace budget for concurrent convolutions");
  cmd->add_flag("--dump-intermediate", o.dump_intermediate,
                "Also export fields as legacy VTK for inspection");
}

void apply_common(const CommonOpts& o) {
  set_thread_count(o.threads);
  set_memory_budget_mb(o.mem_budget_mb);
  fs::create_directories(o.out_dir);
}

fs::path out_path(const CommonOpts& o, const std::string& name) {
  return fs::path(o.out_dir) / name;
}

ScalarField load_design(const std::string& path, const SceneConfig& cfg) {
  ScalarField design = read_field(path, &cfg.scene.grid);
  for (double v : design.values())
    if (v != 0.0 && v != 1.0) {
      log_info("design field is not binary; thresholding at tau");
      return threshold(design, cfg.to.tau);
    }
  return design;
}

json orientation_json(const Orientation& R, bool planar) {
  json o;
  auto q = R.quat();
  o["quat"] = {q[0], q[1], q[2], q[3]};
  if (planar) o["angle_deg"] = R.angle_2d() * 180.0 / M_PI;
  o["id"] = R.id();
  return o;
}

int cmd_analyze(const std::string& config_path, const std::string& design_path,
                const CommonOpts& opts) {
  SceneConfig cfg = load_config(config_path);
  if (cfg.tools.empty())
    throw ConfigError(ConfigErrorKind::invariant, "tools", "analyze requires at least one tool");
  apply_common(opts);
  ScalarField design = load_design(design_path, cfg);

  AccessResult res =
      access_check(design, cfg.scene, cfg.tools, cfg.to.lambda, cfg.to.tau, true);

  write_field(res.imf, out_path(opts, "imf.voxfield").string());
  write_field(res.masks.accessible, out_path(opts, "mask_accessible.voxfield").string(), "u8");
  write_field(res.masks.inaccessible, out_path(opts, "mask_inaccessible.voxfield").string(),
              "u8");
  write_field(res.masks.secluded, out_path(opts, "mask_secluded.voxfield").string(), "u8");
  if (opts.dump_intermediate) {
    write_vtk(res.imf, out_path(opts, "imf.vtk").string(), "imf");
    write_vtk(res.masks.secluded, out_path(opts, "mask_secluded.vtk").string(), "secluded");
    if (res.per_tool_imf)
      for (std::size_t t = 0; t < res.per_tool_imf->size(); ++t) {
        char name[64];
        std::snprintf(name, sizeof name, "imf_tool_%02zu.voxfield", t);
        write_field((*res.per_tool_imf)[t], out_path(opts, name).string());
      }
  }

  double domain_volume = volume_integral(cfg.scene.domain);
  double fraction = res.secluded_volume / domain_volume;

  json per_tool = json::array();
  if (res.per_tool_imf) {
    for (std::size_t t = 0; t < res.per_tool_imf->size(); ++t) {
      AccessResult one =
          normalize_and_classify((*res.per_tool_imf)[t], design, cfg.to.lambda, cfg.to.tau,
                                 &cfg.scene.domain, &cfg.scene.fixtures);
      per_tool.push_back({{"tool", cfg.tools[t].name},
                          {"secluded_volume", one.secluded_volume},
                          {"secluded_fraction", one.secluded_volume / domain_volume}});
    }
  }
  json summary = {{"secluded_volume", res.secluded_volume},
                  {"secluded_fraction", fraction},
                  {"tolerance", cfg.to.secluded_tolerance},
                  {"per_tool_stats", per_tool}};
  std::cout << summary.dump(2) << "\n";

  std::ofstream(out_path(opts, "analyze_summary.json")) << summary.dump(2) << "\n";
  return fraction <= cfg.to.secluded_tolerance ? 0 : 2;
}

void write_history_csv(const std::vector<IterationRecord>& history, const fs::path& path) {
  std::ofstream out(path);
  out.precision(17);
  out << "iteration,compliance,volume_fraction,secluded_fraction,w_acc\n";
  for (const auto& r : history)
    out << r.iteration << ',' << r.compliance << ',' << r.volume_fraction << ','
        << r.secluded_fraction << ',' << r.w_acc << '\n';
}

int cmd_optimize(const std::string& config_path, const CommonOpts& opts, int checkpoint_every) {
  SceneConfig cfg = load_config(config_path);
  if (cfg.load.fixed_dofs.empty())
    throw ConfigError(ConfigErrorKind::invariant, "load", "optimize requires a load case");
  apply_common(opts);

  auto on_iteration = [&](const TOState& st) {
    const IterationRecord& r = st.history.back();
    log_info("iter " + std::to_string(r.iteration) + " compliance " +
             std::to_string(r.compliance) + " vol " + std::to_string(r.volume_fraction));
    if (checkpoint_every > 0 && r.iteration % checkpoint_every == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_%04d.voxfield", r.iteration);
      write_field(st.rho, out_path(opts, name).string());
    }
  };

  TOState st = run_to(cfg.scene, cfg.tools, cfg.load, cfg.material, cfg.to, on_iteration);

  write_field(st.rho, out_path(opts, "final_density.voxfield").string());
  write_field(st.xi, out_path(opts, "final_xi.voxfield").string());
  ScalarField design = threshold(st.rho, cfg.to.tau);
  write_field(design, out_path(opts, "design.voxfield").string(), "u8");
  write_history_csv(st.history, out_path(opts, "history.csv"));
  if (opts.dump_intermediate) {
    write_vtk(st.rho, out_path(opts, "final_density.vtk").string(), "density");
    write_vtk(design, out_path(opts, "design.vtk").string(), "design");
  }

  json manifest = {{"config_hash", config_hash(cfg)},
                   {"config", json::parse(cfg.resolved)},
                   {"iterations", st.iteration},
                   {"converged", st.converged},
                   {"final_compliance", st.history.empty() ? 0.0 : st.history.back().compliance},
                   {"outputs", {"final_density.voxfield", "final_xi.voxfield",
                                "design.voxfield", "history.csv"}}};
  std::ofstream(out_path(opts, "manifest.json")) << manifest.dump(2) << "\n";
  std::cout << "optimize: " << st.iteration << " iterations, manifest hash "
            << config_hash(cfg) << "\n";
  return 0;
}

int cmd_plan(const std::string& config_path, const std::string& design_path,
             const CommonOpts& opts, bool snapshots) {
  SceneConfig cfg = load_config(config_path);
  if (cfg.tools.empty())
    throw ConfigError(ConfigErrorKind::invariant, "tools", "plan requires at least one tool");
  apply_common(opts);
  ScalarField design = load_design(design_path, cfg);

  // Plan under the same allowance the accessibility verdict uses.
  ProcessPlan plan = greedy_plan(design, cfg.scene, cfg.tools, cfg.to.lambda);

  double domain_volume = volume_integral(cfg.scene.domain);
  bool planar = cfg.scene.grid.is_2d();
  json steps = json::array();
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& s = plan.steps[i];
    steps.push_back({{"step", i + 1},
                     {"tool_index", s.tool_index},
                     {"tool", cfg.tools[static_cast<std::size_t>(s.tool_index)].name},
                     {"orientation", orientation_json(s.orientation, planar)},
                     {"removed_volume", s.removed_volume}});
    if (snapshots) {
      char name[64];
      std::snprintf(name, sizeof name, "step_%03zu_stock.voxfield", i + 1);
      write_field(s.stock_after, out_path(opts, name).string(), "u8");
    }
  }
  json doc = {{"steps", steps},
              {"residual_volume", plan.residual_volume},
              {"residual_fraction", plan.residual_volume / domain_volume}};
  std::ofstream(out_path(opts, "plan.json")) << doc.dump(2) << "\n";
  std::cout << doc.dump(2) << "\n";

  if (plan.residual_volume > cfg.to.secluded_tolerance * domain_volume) {
    log_warn("plan leaves unreachable negative space (residual " +
             std::to_string(plan.residual_volume) + ")");
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxel machining-constrained topology optimization"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string config_path, design_path;
  int checkpoint_every = 0;
  bool snapshots = false;

  CLI::App* analyze = app.add_subcommand("analyze", "Accessibility analysis of a design");
  analyze->add_option("config", config_path, "Scene config JSON")->required();
  analyze->add_option("design", design_path, "Design field (voxfield)")->required();
  add_common(analyze, opts);

  CLI::App* optimize = app.add_subcommand("optimize", "Run constrained topology optimization");
  optimize->add_option("config", config_path, "Scene config JSON")->required();
  optimize->add_option("--checkpoint-every", checkpoint_every,
                       "Write a density checkpoint every N iterations");
  add_common(optimize, opts);

  CLI::App* plan = app.add_subcommand("plan", "Greedy machining process plan");
  plan->add_option("config", config_path, "Scene config JSON")->required();
  plan->add_option("design", design_path, "Design field (voxfield)")->required();
  plan->add_flag("--snapshots", snapshots, "Write per-step stock snapshots");
  add_common(plan, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze)) return cmd_analyze(config_path, design_path, opts);
    if (app.got_subcommand(optimize)) return cmd_optimize(config_path, opts, checkpoint_every);
    if (app.got_subcommand(plan)) return cmd_plan(config_path, design_path, opts, snapshots);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
