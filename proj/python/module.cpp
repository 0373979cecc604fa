#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "voxmill/accessibility.hpp"
#include "voxmill/config.hpp"
#include "voxmill/fea.hpp"
#include "voxmill/field_io.hpp"
#include "voxmill/morphology.hpp"
#include "voxmill/parallel.hpp"
#include "voxmill/planner.hpp"
#include "voxmill/topopt.hpp"

namespace py = pybind11;
using namespace voxmill;

namespace {

py::array_t<double> field_to_numpy(const ScalarField& f) {
  const auto& d = f.spec().dims;
  py::array_t<double> out({d[2], d[1], d[0]});
  std::memcpy(out.mutable_data(), f.values().data(), f.size() * sizeof(double));
  return out;
}

ScalarField field_from_numpy(const GridSpec& spec, py::array_t<double, py::array::c_style | py::array::forcecast> arr) {
  if (arr.ndim() != 3 || arr.shape(0) != spec.dims[2] || arr.shape(1) != spec.dims[1] ||
      arr.shape(2) != spec.dims[0])
    throw ShapeError("array shape must be (nz, ny, nx) matching the grid");
  std::vector<double> values(arr.data(), arr.data() + arr.size());
  return ScalarField(spec, std::move(values));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Voxel topology optimization under multi-axis machining accessibility constraints";

  py::register_exception<Error>(m, "VoxmillError");

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init([](std::array<int, 3> dims, std::array<double, 3> spacing,
                       std::array<double, 3> origin) {
             GridSpec g{dims, spacing, origin};
             g.validate();
             return g;
           }),
           py::arg("dims"), py::arg("spacing") = std::array<double, 3>{1, 1, 1},
           py::arg("origin") = std::array<double, 3>{0, 0, 0})
      .def_readonly("dims", &GridSpec::dims)
      .def_readonly("spacing", &GridSpec::spacing)
      .def_readonly("origin", &GridSpec::origin)
      .def("dv", &GridSpec::dv)
      .def("is_2d", &GridSpec::is_2d)
      .def("cell_count", &GridSpec::cell_count)
      .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; });

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init<GridSpec, double>(), py::arg("spec"), py::arg("fill") = 0.0)
      .def_property_readonly("spec", &ScalarField::spec)
      .def("to_numpy", &field_to_numpy, "Values as an (nz, ny, nx) array")
      .def_static("from_numpy", &field_from_numpy, py::arg("spec"), py::arg("array"));

  m.def("volume_integral", &volume_integral);
  m.def("threshold", &threshold, py::arg("f"), py::arg("tau"));
  m.def("implicit_union", &implicit_union);
  m.def("read_field", [](const std::string& p) { return read_field(p); });
  m.def("write_field", &write_field, py::arg("f"), py::arg("path"), py::arg("dtype") = "f64");
  m.def("write_vtk", &write_vtk, py::arg("f"), py::arg("path"), py::arg("name") = "field");

  py::class_<Orientation>(m, "Orientation")
      .def_static("identity", &Orientation::identity)
      .def_static("from_angle_2d", &Orientation::from_angle_2d, py::arg("radians"))
      .def_static("from_axis_angle",
                  [](std::array<double, 3> axis, double angle) {
                    return Orientation::from_axis_angle({axis[0], axis[1], axis[2]}, angle);
                  })
      .def_static("from_quat", &Orientation::from_quat)
      .def_property_readonly("id", &Orientation::id)
      .def("quat", &Orientation::quat)
      .def("angle_2d", &Orientation::angle_2d);

  m.def("rotate_resample", &rotate_resample);
  m.def("reflect", &reflect);
  m.def("convolve", &convolve);
  m.def("cobstacle_slice", &cobstacle_slice);
  m.def("positive_support", &positive_support);

  py::class_<ToolAssembly>(m, "ToolAssembly")
      .def(py::init([](ScalarField holder, ScalarField cutter, std::vector<std::array<double, 3>> sharp,
                       std::vector<Orientation> orientations, std::string name) {
             ToolAssembly t;
             t.holder = std::move(holder);
             t.cutter = std::move(cutter);
             for (auto& p : sharp) t.sharp_points.push_back({p[0], p[1], p[2]});
             t.orientations = make_orientation_set(std::move(orientations));
             t.name = std::move(name);
             t.validate();
             return t;
           }),
           py::arg("holder"), py::arg("cutter"), py::arg("sharp_points"),
           py::arg("orientations"), py::arg("name") = "tool")
      .def_readonly("holder", &ToolAssembly::holder)
      .def_readonly("cutter", &ToolAssembly::cutter)
      .def_readonly("name", &ToolAssembly::name);

  m.def("default_sharp_points",
        [](const ScalarField& holder, const ScalarField& cutter, int stride) {
          std::vector<std::array<double, 3>> out;
          for (const Vec3& p : default_sharp_points(holder, cutter, stride))
            out.push_back({p.x, p.y, p.z});
          return out;
        },
        py::arg("holder"), py::arg("cutter"), py::arg("stride") = 1);

  py::class_<Scene>(m, "Scene")
      .def_static("full_domain", &Scene::full_domain)
      .def_readwrite("grid", &Scene::grid)
      .def_readwrite("domain", &Scene::domain)
      .def_readwrite("fixtures", &Scene::fixtures)
      .def_readwrite("retained", &Scene::retained)
      .def_readwrite("voids", &Scene::voids);

  py::class_<RegionMasks>(m, "RegionMasks")
      .def_readonly("accessible", &RegionMasks::accessible)
      .def_readonly("inaccessible", &RegionMasks::inaccessible)
      .def_readonly("secluded", &RegionMasks::secluded);

  py::class_<AccessResult>(m, "AccessResult")
      .def_readonly("imf", &AccessResult::imf)
      .def_readonly("masks", &AccessResult::masks)
      .def_readonly("secluded_volume", &AccessResult::secluded_volume)
      .def_readonly("per_tool_imf", &AccessResult::per_tool_imf);

  m.def("imf_single_tool", &imf_single_tool);
  m.def("imf_multi_tool",
        [](const ScalarField& rho_O, const std::vector<ToolAssembly>& tools) {
          return imf_multi_tool(rho_O, tools);
        });
  m.def("normalize_and_classify",
        [](const ScalarField& f, const ScalarField& rho, double lambda, double tau) {
          return normalize_and_classify(f, rho, lambda, tau);
        },
        py::arg("f_imf"), py::arg("rho_omega"), py::arg("lambda_"), py::arg("tau"));
  m.def("access_check", &access_check, py::arg("design"), py::arg("scene"), py::arg("tools"),
        py::arg("lambda_") = 0.01, py::arg("tau") = 0.5, py::arg("keep_per_tool") = false);

  py::class_<MaterialModel>(m, "MaterialModel")
      .def(py::init<>())
      .def_readwrite("youngs_modulus", &MaterialModel::youngs_modulus)
      .def_readwrite("poisson_ratio", &MaterialModel::poisson_ratio)
      .def_readwrite("simp_exponent", &MaterialModel::simp_exponent)
      .def_readwrite("rho_min", &MaterialModel::rho_min);

  py::class_<LoadCase>(m, "LoadCase")
      .def(py::init<>())
      .def_readwrite("fixed_dofs", &LoadCase::fixed_dofs)
      .def_readwrite("forces", &LoadCase::forces);

  m.def("dof_index", &dof_index);
  m.def("dof_count", &dof_count);

  py::class_<FESolution>(m, "FESolution")
      .def_readonly("displacements", &FESolution::displacements)
      .def_readonly("compliance", &FESolution::compliance)
      .def_readonly("cg_iterations", &FESolution::cg_iterations)
      .def_readonly("residual", &FESolution::residual);

  m.def("apply_stiffness", &apply_stiffness);
  m.def("solve", &solve, py::arg("rho"), py::arg("load"), py::arg("model"),
        py::arg("tol") = 1e-6, py::arg("max_iter") = 0);
  m.def("compliance_sensitivity", &compliance_sensitivity);
  m.def("normalize_sensitivity", &normalize_sensitivity);

  py::class_<TOConfig>(m, "TOConfig")
      .def(py::init<>())
      .def_readwrite("volume_fraction", &TOConfig::volume_fraction)
      .def_readwrite("w_acc", &TOConfig::w_acc)
      .def_readwrite("adaptive_w_acc", &TOConfig::adaptive_w_acc)
      .def_readwrite("lambda_", &TOConfig::lambda)
      .def_readwrite("beta", &TOConfig::beta)
      .def_readwrite("tau", &TOConfig::tau)
      .def_readwrite("filter_radius", &TOConfig::filter_radius)
      .def_readwrite("move_limit", &TOConfig::move_limit)
      .def_readwrite("oc_damping", &TOConfig::oc_damping)
      .def_readwrite("delta", &TOConfig::delta)
      .def_readwrite("max_iter", &TOConfig::max_iter)
      .def_readwrite("secluded_tolerance", &TOConfig::secluded_tolerance)
      .def_readwrite("imf_stride", &TOConfig::imf_stride);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("compliance", &IterationRecord::compliance)
      .def_readonly("volume_fraction", &IterationRecord::volume_fraction)
      .def_readonly("secluded_fraction", &IterationRecord::secluded_fraction)
      .def_readonly("w_acc", &IterationRecord::w_acc);

  py::class_<TOState>(m, "TOState")
      .def_readonly("xi", &TOState::xi)
      .def_readonly("rho", &TOState::rho)
      .def_readonly("iteration", &TOState::iteration)
      .def_readonly("history", &TOState::history)
      .def_readonly("converged", &TOState::converged);

  m.def("heaviside_project",
        py::overload_cast<const ScalarField&, double>(&heaviside_project));
  m.def("build_access_filter", &build_access_filter);
  m.def("blend_sensitivity", &blend_sensitivity);
  m.def("oc_update", &oc_update, py::arg("xi"), py::arg("S"), py::arg("cfg"),
        py::arg("scene") = nullptr);
  m.def("run_to",
        [](const Scene& scene, const std::vector<ToolAssembly>& tools, const LoadCase& load,
           const MaterialModel& model, const TOConfig& cfg) {
          return run_to(scene, tools, load, model, cfg);
        });

  py::class_<PlanStep>(m, "PlanStep")
      .def_readonly("tool_index", &PlanStep::tool_index)
      .def_readonly("orientation", &PlanStep::orientation)
      .def_readonly("removed", &PlanStep::removed)
      .def_readonly("removed_volume", &PlanStep::removed_volume)
      .def_readonly("stock_after", &PlanStep::stock_after);

  py::class_<ProcessPlan>(m, "ProcessPlan")
      .def_readonly("steps", &ProcessPlan::steps)
      .def_readonly("residual_volume", &ProcessPlan::residual_volume);

  m.def("removable_region", &removable_region, py::arg("stock"), py::arg("target"),
        py::arg("fixtures"), py::arg("tool"), py::arg("orientation"),
        py::arg("allowance") = 0.0);
  m.def("greedy_plan", &greedy_plan, py::arg("design"), py::arg("scene"), py::arg("tools"),
        py::arg("allowance") = 0.0);

  py::class_<SceneConfig>(m, "SceneConfig")
      .def_readonly("scene", &SceneConfig::scene)
      .def_readonly("tools", &SceneConfig::tools)
      .def_readonly("load", &SceneConfig::load)
      .def_readonly("material", &SceneConfig::material)
      .def_readonly("to", &SceneConfig::to)
      .def_readonly("resolved", &SceneConfig::resolved);

  m.def("load_config", &load_config);
  m.def("load_config_from_string", &load_config_from_string, py::arg("json_text"),
        py::arg("base_dir") = ".");
  m.def("config_hash", &config_hash);

  m.def("set_thread_count", &set_thread_count);
  m.def("set_memory_budget_mb", &set_memory_budget_mb);
}
