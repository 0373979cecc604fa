#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "voxmill/config.hpp"
#include "voxmill/field_io.hpp"

using namespace voxmill;
using namespace testutil;

namespace {

const char* kMinimal2d = R"json({
  "grid": {"dims": [16, 8]},
  "tools": [
    {
      "name": "bar",
      "cutter": [{"type": "box", "min": [-0.5, -0.5], "max": [0.5, 3.5]}],
      "holder": [{"type": "box", "min": [-2.5, 3.5], "max": [2.5, 5.5]}],
      "orientations": [{"angle_deg": 0}, {"angle_deg": 180}]
    }
  ],
  "load": {
    "fixed": [{"box": {"min": [-1, -1], "max": [0, 9]}, "axes": "xy"}],
    "forces": [{"box": {"min": [15.4, 3.4], "max": [15.6, 4.6]}, "force": [0, -1]}]
  }
})json";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("a minimal 2D config parses with documented defaults") {
  SceneConfig cfg = load_config_from_string(kMinimal2d);
  CHECK(cfg.scene.grid.dims[0] == 16);
  CHECK(cfg.scene.grid.dims[2] == 1);
  CHECK(cfg.material.simp_exponent == 3.0);
  CHECK(cfg.material.rho_min == 1e-3);
  CHECK(cfg.to.lambda == 0.01);
  CHECK(cfg.to.tau == 0.5);
  CHECK(cfg.to.beta == 2.0);  // 2D default
  CHECK(cfg.to.w_acc == 0.0);
  CHECK(cfg.to.move_limit == 0.2);
  REQUIRE(cfg.tools.size() == 1);
  CHECK(cfg.tools[0].name == "bar");
  CHECK(!cfg.tools[0].sharp_points.empty());
  CHECK(cfg.tools[0].orientations.size() == 2);
  CHECK(cfg.tools[0].orientations[1].id() == 1);
  CHECK(!cfg.load.fixed_dofs.empty());
  CHECK(!cfg.load.forces.empty());
  CHECK(!cfg.resolved.empty());
}

TEST_CASE("3D grids default to beta = 8") {
  SceneConfig cfg = load_config_from_string(R"({"grid": {"dims": [4, 4, 4]}})");
  CHECK(cfg.to.beta == 8.0);
}

TEST_CASE("3D tools voxelize cylinder stacks with axis-angle orientations") {
  const char* text = R"json({
    "grid": {"dims": [12, 12, 12]},
    "tools": [
      {
        "name": "endmill3d",
        "cutter": [{"type": "cylinder", "axis": "z", "center": [0, 0, 2], "radius": 1.2,
                    "half_length": 2}],
        "holder": [{"type": "cylinder", "axis": "z", "center": [0, 0, 7], "radius": 2.4,
                    "half_length": 3}],
        "orientations": [{"axis": [0, 0, 1], "angle_deg": 0},
                         {"axis": [1, 0, 0], "angle_deg": 180},
                         {"quat": [1, 0, 0, 0]}]
      }
    ]
  })json";
  SceneConfig cfg = load_config_from_string(text);
  REQUIRE(cfg.tools.size() == 1);
  const ToolAssembly& t = cfg.tools[0];
  CHECK(volume_integral(t.cutter) > 0.0);
  CHECK(volume_integral(t.holder) > volume_integral(t.cutter));
  CHECK(!t.sharp_points.empty());
  CHECK(t.orientations.size() == 3);
  CHECK(!t.cutter.spec().is_2d());
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("invalid volume fraction is a schema violation naming the key") {
  std::string text = replace(kMinimal2d, "\"load\":", R"("to": {"volume_fraction": 1.2}, "load":)");
  try {
    load_config_from_string(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::schema);
    CHECK(e.key() == "to.volume_fraction");
  }
}

TEST_CASE("missing tool field file is an unresolved reference") {
  std::string text = replace(
      kMinimal2d, R"([{"type": "box", "min": [-0.5, -0.5], "max": [0.5, 3.5]}])",
      R"({"field": "no_such_tool.voxfield"})");
  try {
    load_config_from_string(text, "/tmp");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::unresolved_reference);
    CHECK(e.key() == "tools[0].cutter");
  }
}

TEST_CASE("non-JSON input is a parse error") {
  try {
    load_config_from_string("not json at all {");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::parse);
  }
}

TEST_CASE("2D scenes reject out-of-plane orientations") {
  std::string text = replace(kMinimal2d, R"([{"angle_deg": 0}, {"angle_deg": 180}])",
                             R"([{"axis": [1, 0, 0], "angle_deg": 90}])");
  try {
    load_config_from_string(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::invariant);
  }
}

TEST_CASE("load boxes that select no nodes are invariant violations") {
  std::string text =
      replace(kMinimal2d, R"({"min": [-1, -1], "max": [0, 9]})",
              R"({"min": [100, 100], "max": [101, 101]})");
  try {
    load_config_from_string(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::invariant);
    CHECK(e.key() == "load.fixed[0]");
  }
}

TEST_CASE("overlapping retained and void regions are rejected") {
  std::string text = replace(
      kMinimal2d, "\"load\":",
      R"("retained_regions": [{"box": {"min": [0, 0], "max": [3, 3]}}],
         "void_regions": [{"box": {"min": [2, 2], "max": [5, 5]}}], "load":)");
  CHECK_THROWS_AS(load_config_from_string(text), ConfigError);
}

TEST_CASE("scene field references must match the scene grid") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "voxmill_cfg_test";
  fs::create_directories(dir);
  ScalarField wrong(grid2d(4, 4));
  write_field(wrong, (dir / "domain.voxfield").string());

  std::string text = replace(kMinimal2d, "\"tools\":",
                             R"("design_domain": {"field": "domain.voxfield"}, "tools":)");
  try {
    load_config_from_string(text, dir.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == ConfigErrorKind::invariant);
  }
  fs::remove_all(dir);
}

TEST_CASE("tool grids are anchored on the scene lattice") {
  SceneConfig cfg = load_config_from_string(kMinimal2d);
  const GridSpec& tg = cfg.tools[0].cutter.spec();
  for (int a = 0; a < 2; ++a) {
    double q = tg.origin[a] / tg.spacing[a];
    CHECK(std::abs(q - std::round(q)) < 1e-9);
  }
  CHECK(tg.same_spacing(cfg.scene.grid));
}

TEST_CASE("total force is split across the selected nodes") {
  SceneConfig cfg = load_config_from_string(kMinimal2d);
  double total = 0.0;
  for (const auto& [dof, value] : cfg.load.forces) total += value;
  CHECK(total == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("config hash is deterministic and sensitive to content") {
  SceneConfig a = load_config_from_string(kMinimal2d);
  SceneConfig b = load_config_from_string(kMinimal2d);
  CHECK(config_hash(a) == config_hash(b));
  std::string text = replace(kMinimal2d, "\"load\":", R"("to": {"max_iter": 7}, "load":)");
  SceneConfig c = load_config_from_string(text);
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("load_config reads from disk and resolves relative references") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "voxmill_cfg_disk";
  fs::create_directories(dir);
  ScalarField cutter(grid2d(2, 4, 1.0, 0.0, 0.0));
  for (int y = 0; y < 4; ++y) cutter.at(0, y, 0) = 1.0;
  write_field(cutter, (dir / "cutter.voxfield").string(), "u8");

  std::string text = replace(kMinimal2d,
                             R"([{"type": "box", "min": [-0.5, -0.5], "max": [0.5, 3.5]}])",
                             R"({"field": "cutter.voxfield"})");
  text = replace(text, R"("holder": [{"type": "box", "min": [-2.5, 3.5], "max": [2.5, 5.5]}],)",
                 "");
  std::ofstream(dir / "scene.json") << text;

  SceneConfig cfg = load_config((dir / "scene.json").string());
  CHECK(cfg.tools[0].cutter.spec().dims[0] == 2);
  CHECK(volume_integral(cfg.tools[0].cutter) == doctest::Approx(4.0));
  fs::remove_all(dir);
}
