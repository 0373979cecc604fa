#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "voxmill/accessibility.hpp"
#include "voxmill/morphology.hpp"

using namespace voxmill;
using namespace testutil;

namespace {

std::vector<Orientation> axis_angles_2d(std::initializer_list<double> degrees) {
  std::vector<Orientation> out;
  for (double d : degrees) out.push_back(Orientation::from_angle_2d(d * M_PI / 180.0));
  return out;
}

// Single-voxel cutter at the local origin, no holder.
ToolAssembly point_tool(double spacing = 1.0) {
  GridSpec tg;
  tg.dims = {1, 1, 1};
  tg.spacing = {spacing, spacing, spacing};
  ToolAssembly t;
  t.holder = ScalarField(tg);
  t.cutter = ScalarField(tg, 1.0);
  t.sharp_points = {{0.0, 0.0, 0.0}};
  t.orientations = make_orientation_set({Orientation::identity()});
  t.name = "point";
  return t;
}

// Vertical 1x4 cutter with its tip at the origin and a 4x2 holder on top.
ToolAssembly l_tool_2d(std::vector<Orientation> rots, int sharp_stride = 1) {
  GridSpec tg = grid2d(4, 6, 1.0, 0.0, 0.0);
  ToolAssembly t;
  t.cutter = ScalarField(tg);
  for (int y = 0; y < 4; ++y) t.cutter.at(0, y, 0) = 1.0;
  t.holder = ScalarField(tg);
  for (int y = 4; y < 6; ++y)
    for (int x = 0; x < 4; ++x) t.holder.at(x, y, 0) = 1.0;
  t.sharp_points = default_sharp_points(t.holder, t.cutter, sharp_stride);
  t.orientations = make_orientation_set(std::move(rots));
  t.name = "l_tool";
  return t;
}

// Block with a rectangular undercut notch in its +x face, mostly sealed.
ScalarField undercut_scene(const GridSpec& g) {
  ScalarField rho(g);
  for (int y = 2; y < 12; ++y)
    for (int x = 2; x < 12; ++x) rho.at(x, y, 0) = 1.0;
  for (int y = 5; y < 8; ++y)
    for (int x = 8; x < 11; ++x) rho.at(x, y, 0) = 0.0;  // notch
  rho.at(11, 6, 0) = 0.0;                                // slit to the outside
  return rho;
}

ScalarField oracle_imf_for_tool(const ScalarField& rho_O, const ToolAssembly& tool) {
  return oracles::exhaustive_imf(rho_O, oracles::support_points(tool.assembly()),
                                 tool.sharp_points, tool.orientations);
}

}  // namespace

TEST_CASE("tool assembly invariants are enforced") {
  ToolAssembly t = point_tool();
  CHECK_NOTHROW(t.validate());

  ToolAssembly overlap = t;
  overlap.holder = ScalarField(t.cutter.spec(), 1.0);
  CHECK_THROWS_AS(overlap.validate(), ParamError);

  ToolAssembly no_sharp = t;
  no_sharp.sharp_points.clear();
  CHECK_THROWS_AS(no_sharp.validate(), ParamError);

  ToolAssembly no_rot = t;
  no_rot.orientations.clear();
  CHECK_THROWS_AS(no_rot.validate(), ParamError);

  ToolAssembly off_lattice = t;
  off_lattice.sharp_points = {{0.3, 0.0, 0.0}};
  CHECK_THROWS_AS(off_lattice.validate(), ParamError);

  ToolAssembly off_cutter = l_tool_2d(axis_angles_2d({0}));
  off_cutter.sharp_points = {{3.0, 0.0, 0.0}};  // not a cutter voxel
  CHECK_THROWS_AS(off_cutter.validate(), ParamError);
}

TEST_CASE("default sharp points lie on the cutter boundary and honor stride") {
  ToolAssembly t = l_tool_2d(axis_angles_2d({0}));
  // 1-wide cutter of height 4 under the holder: every cutter voxel has an
  // exposed face.
  CHECK(t.sharp_points.size() == 4);
  ToolAssembly t2 = l_tool_2d(axis_angles_2d({0}), 2);
  CHECK(t2.sharp_points.size() == 2);
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("imf is zero when there is nothing to collide with") {
  ScalarField empty(grid2d(10, 10));
  ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90, 180, 270}));
  ScalarField f = imf_single_tool(empty, t);
  for (double v : f.values()) CHECK(v == 0.0);
}

TEST_CASE("point tool measures only self-overlap") {
  ScalarField rho = random_field(grid2d(9, 7, 0.5), 31);
  ScalarField f = imf_single_tool(rho, point_tool(0.5));
  for (std::size_t i = 0; i < rho.size(); ++i)
    CHECK(rel_close(f[i], rho[i] * rho.spec().dv(), 1e-9, 1e-13));
}

TEST_CASE("imf matches the exhaustive placement oracle on an undercut scene") {
  GridSpec g = grid2d(14, 14);
  ScalarField rho = undercut_scene(g);
  ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90, 270}));
  REQUIRE(t.sharp_points.size() <= 8);

  ScalarField f = imf_single_tool(rho, t);
  ScalarField oracle = oracle_imf_for_tool(rho, t);
  CHECK(fields_rel_close(f, oracle, 1e-9, 1e-12));
}

TEST_CASE("imf matches the oracle on random density scenes") {
  for (unsigned seed = 70; seed < 73; ++seed) {
    ScalarField rho = random_field(grid2d(10, 8), seed);
    ToolAssembly t = l_tool_2d(axis_angles_2d({0, 180}));
    ScalarField f = imf_single_tool(rho, t);
    ScalarField oracle = oracle_imf_for_tool(rho, t);
    CHECK(fields_rel_close(f, oracle, 1e-9, 1e-12));
  }
}

TEST_CASE("multi-tool imf is the pointwise minimum") {
  ScalarField rho = undercut_scene(grid2d(14, 14));
  ToolAssembly thin = l_tool_2d(axis_angles_2d({0, 90}));
  ToolAssembly point = point_tool();

  ScalarField single = imf_single_tool(rho, thin);
  CHECK(fields_identical(imf_multi_tool(rho, {thin}), single));
  CHECK(fields_identical(imf_multi_tool(rho, {thin, thin}), single));

  std::vector<ScalarField> per_tool;
  ScalarField multi = imf_multi_tool(rho, {thin, point}, &per_tool);
  REQUIRE(per_tool.size() == 2);
  for (std::size_t i = 0; i < multi.size(); ++i) {
    CHECK(multi[i] <= per_tool[0][i]);
    CHECK(multi[i] <= per_tool[1][i]);
    CHECK(multi[i] == std::min(per_tool[0][i], per_tool[1][i]));
  }
  CHECK_THROWS_AS(imf_multi_tool(rho, {}), ParamError);
}

TEST_CASE("normalize_and_classify handles the degenerate all-accessible case") {
  GridSpec g = grid2d(6, 6);
  ScalarField f(g), rho(g);
  AccessResult res = normalize_and_classify(f, rho, 0.01, 0.5);
  CHECK(res.secluded_volume == 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(res.masks.accessible[i] == 1.0);
    CHECK(res.masks.inaccessible[i] == 0.0);
    CHECK(res.masks.secluded[i] == 0.0);
    CHECK(res.imf[i] == 0.0);
  }
}

TEST_CASE("classification is invariant under positive scaling of the imf") {
  GridSpec g = grid2d(8, 8);
  ScalarField f = random_field(g, 41, 0.0, 5.0);
  ScalarField rho = random_field(g, 42);
  AccessResult a = normalize_and_classify(f, rho, 0.05, 0.5);
  ScalarField f3(g);
  for (std::size_t i = 0; i < f.size(); ++i) f3[i] = 3.0 * f[i];
  AccessResult b = normalize_and_classify(f3, rho, 0.05, 0.5);
  CHECK(fields_rel_close(a.imf, b.imf, 1e-12));
  CHECK(fields_identical(a.masks.secluded, b.masks.secluded));
  CHECK(fields_identical(a.masks.accessible, b.masks.accessible));
}

TEST_CASE("masks satisfy the partition and disjointness invariants") {
  ScalarField rho = undercut_scene(grid2d(14, 14));
  ToolAssembly t = l_tool_2d(axis_angles_2d({0}));
  ScalarField f = imf_single_tool(rho, t);
  AccessResult res = normalize_and_classify(f, rho, 0.01, 0.5);
  ScalarField design = threshold(rho, 0.5);
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(res.masks.accessible[i] * res.masks.inaccessible[i] == 0.0);
    CHECK(res.masks.accessible[i] + res.masks.inaccessible[i] == 1.0);
    CHECK(res.masks.secluded[i] <= res.masks.inaccessible[i]);
    CHECK(res.masks.secluded[i] * design[i] == 0.0);
    CHECK(res.imf[i] >= 0.0);
    CHECK(res.imf[i] <= 1.0);
    if (res.masks.accessible[i] > 0.0) CHECK(res.imf[i] == 0.0);
  }
  CHECK(res.secluded_volume == volume_integral(res.masks.secluded));
}

TEST_CASE("refining sharp points can only lower the imf") {
  ScalarField rho = undercut_scene(grid2d(14, 14));
  ToolAssembly sparse = l_tool_2d(axis_angles_2d({0, 90}), 3);
  ToolAssembly dense = l_tool_2d(axis_angles_2d({0, 90}), 1);
  // stride-3 subset of the stride-1 boundary walk
  for (const Vec3& p : sparse.sharp_points) {
    bool found = false;
    for (const Vec3& q : dense.sharp_points)
      found = found || (p.x == q.x && p.y == q.y && p.z == q.z);
    REQUIRE(found);
  }
  ScalarField f_sparse = imf_single_tool(rho, sparse);
  ScalarField f_dense = imf_single_tool(rho, dense);
  for (std::size_t i = 0; i < f_sparse.size(); ++i)
    CHECK(f_dense[i] <= f_sparse[i] + 1e-12);
}

TEST_CASE("refining orientations can only lower the imf") {
  for (unsigned seed = 80; seed < 84; ++seed) {
    ScalarField rho = random_field(grid2d(10, 10), seed);
    ToolAssembly coarse = l_tool_2d(axis_angles_2d({0, 180}));
    ToolAssembly fine = l_tool_2d(axis_angles_2d({0, 180, 90, 270}));
    ScalarField f_coarse = imf_single_tool(rho, coarse);
    ScalarField f_fine = imf_single_tool(rho, fine);
    for (std::size_t i = 0; i < f_coarse.size(); ++i)
      CHECK(f_fine[i] <= f_coarse[i] + 1e-12);
  }
}

TEST_CASE("imf is monotone in the obstacle density") {
  for (unsigned seed = 90; seed < 93; ++seed) {
    ScalarField lo = random_field(grid2d(9, 9), seed, 0.0, 0.8);
    ScalarField hi(lo.spec());
    std::mt19937 rng(seed + 1000);
    std::uniform_real_distribution<double> bump(0.0, 0.2);
    for (std::size_t i = 0; i < lo.size(); ++i) hi[i] = lo[i] + bump(rng);
    ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90}));
    ScalarField f_lo = imf_single_tool(lo, t);
    ScalarField f_hi = imf_single_tool(hi, t);
    for (std::size_t i = 0; i < f_lo.size(); ++i) CHECK(f_hi[i] >= f_lo[i] - 1e-12);
  }
}

TEST_CASE("every design voxel is inaccessible (self-collision)") {
  ScalarField design = threshold(undercut_scene(grid2d(14, 14)), 0.5);
  ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90, 180, 270}));
  ScalarField f = imf_single_tool(design, t);
  // lambda = 0: B is the strict positive support of the normalized field
  AccessResult res = normalize_and_classify(f, design, 0.0, 0.5);
  for (std::size_t i = 0; i < design.size(); ++i)
    if (design[i] > 0.5) CHECK(res.masks.inaccessible[i] == 1.0);
}

TEST_CASE("3D imf matches the exhaustive oracle") {
  GridSpec g = grid3d(8, 6, 6);
  ScalarField rho(g);
  for (int z = 1; z < 5; ++z)
    for (int y = 1; y < 5; ++y)
      for (int x = 1; x < 6; ++x) rho.at(x, y, z) = 1.0;
  for (int z = 2; z < 4; ++z)
    for (int y = 2; y < 4; ++y) rho.at(5, y, z) = 0.0;  // pocket in the +x face

  GridSpec tg = grid3d(3, 3, 5);
  tg.origin = {-1.0, -1.0, 0.0};
  ToolAssembly t;
  t.cutter = ScalarField(tg);
  for (int z = 0; z < 3; ++z) t.cutter.at(1, 1, z) = 1.0;
  t.holder = ScalarField(tg);
  for (int z = 3; z < 5; ++z)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) t.holder.at(x, y, z) = 1.0;
  t.sharp_points = default_sharp_points(t.holder, t.cutter);
  t.orientations = make_orientation_set(
      {Orientation::identity(), Orientation::from_axis_angle({1, 0, 0}, M_PI),
       Orientation::from_axis_angle({0, 1, 0}, M_PI / 2)});

  ScalarField f = imf_single_tool(rho, t);
  ScalarField oracle = oracles::exhaustive_imf(
      rho, oracles::support_points(t.assembly()), t.sharp_points, t.orientations);
  CHECK(fields_rel_close(f, oracle, 1e-9, 1e-12));
}

TEST_CASE("access_check: full design has empty negative space") {
  GridSpec g = grid2d(10, 10);
  Scene scene = Scene::full_domain(g);
  ScalarField full(g, 1.0);
  AccessResult res = access_check(full, scene, {l_tool_2d(axis_angles_2d({0}))});
  CHECK(res.secluded_volume == 0.0);
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(res.masks.secluded[i] == 0.0);
}

TEST_CASE("access_check flags a sealed internal void as secluded") {
  GridSpec g = grid2d(12, 12);
  Scene scene = Scene::full_domain(g);
  ScalarField ring(g);
  for (int y = 2; y < 10; ++y)
    for (int x = 2; x < 10; ++x) ring.at(x, y, 0) = 1.0;
  for (int y = 5; y < 7; ++y)
    for (int x = 5; x < 7; ++x) ring.at(x, y, 0) = 0.0;  // sealed 2x2 void

  ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90, 180, 270}));
  AccessResult res = access_check(ring, scene, {t});
  for (int y = 5; y < 7; ++y)
    for (int x = 5; x < 7; ++x) CHECK(res.masks.secluded.at(x, y, 0) == 1.0);
  CHECK(res.secluded_volume >= 4.0);

  // the exhaustive oracle agrees that no collision-free placement reaches it
  ScalarField oracle = oracle_imf_for_tool(ring, t);
  for (int y = 5; y < 7; ++y)
    for (int x = 5; x < 7; ++x) CHECK(oracle.at(x, y, 0) > 0.0);
}

TEST_CASE("fixtures contribute to collisions but not to the secluded set") {
  GridSpec g = grid2d(12, 6);
  Scene scene = Scene::full_domain(g);
  for (int y = 0; y < 6; ++y)
    for (int x = 9; x < 12; ++x) scene.fixtures.at(x, y, 0) = 1.0;
  ScalarField design(g);
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 3; ++x) design.at(x, y, 0) = 1.0;

  AccessResult res = access_check(design, scene, {l_tool_2d(axis_angles_2d({0}))});
  for (int y = 0; y < 6; ++y)
    for (int x = 9; x < 12; ++x) CHECK(res.masks.secluded.at(x, y, 0) == 0.0);
}

TEST_CASE("secluded region equals the oracle classification on the undercut") {
  GridSpec g = grid2d(14, 14);
  ScalarField rho = undercut_scene(g);
  ToolAssembly t = l_tool_2d(axis_angles_2d({0, 90, 270}));
  double lambda = 0.01, tau = 0.5;

  ScalarField f = imf_single_tool(rho, t);
  AccessResult res = normalize_and_classify(f, rho, lambda, tau);

  ScalarField oracle = oracle_imf_for_tool(rho, t);
  double omax = field_max(oracle);
  for (std::size_t i = 0; i < f.size(); ++i) {
    bool in_gamma = oracle[i] / omax > lambda && rho[i] <= tau;
    CHECK(res.masks.secluded[i] == (in_gamma ? 1.0 : 0.0));
  }
}
