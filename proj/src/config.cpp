#include "voxmill/config.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "voxmill/field_io.hpp"

namespace voxmill {

using nlohmann::json;

namespace {

[[noreturn]] void fail(ConfigErrorKind kind, const std::string& key, const std::string& msg) {
  throw ConfigError(kind, key, msg);
}

const json& member(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) fail(ConfigErrorKind::schema, path, "missing required entry");
  return *it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(ConfigErrorKind::schema, path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(ConfigErrorKind::schema, path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(ConfigErrorKind::schema, path, "expected a string");
  return j.get<std::string>();
}

// Accepts [x, y] (z filled with `z2d`) or [x, y, z].
std::array<double, 3> as_vec3(const json& j, const std::string& path, double z2d = 0.0) {
  if (!j.is_array() || (j.size() != 2 && j.size() != 3))
    fail(ConfigErrorKind::schema, path, "expected an array of 2 or 3 numbers");
  std::array<double, 3> v{0.0, 0.0, z2d};
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = as_number(j[i], path);
  return v;
}

struct Box {
  std::array<double, 3> lo{}, hi{};
  bool unbounded_z = false;
};

Box as_box(const json& j, const std::string& path) {
  if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected {min, max}");
  Box b;
  const json& jmin = member(j, "min", path + ".min");
  const json& jmax = member(j, "max", path + ".max");
  b.unbounded_z = jmin.is_array() && jmin.size() == 2;
  b.lo = as_vec3(jmin, path + ".min", -1e300);
  b.hi = as_vec3(jmax, path + ".max", 1e300);
  for (int a = 0; a < 3; ++a)
    if (b.lo[a] > b.hi[a]) fail(ConfigErrorKind::schema, path, "box min exceeds max");
  return b;
}

bool box_contains(const Box& b, const Vec3& p) {
  const double eps = 1e-9;
  return p.x >= b.lo[0] - eps && p.x <= b.hi[0] + eps && p.y >= b.lo[1] - eps &&
         p.y <= b.hi[1] + eps && p.z >= b.lo[2] - eps && p.z <= b.hi[2] + eps;
}

void paint_box(ScalarField& mask, const Box& b) {
  const GridSpec& g = mask.spec();
  for (int z = 0; z < g.dims[2]; ++z)
    for (int y = 0; y < g.dims[1]; ++y)
      for (int x = 0; x < g.dims[0]; ++x)
        if (box_contains(b, g.center(x, y, z))) mask.at(x, y, z) = 1.0;
}

// -- primitives --------------------------------------------------------------

struct Primitive {
  enum class Kind { box, cylinder, sphere } kind = Kind::box;
  Box box;
  std::array<double, 3> center{};
  int axis = 2;
  double radius = 0.0, half_length = 0.0;
};

Primitive parse_primitive(const json& j, const std::string& path) {
  if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected a primitive object");
  Primitive p;
  std::string type = as_string(member(j, "type", path + ".type"), path + ".type");
  if (type == "box") {
    p.kind = Primitive::Kind::box;
    p.box = as_box(j, path);
  } else if (type == "cylinder") {
    p.kind = Primitive::Kind::cylinder;
    p.center = as_vec3(member(j, "center", path + ".center"), path + ".center");
    p.radius = as_number(member(j, "radius", path + ".radius"), path + ".radius");
    p.half_length =
        as_number(member(j, "half_length", path + ".half_length"), path + ".half_length");
    std::string axis = j.contains("axis") ? as_string(j["axis"], path + ".axis") : "z";
    p.axis = axis == "x" ? 0 : axis == "y" ? 1 : 2;
    if (axis != "x" && axis != "y" && axis != "z")
      fail(ConfigErrorKind::schema, path + ".axis", "axis must be x, y or z");
    if (p.radius <= 0 || p.half_length <= 0)
      fail(ConfigErrorKind::schema, path, "cylinder radius/half_length must be > 0");
  } else if (type == "sphere") {
    p.kind = Primitive::Kind::sphere;
    p.center = as_vec3(member(j, "center", path + ".center"), path + ".center");
    p.radius = as_number(member(j, "radius", path + ".radius"), path + ".radius");
    if (p.radius <= 0) fail(ConfigErrorKind::schema, path, "sphere radius must be > 0");
  } else {
    fail(ConfigErrorKind::schema, path + ".type", "unknown primitive type '" + type + "'");
  }
  return p;
}

bool primitive_contains(const Primitive& p, const Vec3& q, bool planar) {
  switch (p.kind) {
    case Primitive::Kind::box:
      return box_contains(p.box, q);
    case Primitive::Kind::sphere: {
      Vec3 d = q - Vec3{p.center[0], p.center[1], planar ? q.z : p.center[2]};
      return d.norm() <= p.radius + 1e-9;
    }
    case Primitive::Kind::cylinder: {
      double c[3] = {q.x - p.center[0], q.y - p.center[1], planar ? 0.0 : q.z - p.center[2]};
      double along = c[p.axis];
      c[p.axis] = 0.0;
      double rad = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
      return std::abs(along) <= p.half_length + 1e-9 && rad <= p.radius + 1e-9;
    }
  }
  return false;
}

void primitive_bounds(const Primitive& p, std::array<double, 3>& lo, std::array<double, 3>& hi) {
  switch (p.kind) {
    case Primitive::Kind::box:
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p.box.lo[a]);
        hi[a] = std::max(hi[a], p.box.hi[a]);
      }
      break;
    case Primitive::Kind::sphere:
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], p.center[a] - p.radius);
        hi[a] = std::max(hi[a], p.center[a] + p.radius);
      }
      break;
    case Primitive::Kind::cylinder:
      for (int a = 0; a < 3; ++a) {
        double r = a == p.axis ? p.half_length : p.radius;
        lo[a] = std::min(lo[a], p.center[a] - r);
        hi[a] = std::max(hi[a], p.center[a] + r);
      }
      break;
  }
}

// -- loader ------------------------------------------------------------------

struct Loader {
  std::filesystem::path base_dir;
  GridSpec grid;
  json echo = json::object();

  ScalarField load_field_ref(const json& j, const std::string& path, const GridSpec* expected) {
    std::string rel = as_string(member(j, "field", path + ".field"), path + ".field");
    std::filesystem::path full = base_dir / rel;
    ScalarField f;
    try {
      f = read_field(full.string(), expected);
    } catch (const DimensionError& e) {
      fail(ConfigErrorKind::invariant, path, e.what());
    } catch (const IoError& e) {
      fail(ConfigErrorKind::unresolved_reference, path, e.what());
    }
    return f;
  }

  ScalarField scene_mask(const json& j, const std::string& path) {
    if (j.contains("field")) return load_field_ref(j, path, &grid);
    if (j.contains("box")) {
      ScalarField mask(grid);
      paint_box(mask, as_box(j["box"], path + ".box"));
      return mask;
    }
    fail(ConfigErrorKind::schema, path, "expected {box} or {field}");
  }

  GridSpec parse_grid(const json& j) {
    const std::string path = "grid";
    if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected an object");
    const json& jd = member(j, "dims", path + ".dims");
    if (!jd.is_array() || (jd.size() != 2 && jd.size() != 3))
      fail(ConfigErrorKind::schema, path + ".dims", "expected 2 or 3 integers");
    GridSpec g;
    g.dims = {1, 1, 1};
    for (std::size_t i = 0; i < jd.size(); ++i) g.dims[i] = as_int(jd[i], path + ".dims");
    if (j.contains("spacing")) {
      if (j["spacing"].is_number()) {
        double s = as_number(j["spacing"], path + ".spacing");
        g.spacing = {s, s, s};
      } else {
        g.spacing = as_vec3(j["spacing"], path + ".spacing", 1.0);
      }
    }
    if (j.contains("origin")) g.origin = as_vec3(j["origin"], path + ".origin", 0.0);
    try {
      g.validate();
    } catch (const ParamError& e) {
      fail(ConfigErrorKind::schema, path, e.what());
    }
    return g;
  }

  Orientation parse_orientation(const json& j, const std::string& path, bool planar) {
    Orientation R;
    if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected an orientation object");
    try {
      if (j.contains("quat")) {
        auto q = j["quat"];
        if (!q.is_array() || q.size() != 4)
          fail(ConfigErrorKind::schema, path + ".quat", "expected [w, x, y, z]");
        R = Orientation::from_quat(as_number(q[0], path), as_number(q[1], path),
                                   as_number(q[2], path), as_number(q[3], path));
      } else if (j.contains("axis")) {
        auto axis = as_vec3(j["axis"], path + ".axis");
        double ang = j.contains("angle_deg")
                         ? as_number(j["angle_deg"], path + ".angle_deg") * M_PI / 180.0
                         : as_number(member(j, "angle_rad", path + ".angle_rad"),
                                     path + ".angle_rad");
        R = Orientation::from_axis_angle({axis[0], axis[1], axis[2]}, ang);
      } else if (j.contains("angle_deg")) {
        R = Orientation::from_angle_2d(as_number(j["angle_deg"], path) * M_PI / 180.0);
      } else if (j.contains("angle_rad")) {
        R = Orientation::from_angle_2d(as_number(j["angle_rad"], path));
      } else {
        fail(ConfigErrorKind::schema, path, "expected quat, axis+angle, or angle");
      }
    } catch (const ParamError& e) {
      fail(ConfigErrorKind::schema, path, e.what());
    }
    if (planar && !R.is_planar())
      fail(ConfigErrorKind::invariant, path, "2D scenes require z-axis rotations");
    return R;
  }

  // Lattice-anchored grid covering `lo..hi` with the scene spacing (tool
  // grids must sit on the translation lattice).
  GridSpec anchored_grid(const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
    GridSpec g;
    g.spacing = grid.spacing;
    for (int a = 0; a < 3; ++a) {
      double s = g.spacing[a];
      long long c0 = static_cast<long long>(std::floor(lo[a] / s - 0.5 + 1e-9)) + 1;
      long long c1 = static_cast<long long>(std::ceil(hi[a] / s + 0.5 - 1e-9)) - 1;
      if (c1 < c0) c1 = c0;
      g.dims[a] = static_cast<int>(c1 - c0 + 1);
      g.origin[a] = s * static_cast<double>(c0);
    }
    if (grid.is_2d()) {
      g.dims[2] = 1;
      g.origin[2] = grid.origin[2];
    }
    return g;
  }

  ScalarField voxelize_primitives(const std::vector<Primitive>& prims, const GridSpec& g) {
    ScalarField mask(g);
    bool planar = g.is_2d();
    for (int z = 0; z < g.dims[2]; ++z)
      for (int y = 0; y < g.dims[1]; ++y)
        for (int x = 0; x < g.dims[0]; ++x) {
          Vec3 c = g.center(x, y, z);
          for (const Primitive& p : prims)
            if (primitive_contains(p, c, planar)) {
              mask.at(x, y, z) = 1.0;
              break;
            }
        }
    return mask;
  }

  ToolAssembly parse_tool(const json& j, const std::string& path) {
    if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected a tool object");
    ToolAssembly tool;
    tool.name = j.contains("name") ? as_string(j["name"], path + ".name") : path;

    auto parse_part = [&](const char* key, std::vector<Primitive>& prims, bool& is_field,
                          ScalarField& field) {
      std::string ppath = path + "." + key;
      if (!j.contains(key)) {
        is_field = false;
        return false;
      }
      const json& part = j[key];
      if (part.is_object() && part.contains("field")) {
        field = load_field_ref(part, ppath, nullptr);
        is_field = true;
        return true;
      }
      const json* arr = nullptr;
      if (part.is_array())
        arr = &part;
      else if (part.is_object() && part.contains("primitives"))
        arr = &part["primitives"];
      else
        fail(ConfigErrorKind::schema, ppath, "expected {field}, {primitives} or an array");
      for (std::size_t i = 0; i < arr->size(); ++i)
        prims.push_back(parse_primitive((*arr)[i], ppath + "[" + std::to_string(i) + "]"));
      is_field = false;
      return true;
    };

    std::vector<Primitive> holder_prims, cutter_prims;
    bool holder_is_field = false, cutter_is_field = false;
    ScalarField holder_field, cutter_field;
    bool has_holder = parse_part("holder", holder_prims, holder_is_field, holder_field);
    if (!parse_part("cutter", cutter_prims, cutter_is_field, cutter_field))
      fail(ConfigErrorKind::schema, path + ".cutter", "missing required entry");

    // Tool grid: explicit, from a referenced field, or the bounds of the
    // primitives.
    GridSpec tg;
    if (cutter_is_field)
      tg = cutter_field.spec();
    else if (holder_is_field)
      tg = holder_field.spec();
    else if (j.contains("grid")) {
      const json& jg = j["grid"];
      const json& jd = member(jg, "dims", path + ".grid.dims");
      if (!jd.is_array() || (jd.size() != 2 && jd.size() != 3))
        fail(ConfigErrorKind::schema, path + ".grid.dims", "expected 2 or 3 integers");
      tg.dims = {1, 1, 1};
      for (std::size_t i = 0; i < jd.size(); ++i)
        tg.dims[i] = as_int(jd[i], path + ".grid.dims");
      tg.spacing = grid.spacing;
      tg.origin = as_vec3(member(jg, "origin", path + ".grid.origin"), path + ".grid.origin",
                          grid.is_2d() ? grid.origin[2] : 0.0);
    } else {
      std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
      for (const auto& p : holder_prims) primitive_bounds(p, lo, hi);
      for (const auto& p : cutter_prims) primitive_bounds(p, lo, hi);
      if (lo[0] > hi[0])
        fail(ConfigErrorKind::schema, path, "tool has no primitives and no grid");
      if (grid.is_2d()) {
        lo[2] = grid.origin[2];
        hi[2] = grid.origin[2];
      }
      tg = anchored_grid(lo, hi);
    }
    if (!tg.same_spacing(grid))
      fail(ConfigErrorKind::invariant, path, "tool grid spacing must match the scene grid");

    if (cutter_is_field) {
      tool.cutter = std::move(cutter_field);
      if (tool.cutter.spec() != tg)
        fail(ConfigErrorKind::invariant, path + ".cutter", "cutter grid mismatch");
    } else {
      tool.cutter = voxelize_primitives(cutter_prims, tg);
    }
    if (holder_is_field) {
      tool.holder = std::move(holder_field);
      if (tool.holder.spec() != tg)
        fail(ConfigErrorKind::invariant, path + ".holder", "holder grid mismatch");
    } else if (has_holder) {
      tool.holder = voxelize_primitives(holder_prims, tg);
      // Primitive stacks may abut; the cutter wins where they overlap.
      for (std::size_t i = 0; i < tool.holder.size(); ++i)
        if (tool.cutter[i] > 0.0) tool.holder[i] = 0.0;
    } else {
      tool.holder = ScalarField(tg);
    }

    int stride = j.contains("sharp_stride") ? as_int(j["sharp_stride"], path + ".sharp_stride") : 1;
    if (stride < 1) fail(ConfigErrorKind::schema, path + ".sharp_stride", "must be >= 1");
    if (j.contains("sharp_points")) {
      const json& sp = j["sharp_points"];
      if (!sp.is_array() || sp.empty())
        fail(ConfigErrorKind::schema, path + ".sharp_points", "expected a nonempty array");
      for (std::size_t i = 0; i < sp.size(); ++i) {
        auto v = as_vec3(sp[i], path + ".sharp_points", tg.origin[2]);
        tool.sharp_points.push_back({v[0], v[1], v[2]});
      }
    } else {
      tool.sharp_points = default_sharp_points(tool.holder, tool.cutter, stride);
    }

    const json& jor = member(j, "orientations", path + ".orientations");
    if (!jor.is_array() || jor.empty())
      fail(ConfigErrorKind::schema, path + ".orientations", "expected a nonempty array");
    std::vector<Orientation> rots;
    for (std::size_t i = 0; i < jor.size(); ++i)
      rots.push_back(parse_orientation(jor[i], path + ".orientations[" + std::to_string(i) + "]",
                                       grid.is_2d()));
    tool.orientations = make_orientation_set(std::move(rots));

    try {
      tool.validate();
    } catch (const ParamError& e) {
      fail(ConfigErrorKind::invariant, path, e.what());
    }
    return tool;
  }

  void select_nodes(const Box& b, std::vector<std::array<int, 3>>& out) {
    auto nd = node_grid_dims(grid);
    for (int iz = 0; iz < nd[2]; ++iz)
      for (int iy = 0; iy < nd[1]; ++iy)
        for (int ix = 0; ix < nd[0]; ++ix) {
          Vec3 p{grid.origin[0] + (ix - 0.5) * grid.spacing[0],
                 grid.origin[1] + (iy - 0.5) * grid.spacing[1],
                 grid.is_2d() ? grid.origin[2]
                              : grid.origin[2] + (iz - 0.5) * grid.spacing[2]};
          if (box_contains(b, p)) out.push_back({ix, iy, iz});
        }
  }

  LoadCase parse_load(const json& j) {
    const std::string path = "load";
    if (!j.is_object()) fail(ConfigErrorKind::schema, path, "expected an object");
    LoadCase load;
    int ndim = grid_ndim(grid);

    const json& jf = member(j, "fixed", path + ".fixed");
    if (!jf.is_array() || jf.empty())
      fail(ConfigErrorKind::schema, path + ".fixed", "expected a nonempty array");
    for (std::size_t i = 0; i < jf.size(); ++i) {
      std::string ipath = path + ".fixed[" + std::to_string(i) + "]";
      Box b = as_box(member(jf[i], "box", ipath + ".box"), ipath + ".box");
      std::string axes =
          jf[i].contains("axes") ? as_string(jf[i]["axes"], ipath + ".axes") : "xyz";
      std::vector<std::array<int, 3>> nodes;
      select_nodes(b, nodes);
      if (nodes.empty()) fail(ConfigErrorKind::invariant, ipath, "box selects no nodes");
      for (char c : axes) {
        int axis = c == 'x' ? 0 : c == 'y' ? 1 : c == 'z' ? 2 : -1;
        if (axis < 0 || axis >= ndim)
          fail(ConfigErrorKind::schema, ipath + ".axes", "invalid axis for this grid");
        for (const auto& n : nodes)
          load.fixed_dofs.push_back(dof_index(grid, n[0], n[1], n[2], axis));
      }
    }

    const json& jl = member(j, "forces", path + ".forces");
    if (!jl.is_array() || jl.empty())
      fail(ConfigErrorKind::schema, path + ".forces", "expected a nonempty array");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      std::string ipath = path + ".forces[" + std::to_string(i) + "]";
      Box b = as_box(member(jl[i], "box", ipath + ".box"), ipath + ".box");
      auto fv = as_vec3(member(jl[i], "force", ipath + ".force"), ipath + ".force", 0.0);
      std::string mode =
          jl[i].contains("mode") ? as_string(jl[i]["mode"], ipath + ".mode") : "total";
      if (mode != "total" && mode != "per_node")
        fail(ConfigErrorKind::schema, ipath + ".mode", "mode must be total or per_node");
      std::vector<std::array<int, 3>> nodes;
      select_nodes(b, nodes);
      if (nodes.empty()) fail(ConfigErrorKind::invariant, ipath, "box selects no nodes");
      double scale = mode == "total" ? 1.0 / static_cast<double>(nodes.size()) : 1.0;
      for (const auto& n : nodes)
        for (int a = 0; a < ndim; ++a)
          if (fv[a] != 0.0)
            load.forces.push_back({dof_index(grid, n[0], n[1], n[2], a), fv[a] * scale});
    }
    return load;
  }
};

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return as_number(j[key], path + "." + key);
}

int int_or(const json& j, const char* key, int fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return as_int(j[key], path + "." + key);
}

}  // namespace

SceneConfig load_config_from_string(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigErrorKind::parse, "", std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError(ConfigErrorKind::parse, "", "config root must be an object");

  Loader L;
  L.base_dir = base_dir;
  L.grid = L.parse_grid(member(j, "grid", "grid"));

  SceneConfig cfg;
  cfg.scene = Scene::full_domain(L.grid);

  if (j.contains("design_domain"))
    cfg.scene.domain = L.scene_mask(j["design_domain"], "design_domain");

  auto mask_list = [&](const char* key) {
    ScalarField mask(L.grid);
    if (!j.contains(key)) return mask;
    const json& arr = j[key];
    if (!arr.is_array()) fail(ConfigErrorKind::schema, key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ScalarField m = L.scene_mask(arr[i], std::string(key) + "[" + std::to_string(i) + "]");
      mask = implicit_union(mask, m);
    }
    return mask;
  };
  cfg.scene.fixtures = mask_list("fixtures");
  cfg.scene.retained = mask_list("retained_regions");
  cfg.scene.voids = mask_list("void_regions");
  for (std::size_t i = 0; i < cfg.scene.retained.size(); ++i)
    if (cfg.scene.retained[i] > 0.0 && cfg.scene.voids[i] > 0.0)
      fail(ConfigErrorKind::invariant, "retained_regions",
           "retained and void regions overlap");

  if (j.contains("tools")) {
    const json& jt = j["tools"];
    if (!jt.is_array()) fail(ConfigErrorKind::schema, "tools", "expected an array");
    for (std::size_t i = 0; i < jt.size(); ++i)
      cfg.tools.push_back(L.parse_tool(jt[i], "tools[" + std::to_string(i) + "]"));
  }

  if (j.contains("load")) cfg.load = L.parse_load(j["load"]);

  const std::string mpath = "material";
  json jm = j.contains("material") ? j["material"] : json::object();
  cfg.material.youngs_modulus = number_or(jm, "youngs_modulus", 1.0, mpath);
  cfg.material.poisson_ratio = number_or(jm, "poisson_ratio", 0.3, mpath);
  cfg.material.simp_exponent = number_or(jm, "simp_exponent", 3.0, mpath);
  cfg.material.rho_min = number_or(jm, "rho_min", 1e-3, mpath);
  try {
    cfg.material.validate();
  } catch (const ParamError& e) {
    fail(ConfigErrorKind::schema, mpath, e.what());
  }

  const std::string tpath = "to";
  json jt = j.contains("to") ? j["to"] : json::object();
  cfg.to.volume_fraction = number_or(jt, "volume_fraction", 0.5, tpath);
  if (jt.contains("w_acc") && jt["w_acc"].is_string()) {
    if (jt["w_acc"].get<std::string>() != "adaptive")
      fail(ConfigErrorKind::schema, "to.w_acc", "expected a number or \"adaptive\"");
    cfg.to.adaptive_w_acc = true;
    cfg.to.w_acc = 0.1;
  } else {
    cfg.to.w_acc = number_or(jt, "w_acc", 0.0, tpath);
  }
  cfg.to.lambda = number_or(jt, "lambda", 0.01, tpath);
  cfg.to.beta = number_or(jt, "beta", L.grid.is_2d() ? 2.0 : 8.0, tpath);
  cfg.to.tau = number_or(jt, "tau", 0.5, tpath);
  cfg.to.filter_radius = number_or(jt, "filter_radius", 1.5 * L.grid.spacing[0], tpath);
  cfg.to.move_limit = number_or(jt, "move_limit", 0.2, tpath);
  cfg.to.oc_damping = number_or(jt, "oc_damping", 0.5, tpath);
  cfg.to.delta = number_or(jt, "delta", 1e-3 * volume_integral(cfg.scene.domain), tpath);
  cfg.to.max_iter = int_or(jt, "max_iter", 100, tpath);
  cfg.to.secluded_tolerance = number_or(jt, "secluded_tolerance", 0.01, tpath);
  cfg.to.imf_stride = int_or(jt, "imf_stride", 1, tpath);
  try {
    cfg.to.validate();
  } catch (const ParamError& e) {
    std::string key = "to";
    std::string msg = e.what();
    auto space = msg.find(' ');
    if (space != std::string::npos) key = "to." + msg.substr(0, space);
    fail(ConfigErrorKind::schema, key, msg);
  }

  // Canonical echo with every default filled, for the run manifest.
  json echo = j;
  echo["material"] = {{"youngs_modulus", cfg.material.youngs_modulus},
                      {"poisson_ratio", cfg.material.poisson_ratio},
                      {"simp_exponent", cfg.material.simp_exponent},
                      {"rho_min", cfg.material.rho_min}};
  echo["to"] = {{"volume_fraction", cfg.to.volume_fraction},
                {"w_acc", cfg.to.adaptive_w_acc ? json("adaptive") : json(cfg.to.w_acc)},
                {"lambda", cfg.to.lambda},
                {"beta", cfg.to.beta},
                {"tau", cfg.to.tau},
                {"filter_radius", cfg.to.filter_radius},
                {"move_limit", cfg.to.move_limit},
                {"oc_damping", cfg.to.oc_damping},
                {"delta", cfg.to.delta},
                {"max_iter", cfg.to.max_iter},
                {"secluded_tolerance", cfg.to.secluded_tolerance},
                {"imf_stride", cfg.to.imf_stride}};
  cfg.resolved = echo.dump(2);
  return cfg;
}

SceneConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(ConfigErrorKind::unresolved_reference, "", "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return load_config_from_string(text.str(),
                                 std::filesystem::path(path).parent_path().string());
}

std::string config_hash(const SceneConfig& cfg) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : cfg.resolved) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace voxmill
