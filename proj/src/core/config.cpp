#include "core/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "core/error.hpp"
#include "core/extraction.hpp"
#include "core/mesh_io.hpp"

namespace michell {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  fail(ErrorCode::Config, "config: " + key + ": " + why);
}

void check_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object())
    bad(where.empty() ? "<root>" : where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

double get_number(const json& j, const std::string& key, const std::string& where, double dflt) {
  if (!j.contains(key))
    return dflt;
  if (!j[key].is_number())
    bad(where + key, "expected a number");
  return j[key].get<double>();
}

bool get_bool(const json& j, const std::string& key, const std::string& where, bool dflt) {
  if (!j.contains(key))
    return dflt;
  if (!j[key].is_boolean())
    bad(where + key, "expected a boolean");
  return j[key].get<bool>();
}

Vec3 get_vec3(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
    bad(key, "expected an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

Selector selector_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
    bad(where, "selector needs a string \"type\"");
  const std::string type = j["type"];
  auto indices = [&](const char* key) {
    check_keys(j, where, {"type", key});
    if (!j.contains(key) || !j[key].is_array())
      bad(where + "." + key, "expected an array of indices");
    std::vector<int> ids;
    for (const auto& x : j[key]) {
      if (!x.is_number_integer())
        bad(where + "." + key, "expected integers");
      ids.push_back(x.get<int>());
    }
    return ids;
  };
  if (type == "box") {
    check_keys(j, where, {"type", "min", "max"});
    if (!j.contains("min") || !j.contains("max"))
      bad(where, "box needs min and max");
    return Selector::box(get_vec3(j["min"], where + ".min"), get_vec3(j["max"], where + ".max"));
  }
  if (type == "sphere") {
    check_keys(j, where, {"type", "center", "radius"});
    if (!j.contains("center") || !j.contains("radius") || !j["radius"].is_number())
      bad(where, "sphere needs center and radius");
    return Selector::sphere(get_vec3(j["center"], where + ".center"), j["radius"].get<double>());
  }
  if (type == "vertices")
    return Selector::vertices(indices("indices"));
  if (type == "faces")
    return Selector::faces(indices("indices"));
  bad(where + ".type", "unknown selector type '" + type + "'");
}

ordered_json selector_json(const Selector& s) {
  ordered_json j;
  switch (s.kind) {
  case Selector::Kind::Box:
    j["type"] = "box";
    j["min"] = vec3_json(s.min);
    j["max"] = vec3_json(s.max);
    break;
  case Selector::Kind::Sphere:
    j["type"] = "sphere";
    j["center"] = vec3_json(s.center);
    j["radius"] = s.radius;
    break;
  case Selector::Kind::Vertices:
  case Selector::Kind::Faces:
    j["type"] = s.kind == Selector::Kind::Vertices ? "vertices" : "faces";
    j["indices"] = s.indices;
    break;
  }
  return j;
}

} // namespace

std::filesystem::path PipelineConfig::resolved_mesh_path() const {
  std::filesystem::path p(mesh_path);
  return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path PipelineConfig::resolved_output_dir() const {
  std::filesystem::path p(output_dir);
  return p.is_absolute() ? p : base_dir / p;
}

void PipelineConfig::validate(bool check_files) const {
  if (mesh_path.empty())
    bad("mesh.path", "required");
  if (mesh_format != "auto" && !parse_mesh_format(mesh_format))
    bad("mesh.format", "expected auto, medit or tetgen");
  if (check_files) {
    const auto p = resolved_mesh_path();
    const bool exists = std::filesystem::exists(p) ||
                        std::filesystem::exists(std::filesystem::path(p).replace_extension(".node"));
    if (!exists)
      bad("mesh.path", "file not found: " + p.string());
  }
  try {
    material.validate();
  } catch (const Error& e) {
    bad("material", e.what());
  }
  if (bcs.dirichlet.empty())
    bad("boundary_conditions.dirichlet", "at least one support is required");
  for (const auto& d : bcs.dirichlet)
    if (d.selector.kind == Selector::Kind::Sphere && !(d.selector.radius > 0))
      bad("boundary_conditions.dirichlet", "sphere radius must be positive");
  if (frames.outer_iterations < 1 || frames.outer_iterations > 1000)
    bad("frames.outer_iterations", "must lie in [1, 1000]");
  if (!(frames.alpha0_factor > 0))
    bad("frames.alpha0_factor", "must be positive");
  if (!(frames.alpha_decay > 0 && frames.alpha_decay < 1))
    bad("frames.alpha_decay", "must lie in (0, 1)");
  if (frames.inner.max_iterations < 1)
    bad("frames.max_inner_iterations", "must be at least 1");
  if (!(frames.inner.gradient_tolerance > 0))
    bad("frames.gradient_tolerance", "must be positive");
  if (!(beta > 0))
    bad("parametrization.beta", "must be positive");
  if (!(rho > 0))
    bad("parametrization.rho", "must be positive");
  if (!(epsilon > 2 * kIntegerGuard && epsilon < 0.5))
    bad("extraction.epsilon", "must lie in (2e-9, 0.5)");
  if (!(feature_cos_threshold > -1 && feature_cos_threshold <= 1))
    bad("extraction.feature_cos_threshold", "must lie in (-1, 1]");
  if (!(simplify.length_threshold >= 0))
    bad("simplify.length_threshold", "must be non-negative (0 selects the automatic threshold)");
  if (!(simplify.auto_threshold_factor >= 0))
    bad("simplify.auto_threshold_factor", "must be non-negative");
  try {
    radii.validate();
  } catch (const Error& e) {
    bad("geometry", e.what());
  }
  if (geometry.sides < 3 || geometry.sides > 256)
    bad("geometry.sides", "must lie in [3, 256]");
  if (output_dir.empty())
    bad("output_dir", "must not be empty");
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  check_keys(j, "", {"mesh", "material", "boundary_conditions", "frames", "parametrization",
                     "extraction", "simplify", "geometry", "output_dir"});
  if (!j.contains("mesh"))
    bad("mesh", "required");
  const json& mesh = j["mesh"];
  check_keys(mesh, "mesh", {"path", "format"});
  if (!mesh.contains("path") || !mesh["path"].is_string())
    bad("mesh.path", "expected a string");
  c.mesh_path = mesh["path"];
  if (mesh.contains("format")) {
    if (!mesh["format"].is_string())
      bad("mesh.format", "expected a string");
    c.mesh_format = mesh["format"];
  }

  if (j.contains("material")) {
    const json& m = j["material"];
    check_keys(m, "material", {"young_modulus", "poisson_ratio", "density", "yield_strength"});
    c.material.young_modulus = get_number(m, "young_modulus", "material.", c.material.young_modulus);
    c.material.poisson_ratio = get_number(m, "poisson_ratio", "material.", c.material.poisson_ratio);
    c.material.density = get_number(m, "density", "material.", c.material.density);
    c.material.yield_strength = get_number(m, "yield_strength", "material.", c.material.yield_strength);
  }

  if (!j.contains("boundary_conditions"))
    bad("boundary_conditions", "required");
  const json& b = j["boundary_conditions"];
  check_keys(b, "boundary_conditions", {"dirichlet", "neumann", "gravity"});
  if (b.contains("dirichlet")) {
    if (!b["dirichlet"].is_array())
      bad("boundary_conditions.dirichlet", "expected an array");
    for (std::size_t i = 0; i < b["dirichlet"].size(); ++i) {
      const json& d = b["dirichlet"][i];
      const std::string where = "boundary_conditions.dirichlet[" + std::to_string(i) + "]";
      check_keys(d, where, {"selector", "axes", "displacement"});
      if (!d.contains("selector"))
        bad(where + ".selector", "required");
      DirichletCondition dc;
      dc.selector = selector_from(d["selector"], where + ".selector");
      if (d.contains("axes")) {
        const json& a = d["axes"];
        if (!a.is_array() || a.size() != 3)
          bad(where + ".axes", "expected 3 booleans");
        for (int k = 0; k < 3; ++k) {
          if (!a[k].is_boolean())
            bad(where + ".axes", "expected 3 booleans");
          dc.axes[k] = a[k].get<bool>();
        }
      }
      if (d.contains("displacement"))
        dc.displacement = get_vec3(d["displacement"], where + ".displacement");
      c.bcs.dirichlet.push_back(dc);
    }
  }
  if (b.contains("neumann")) {
    if (!b["neumann"].is_array())
      bad("boundary_conditions.neumann", "expected an array");
    for (std::size_t i = 0; i < b["neumann"].size(); ++i) {
      const json& n = b["neumann"][i];
      const std::string where = "boundary_conditions.neumann[" + std::to_string(i) + "]";
      check_keys(n, where, {"selector", "force"});
      if (!n.contains("selector") || !n.contains("force"))
        bad(where, "needs selector and force");
      c.bcs.neumann.push_back(
          {selector_from(n["selector"], where + ".selector"), get_vec3(n["force"], where + ".force")});
    }
  }
  if (b.contains("gravity") && !b["gravity"].is_null())
    c.bcs.gravity = get_vec3(b["gravity"], "boundary_conditions.gravity");

  if (j.contains("frames")) {
    const json& f = j["frames"];
    check_keys(f, "frames", {"alpha0_factor", "alpha_decay", "outer_iterations", "early_stop",
                             "max_inner_iterations", "gradient_tolerance"});
    c.frames.alpha0_factor = get_number(f, "alpha0_factor", "frames.", c.frames.alpha0_factor);
    c.frames.alpha_decay = get_number(f, "alpha_decay", "frames.", c.frames.alpha_decay);
    if (f.contains("outer_iterations")) {
      if (!f["outer_iterations"].is_number_integer())
        bad("frames.outer_iterations", "expected an integer");
      c.frames.outer_iterations = f["outer_iterations"];
    }
    c.frames.early_stop = get_bool(f, "early_stop", "frames.", c.frames.early_stop);
    if (f.contains("max_inner_iterations")) {
      if (!f["max_inner_iterations"].is_number_integer())
        bad("frames.max_inner_iterations", "expected an integer");
      c.frames.inner.max_iterations = f["max_inner_iterations"];
    }
    c.frames.inner.gradient_tolerance =
        get_number(f, "gradient_tolerance", "frames.", c.frames.inner.gradient_tolerance);
  }
  if (j.contains("parametrization")) {
    const json& p = j["parametrization"];
    check_keys(p, "parametrization", {"beta", "rho"});
    c.beta = get_number(p, "beta", "parametrization.", c.beta);
    c.rho = get_number(p, "rho", "parametrization.", c.rho);
  }
  if (j.contains("extraction")) {
    const json& e = j["extraction"];
    check_keys(e, "extraction", {"epsilon", "feature_cos_threshold"});
    c.epsilon = get_number(e, "epsilon", "extraction.", c.epsilon);
    c.feature_cos_threshold =
        get_number(e, "feature_cos_threshold", "extraction.", c.feature_cos_threshold);
  }
  if (j.contains("simplify")) {
    const json& s = j["simplify"];
    check_keys(s, "simplify", {"length_threshold", "auto_threshold_factor", "remove_interior_hits",
                               "simplify_boundary", "preserve_features"});
    auto& o = c.simplify;
    o.length_threshold = get_number(s, "length_threshold", "simplify.", o.length_threshold);
    o.auto_threshold_factor =
        get_number(s, "auto_threshold_factor", "simplify.", o.auto_threshold_factor);
    o.remove_interior_hits = get_bool(s, "remove_interior_hits", "simplify.", o.remove_interior_hits);
    o.simplify_boundary = get_bool(s, "simplify_boundary", "simplify.", o.simplify_boundary);
    o.preserve_features = get_bool(s, "preserve_features", "simplify.", o.preserve_features);
  }
  if (j.contains("geometry")) {
    const json& g = j["geometry"];
    check_keys(g, "geometry", {"radius", "family_radius", "sides", "node_spheres"});
    c.radii.default_radius = get_number(g, "radius", "geometry.", c.radii.default_radius);
    if (g.contains("family_radius")) {
      const json& fr = g["family_radius"];
      if (!fr.is_object())
        bad("geometry.family_radius", "expected an object");
      for (auto it = fr.begin(); it != fr.end(); ++it) {
        auto fam = parse_family(it.key());
        if (!fam)
          bad("geometry.family_radius." + it.key(), "unknown element family");
        if (!it.value().is_number())
          bad("geometry.family_radius." + it.key(), "expected a number");
        c.radii.family_radius[*fam] = it.value().get<double>();
      }
    }
    if (g.contains("sides")) {
      if (!g["sides"].is_number_integer())
        bad("geometry.sides", "expected an integer");
      c.geometry.sides = g["sides"];
    }
    c.geometry.node_spheres = get_bool(g, "node_spheres", "geometry.", c.geometry.node_spheres);
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string())
      bad("output_dir", "expected a string");
    c.output_dir = j["output_dir"];
  }
  return c;
}

ordered_json PipelineConfig::to_json() const {
  ordered_json j;
  j["mesh"] = {{"path", mesh_path}, {"format", mesh_format}};
  j["material"] = {{"young_modulus", material.young_modulus},
                   {"poisson_ratio", material.poisson_ratio},
                   {"density", material.density},
                   {"yield_strength", material.yield_strength}};
  ordered_json dir = ordered_json::array();
  for (const auto& d : bcs.dirichlet)
    dir.push_back({{"selector", selector_json(d.selector)},
                   {"axes", {d.axes[0], d.axes[1], d.axes[2]}},
                   {"displacement", vec3_json(d.displacement)}});
  ordered_json neu = ordered_json::array();
  for (const auto& n : bcs.neumann)
    neu.push_back({{"selector", selector_json(n.selector)}, {"force", vec3_json(n.force)}});
  j["boundary_conditions"] = {{"dirichlet", dir},
                              {"neumann", neu},
                              {"gravity", bcs.gravity ? vec3_json(*bcs.gravity) : ordered_json()}};
  j["frames"] = {{"alpha0_factor", frames.alpha0_factor},
                 {"alpha_decay", frames.alpha_decay},
                 {"outer_iterations", frames.outer_iterations},
                 {"early_stop", frames.early_stop},
                 {"max_inner_iterations", frames.inner.max_iterations},
                 {"gradient_tolerance", frames.inner.gradient_tolerance}};
  j["parametrization"] = {{"beta", beta}, {"rho", rho}};
  j["extraction"] = {{"epsilon", epsilon}, {"feature_cos_threshold", feature_cos_threshold}};
  j["simplify"] = {{"length_threshold", simplify.length_threshold},
                   {"auto_threshold_factor", simplify.auto_threshold_factor},
                   {"remove_interior_hits", simplify.remove_interior_hits},
                   {"simplify_boundary", simplify.simplify_boundary},
                   {"preserve_features", simplify.preserve_features}};
  ordered_json fr = ordered_json::object();
  for (const auto& [f, r] : radii.family_radius)
    fr[to_string(f)] = r;
  j["geometry"] = {{"radius", radii.default_radius},
                   {"family_radius", fr},
                   {"sides", geometry.sides},
                   {"node_spheres", geometry.node_spheres}};
  j["output_dir"] = output_dir;
  return j;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::Config, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, "config " + path.string() + ": " + e.what());
  }
  PipelineConfig c = from_json(j);
  c.base_dir = std::filesystem::absolute(path).parent_path();
  return c;
}

void PipelineConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out)
    fail(ErrorCode::Io, "cannot write " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out)
    fail(ErrorCode::Io, "failed writing " + path.string());
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string PipelineConfig::hash() const { return fnv1a_hex(to_json().dump()); }

} // namespace michell
