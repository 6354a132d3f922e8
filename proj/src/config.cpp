#include "nsch/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nsch {

namespace {

using json = nlohmann::json;

/// Reads members of one JSON object and rejects keys nobody asked for.
class Section {
public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json* get(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const char* key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }
  void integer(const char* key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void vec2(const char* key, Vec2& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number())
        fail(key, "expected [x, y]");
      out = Vec2((*v)[0].get<double>(), (*v)[1].get<double>());
      if (!out.allFinite()) fail(key, "must be finite");
    }
  }
  void int_pair(const char* key, std::array<int, 2>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() || !(*v)[1].is_number_integer())
        fail(key, "expected [nx, ny]");
      out = {(*v)[0].get<int>(), (*v)[1].get<int>()};
    }
  }
  void bool_pair(const char* key, std::array<bool, 2>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_boolean() || !(*v)[1].is_boolean())
        fail(key, "expected [bool, bool]");
      out = {(*v)[0].get<bool>(), (*v)[1].get<bool>()};
    }
  }
  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = get(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) fail(key, "expected an array of numbers");
        out.push_back(x.get<double>());
      }
    }
  }

  /// Throws on keys that were never requested.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(name_ + ": unknown key '" + it.key() + "'");
  }

  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError(name_ + "." + key + ": " + what);
  }

private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be positive");
}

void read_geometry(Section s, GeometrySpec& g) {
  s.string("type", g.type);
  s.number("length", g.length);
  s.number("height", g.height);
  s.vec2("center", g.center);
  s.number("radius", g.radius);
  s.vec2("lo", g.lo);
  s.vec2("hi", g.hi);
  if (const json* obs = s.get("obstacles")) {
    if (!obs->is_array()) throw ConfigError("geometry.obstacles: expected an array");
    g.obstacles.clear();
    for (size_t i = 0; i < obs->size(); ++i) {
      Section o((*obs)[i], "geometry.obstacles[" + std::to_string(i) + "]");
      Obstacle ob;
      o.string("shape", ob.shape);
      o.vec2("center", ob.center);
      o.number("radius", ob.radius);
      o.vec2("lo", ob.lo);
      o.vec2("hi", ob.hi);
      o.finish();
      g.obstacles.push_back(ob);
    }
  }
  s.finish();
}

void read_mesh(Section s, MeshConfig& m) {
  s.number("h", m.h);
  s.vec2("origin", m.origin);
  s.vec2("extents", m.extents);
  s.int_pair("counts", m.counts);
  s.number("theta", m.theta);
  s.bool_pair("periodic", m.periodic);
  s.integer("degree", m.degree);
  s.integer("depth", m.depth);
  s.integer("gauss_order", m.gauss_order);
  s.finish();
}

void read_model(Section s, ModelParams::Values& v) {
  s.number("rho1", v.rho1);
  s.number("rho2", v.rho2);
  s.number("eta1", v.eta1);
  s.number("eta2", v.eta2);
  const bool has12 = s.has("sigma12"), has_sigma = s.has("sigma");
  s.number("sigma12", v.sigma12);
  if (has_sigma) {
    double sigma = 0.0;
    s.number("sigma", sigma);
    const double from_sigma = sigma12_from_sigma(sigma);
    if (has12 && std::abs(from_sigma - v.sigma12) > 1e-12 * std::abs(v.sigma12))
      throw ConfigError("model: sigma and sigma12 both given but sigma != 3 sigma12 / (2 sqrt 2)");
    v.sigma12 = from_sigma;
  }
  s.number("epsilon", v.epsilon);
  s.number("mobility", v.mobility);
  s.number("alpha_gn", v.alpha_gn);
  s.number("sigma_s1", v.sigma_s1);
  s.number("sigma_s2", v.sigma_s2);
  s.number("volume_ratio", v.volume_ratio);
  s.vec2("body_force", v.body_force);
  s.finish();
}

void read_boundary(Section s, ScenarioConfig& c) {
  if (const json* tags = s.get("tags")) {
    if (!tags->is_array()) throw ConfigError("boundary.tags: expected an array");
    c.tags.clear();
    for (size_t i = 0; i < tags->size(); ++i) {
      Section t((*tags)[i], "boundary.tags[" + std::to_string(i) + "]");
      std::string side, tag;
      t.string("side", side);
      t.string("tag", tag);
      if (side.empty() || tag.empty()) throw ConfigError("boundary.tags[" + std::to_string(i) + "]: side and tag required");
      TagSegment seg{parse_side(side), parse_boundary_tag(tag), std::nullopt};
      if (const json* r = t.get("range")) {
        if (!r->is_array() || r->size() != 2 || !(*r)[0].is_number() || !(*r)[1].is_number())
          throw ConfigError("boundary.tags[" + std::to_string(i) + "].range: expected [from, to]");
        seg.range = std::make_pair((*r)[0].get<double>(), (*r)[1].get<double>());
      }
      t.finish();
      c.tags.push_back(seg);
    }
  }
  if (const json* w = s.get("wall")) {
    Section ws(*w, "boundary.wall");
    ws.string("profile", c.wall.profile);
    ws.number("speed", c.wall.speed);
    ws.number("ramp_time", c.wall.ramp_time);
    ws.finish();
  }
  if (const json* in = s.get("inflow")) {
    Section is(*in, "boundary.inflow");
    is.string("velocity", c.inflow.velocity);
    is.vec2("value", c.inflow.value);
    is.number("max_speed", c.inflow.max_speed);
    is.number("y_lo", c.inflow.y_lo);
    is.number("y_hi", c.inflow.y_hi);
    is.number("phase_left", c.inflow.phase_left);
    is.number("phase_right", c.inflow.phase_right);
    is.finish();
  }
  s.finish();
}

void read_initial(Section s, InitialConfig& ic) {
  s.string("phase", ic.phase);
  s.number("value", ic.value);
  s.number("x0", ic.x0);
  s.number("left_phase", ic.left_phase);
  s.vec2("center", ic.center);
  s.number("radius", ic.radius);
  s.number("inside_phase", ic.inside_phase);
  s.numbers("positions", ic.positions);
  s.finish();
}

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

}  // namespace

void validate_config(const ScenarioConfig& c, bool for_solver) {
  if (c.mode != "steady" && c.mode != "transient") throw ConfigError("mode must be 'steady' or 'transient'");
  const ModelParams params(c.model);  // model ranges
  if (for_solver && !params.neutral_wetting())
    throw ConfigError("model: sigma_s1 != sigma_s2; solver runs support neutral wetting only (sigma_s1 = sigma_s2)");
  c.stab.validate();
  positive(c.time.dt0, "time.dt0");
  positive(c.time.t_end, "time.t_end");
  positive(c.time.steady_tol, "time.steady_tol");
  if (c.time.restore_after < 1) throw ConfigError("time.restore_after must be at least 1");
  if (c.time.max_halvings < 0) throw ConfigError("time.max_halvings must be nonnegative");
  if (c.time.steady_window < 1) throw ConfigError("time.steady_window must be at least 1");
  if (c.time.max_steps < 1) throw ConfigError("time.max_steps must be at least 1");
  positive(c.solver.rel_tol, "solver.rel_tol");
  positive(c.solver.abs_tol, "solver.abs_tol");
  positive(c.solver.linear_tol, "solver.linear_tol");
  if (c.solver.max_iterations < 1) throw ConfigError("solver.max_iterations must be at least 1");
  if (c.mesh.h < 0.0) throw ConfigError("mesh.h must be nonnegative");
  if (c.mesh.degree < 1) throw ConfigError("mesh.degree must be at least 1");
  if (c.mesh.depth < 0 || c.mesh.depth > 12) throw ConfigError("mesh.depth must lie in [0, 12]");
  if (c.mesh.gauss_order < 1) throw ConfigError("mesh.gauss_order must be at least 1");
  if (c.wall.speed < 0.0) throw ConfigError("boundary.wall.speed must be nonnegative");
  if (c.threads < 0) throw ConfigError("threads must be nonnegative");
  if (c.output.interval < 0) throw ConfigError("output.interval must be nonnegative");
  if (c.output.grid[0] < 2 || c.output.grid[1] < 2) throw ConfigError("output.grid needs at least 2 points per axis");
  const MeshSpec m = resolve_mesh(c);
  if (!(m.extents.x() > 0.0 && m.extents.y() > 0.0)) throw ConfigError("mesh.extents must be positive");
  if (m.counts[0] < 1 || m.counts[1] < 1) throw ConfigError("mesh.counts must be positive");
  for (const auto& t : c.tags)
    if (m.periodic[(t.side == Side::Left || t.side == Side::Right) ? 0 : 1])
      throw ConfigError(std::string("boundary.tags: side '") + to_string(t.side) + "' is periodic");
  (void)build_level_set(c);
  // Closes the remaining enum-like strings. The solver setup itself insists
  // on neutral wetting, so a non-solver check runs it on a neutral copy.
  ScenarioConfig neutral = c;
  neutral.model.sigma_s2 = neutral.model.sigma_s1;
  (void)build_problem(neutral);
}

ScenarioConfig parse_config(const std::string& text, bool for_solver) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  Section top(root, "config");
  std::string name = "custom";
  top.string("scenario", name);
  ScenarioConfig c = default_config(name);
  top.string("mode", c.mode);
  top.integer("threads", c.threads);
  if (const json* j = top.get("geometry")) read_geometry(Section(*j, "geometry"), c.geometry);
  if (const json* j = top.get("mesh")) read_mesh(Section(*j, "mesh"), c.mesh);
  if (const json* j = top.get("model")) read_model(Section(*j, "model"), c.model);
  if (const json* j = top.get("stabilization")) {
    Section s(*j, "stabilization");
    s.number("beta", c.stab.beta);
    s.number("gamma_skeleton", c.stab.gamma_skeleton);
    s.number("gamma_ghost", c.stab.gamma_ghost);
    s.finish();
  }
  if (const json* j = top.get("time")) {
    Section s(*j, "time");
    s.number("dt0", c.time.dt0);
    s.number("t_end", c.time.t_end);
    s.integer("restore_after", c.time.restore_after);
    s.integer("max_halvings", c.time.max_halvings);
    s.number("steady_tol", c.time.steady_tol);
    s.integer("steady_window", c.time.steady_window);
    s.integer("max_steps", c.time.max_steps);
    s.finish();
  }
  if (const json* j = top.get("boundary")) read_boundary(Section(*j, "boundary"), c);
  if (const json* j = top.get("initial")) read_initial(Section(*j, "initial"), c.initial);
  if (const json* j = top.get("solver")) {
    Section s(*j, "solver");
    s.number("rel_tol", c.solver.rel_tol);
    s.number("abs_tol", c.solver.abs_tol);
    s.integer("max_iterations", c.solver.max_iterations);
    s.number("linear_tol", c.solver.linear_tol);
    s.finish();
  }
  if (const json* j = top.get("output")) {
    Section s(*j, "output");
    s.string("directory", c.output.directory);
    s.integer("interval", c.output.interval);
    s.int_pair("grid", c.output.grid);
    s.finish();
  }
  top.finish();
  validate_config(c, for_solver);
  return c;
}

ScenarioConfig load_config(const std::string& path, bool for_solver) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), for_solver);
}

std::string serialize_config(const ScenarioConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["mode"] = c.mode;
  j["threads"] = c.threads;

  const GeometrySpec& g = c.geometry;
  json obs = json::array();
  for (const auto& o : g.obstacles)
    obs.push_back({{"shape", o.shape}, {"center", vec(o.center)}, {"radius", o.radius}, {"lo", vec(o.lo)}, {"hi", vec(o.hi)}});
  j["geometry"] = {{"type", g.type},         {"length", g.length}, {"height", g.height}, {"center", vec(g.center)},
                   {"radius", g.radius},     {"lo", vec(g.lo)},    {"hi", vec(g.hi)},    {"obstacles", obs}};

  const MeshConfig& m = c.mesh;
  j["mesh"] = {{"h", m.h},
               {"origin", vec(m.origin)},
               {"extents", vec(m.extents)},
               {"counts", json::array({m.counts[0], m.counts[1]})},
               {"theta", m.theta},
               {"periodic", json::array({m.periodic[0], m.periodic[1]})},
               {"degree", m.degree},
               {"depth", m.depth},
               {"gauss_order", m.gauss_order}};

  const ModelParams::Values& v = c.model;
  j["model"] = {{"rho1", v.rho1},         {"rho2", v.rho2},         {"eta1", v.eta1},
                {"eta2", v.eta2},         {"sigma12", v.sigma12},   {"epsilon", v.epsilon},
                {"mobility", v.mobility}, {"alpha_gn", v.alpha_gn}, {"sigma_s1", v.sigma_s1},
                {"sigma_s2", v.sigma_s2}, {"volume_ratio", v.volume_ratio}, {"body_force", vec(v.body_force)}};
  j["stabilization"] = {{"beta", c.stab.beta}, {"gamma_skeleton", c.stab.gamma_skeleton}, {"gamma_ghost", c.stab.gamma_ghost}};
  j["time"] = {{"dt0", c.time.dt0},           {"t_end", c.time.t_end},           {"restore_after", c.time.restore_after},
               {"max_halvings", c.time.max_halvings}, {"steady_tol", c.time.steady_tol}, {"steady_window", c.time.steady_window},
               {"max_steps", c.time.max_steps}};

  json tags = json::array();
  for (const auto& t : c.tags) {
    json e = {{"side", to_string(t.side)}, {"tag", to_string(t.tag)}};
    if (t.range) e["range"] = json::array({t.range->first, t.range->second});
    tags.push_back(e);
  }
  j["boundary"] = {{"tags", tags},
                   {"wall", {{"profile", c.wall.profile}, {"speed", c.wall.speed}, {"ramp_time", c.wall.ramp_time}}},
                   {"inflow",
                    {{"velocity", c.inflow.velocity},
                     {"value", vec(c.inflow.value)},
                     {"max_speed", c.inflow.max_speed},
                     {"y_lo", c.inflow.y_lo},
                     {"y_hi", c.inflow.y_hi},
                     {"phase_left", c.inflow.phase_left},
                     {"phase_right", c.inflow.phase_right}}}};

  const InitialConfig& ic = c.initial;
  j["initial"] = {{"phase", ic.phase},           {"value", ic.value},   {"x0", ic.x0},
                  {"left_phase", ic.left_phase}, {"center", vec(ic.center)}, {"radius", ic.radius},
                  {"inside_phase", ic.inside_phase}, {"positions", ic.positions}};
  j["solver"] = {{"rel_tol", c.solver.rel_tol},
                 {"abs_tol", c.solver.abs_tol},
                 {"max_iterations", c.solver.max_iterations},
                 {"linear_tol", c.solver.linear_tol}};
  j["output"] = {{"directory", c.output.directory},
                 {"interval", c.output.interval},
                 {"grid", json::array({c.output.grid[0], c.output.grid[1]})}};
  return j.dump(2) + "\n";
}

}  // namespace nsch
