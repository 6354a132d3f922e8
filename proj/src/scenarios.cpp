#include "nsch/scenarios.hpp"

#include <cmath>
#include <numbers>

namespace nsch {

namespace {

// Micrometres to metres, rounded like the decimal literal would be.
constexpr double um(double x) { return x / 1e6; }
Vec2 um(const Vec2& x) { return x / 1e6; }

int snap_count(double extent, double h, const char* what) {
  const double r = extent / h;
  const double n = std::round(r);
  if (n < 1 || std::abs(r - n) > 1e-6 * std::max(1.0, r))
    throw ConfigError(std::string("mesh: ") + what + " extent is not a multiple of h");
  return static_cast<int>(n);
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"custom", "taylor_couette", "couette_channel", "closed_droplet", "interface_strip", "lattice", "porous"};
}

double wall_ramp(double t, double speed, double ramp_time) {
  if (t <= 0.0) return 0.0;
  if (t >= ramp_time) return speed;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * t / ramp_time)) * speed;
}

double taylor_couette_ramp(double t) { return wall_ramp(t, 10.0, 1.0); }

double couette_slip_velocity(double u_wall, double eta, double alpha, double height) {
  return u_wall / (1.0 + 2.0 * eta / (alpha * height));
}

ScenarioConfig default_config(const std::string& scenario) {
  ScenarioConfig c;
  c.scenario = scenario;
  if (scenario == "custom") return c;

  if (scenario == "taylor_couette" || scenario == "couette_channel") {
    c.geometry.type = "channel";
    c.geometry.length = um(50);
    c.geometry.height = um(10);
    c.mesh.h = um(0.625);
    c.mesh.theta = std::numbers::pi / 8;
    c.model.rho1 = c.model.rho2 = 1000.0;
    c.model.eta1 = c.model.eta2 = 1e-3;
    c.model.mobility = 3.0487e-11;
    c.tags = {{Side::Left, BoundaryTag::Inflow, {}}, {Side::Right, BoundaryTag::Inflow, {}}};
    c.output.grid = {201, 41};
    if (scenario == "taylor_couette") {
      c.wall = {"ramp", 10.0, 1.0};
      c.inflow.velocity = "slip_couette";
      c.inflow.phase_left = 1.0;
      c.inflow.phase_right = -1.0;
      c.initial.phase = "vertical_interface";
      c.initial.x0 = 0.0;
      c.initial.left_phase = 1.0;
      c.time.dt0 = 1e-3;
      c.time.t_end = 20.0;
    } else {
      c.wall = {"constant", 5.0, 0.0};
      c.inflow.velocity = "rest";
      c.initial.phase = "uniform";
      c.initial.value = 1.0;
      c.time.dt0 = 1e-4;
      c.time.t_end = 0.05;
    }
    return c;
  }
  if (scenario == "closed_droplet") {
    c.geometry.type = "disk";
    c.geometry.center = Vec2::Zero();
    c.geometry.radius = um(5);
    c.mesh.origin = um(Vec2(-6, -6));
    c.mesh.extents = um(Vec2(12, 12));
    c.mesh.h = um(0.5);
    c.mode = "transient";
    c.initial.phase = "disk";
    c.initial.center = um(Vec2(1, 0.5));
    c.initial.radius = um(2.5);
    c.initial.inside_phase = 1.0;
    c.time.dt0 = 1e-8;
    c.time.t_end = 1e-7;
    c.output.grid = {121, 121};
    return c;
  }
  if (scenario == "interface_strip") {
    const double eps = c.model.epsilon;
    c.mesh.origin = Vec2(-10 * eps, 0.0);
    c.mesh.extents = Vec2(20 * eps, 4 * eps / 4);
    c.mesh.h = eps / 4;
    c.mesh.periodic = {false, true};
    c.tags = {{Side::Left, BoundaryTag::Wall, {}}, {Side::Right, BoundaryTag::Wall, {}}};
    c.mode = "transient";
    c.initial.phase = "vertical_interface";
    c.initial.x0 = 0.0;
    c.initial.left_phase = -1.0;
    c.time.dt0 = 1e-8;
    c.time.t_end = 2e-7;
    c.output.grid = {161, 5};
    return c;
  }
  if (scenario == "lattice") {
    c.geometry.type = "obstacles";
    for (const Vec2& ctr : {Vec2(0, 0), Vec2(40, 0), Vec2(20, 20)}) {
      Obstacle o;
      o.shape = "circle";
      o.center = um(ctr);
      o.radius = um(10);
      c.geometry.obstacles.push_back(o);
    }
    c.mesh.origin = Vec2::Zero();
    c.mesh.extents = um(Vec2(40, 20));
    c.mesh.h = um(0.625);
    c.mesh.periodic = {true, false};
    c.model.body_force = Vec2(1e9, 0.0);
    c.tags = {{Side::Bottom, BoundaryTag::Symmetric, {}}, {Side::Top, BoundaryTag::Symmetric, {}}};
    c.mode = "transient";
    c.initial.phase = "lamellae";
    c.initial.positions = {um(10), um(30)};
    c.initial.inside_phase = 1.0;
    c.time.dt0 = 5e-8;
    c.time.t_end = 25e-6;
    c.output.interval = 20;
    c.output.grid = {161, 81};
    return c;
  }
  if (scenario == "porous") {
    c.geometry.type = "obstacles";
    const double circles[][3] = {{40, 8, 14},  {45, 50, 12},  {85, 28, 13}, {120, 0, 16},
                                 {130, 50, 14}, {165, 22, 12}, {195, 48, 9}};
    for (const auto& cc : circles) {
      Obstacle o;
      o.shape = "circle";
      o.center = um(Vec2(cc[0], cc[1]));
      o.radius = um(cc[2]);
      c.geometry.obstacles.push_back(o);
    }
    Obstacle b;
    b.shape = "box";
    b.lo = um(Vec2(60, -1));
    b.hi = um(Vec2(70, 12));
    c.geometry.obstacles.push_back(b);
    c.mesh.origin = Vec2::Zero();
    c.mesh.extents = um(Vec2(200, 50));
    c.mesh.h = um(0.625);
    c.tags = {{Side::Left, BoundaryTag::Inflow, {}},
              {Side::Top, BoundaryTag::Symmetric, {}},
              {Side::Bottom, BoundaryTag::Outflow, {}},
              {Side::Right, BoundaryTag::Outflow, {}}};
    c.inflow.velocity = "parabolic";
    c.inflow.max_speed = 5.0;
    c.inflow.y_lo = 0.0;
    c.inflow.y_hi = um(50);
    c.inflow.phase_left = c.inflow.phase_right = 1.0;
    c.mode = "transient";
    c.initial.phase = "vertical_interface";
    c.initial.x0 = um(2);
    c.initial.left_phase = 1.0;
    c.time.dt0 = 5e-8;
    c.time.t_end = 40e-6;
    c.output.interval = 20;
    c.output.grid = {401, 101};
    return c;
  }
  throw ConfigError("unknown scenario '" + scenario + "'");
}

LevelSet build_level_set(const ScenarioConfig& c) {
  const GeometrySpec& g = c.geometry;
  if (g.type == "everywhere") return levelset::everywhere();
  if (g.type == "channel") {
    if (!(g.height > 0.0) || !(g.length > 0.0)) throw ConfigError("geometry: channel needs positive length and height");
    return levelset::horizontal_strip(-0.5 * g.height, 0.5 * g.height);
  }
  if (g.type == "disk") {
    if (!(g.radius > 0.0)) throw ConfigError("geometry: disk radius must be positive");
    return levelset::disk(g.center, g.radius);
  }
  if (g.type == "box") {
    if (!(g.hi.x() > g.lo.x() && g.hi.y() > g.lo.y())) throw ConfigError("geometry: box needs lo < hi");
    return levelset::box(g.lo, g.hi);
  }
  if (g.type == "obstacles") {
    std::vector<LevelSet> parts;
    for (const auto& o : g.obstacles) {
      if (o.shape == "circle") {
        if (!(o.radius > 0.0)) throw ConfigError("geometry: obstacle radius must be positive");
        parts.push_back(levelset::hole(o.center, o.radius));
      } else if (o.shape == "box") {
        if (!(o.hi.x() > o.lo.x() && o.hi.y() > o.lo.y())) throw ConfigError("geometry: obstacle box needs lo < hi");
        parts.push_back(levelset::complement(levelset::box(o.lo, o.hi)));
      } else {
        throw ConfigError("geometry: unknown obstacle shape '" + o.shape + "'");
      }
    }
    if (parts.empty()) return levelset::everywhere();
    return parts.size() == 1 ? parts.front() : levelset::intersection(parts);
  }
  throw ConfigError("geometry: unknown type '" + g.type + "'");
}

MeshSpec resolve_mesh(const ScenarioConfig& c) {
  const MeshConfig& m = c.mesh;
  MeshSpec s;
  s.theta = m.theta;
  s.periodic = m.periodic;
  if (c.geometry.type == "channel") {
    if (!(m.h > 0.0)) throw ConfigError("mesh: channel geometries need a positive h");
    if (!(std::cos(m.theta) > 1e-3)) throw ConfigError("mesh: channel rotation must satisfy |theta| < pi/2");
    const double L = c.geometry.length, H = c.geometry.height;
    const int nx = snap_count(L, m.h, "channel length");
    // Ambient y-range covering the strip over the channel length, plus one
    // element of margin on each side.
    const double cover = (0.5 * H + 0.5 * L * std::abs(std::sin(m.theta))) / std::cos(m.theta);
    const int half = static_cast<int>(std::ceil(cover / m.h - 1e-9)) + 1;
    s.origin = Vec2(-0.5 * L, -half * m.h);
    s.extents = Vec2(L, 2 * half * m.h);
    s.counts = {nx, 2 * half};
    return s;
  }
  s.origin = m.origin;
  s.extents = m.extents;
  if (m.h > 0.0) {
    s.counts = {snap_count(m.extents.x(), m.h, "x"), snap_count(m.extents.y(), m.h, "y")};
  } else {
    s.counts = m.counts;
  }
  return s;
}

Problem build_problem(const ScenarioConfig& c) {
  Problem p;
  p.name = c.scenario;
  p.params = ModelParams(c.model);
  if (!p.params.neutral_wetting())
    throw ConfigError("model: sigma_s1 != sigma_s2; the solver supports neutral wetting only (sigma_s1 = sigma_s2)");
  p.stab = c.stab;
  p.stab.validate();
  p.mesh = resolve_mesh(c);
  p.domain = build_level_set(c);
  p.tags = c.tags;
  p.degree = c.mesh.degree;
  p.depth = c.mesh.depth;
  p.gauss_order = c.mesh.gauss_order;
  if (p.degree < 1) throw ConfigError("mesh: degree must be at least 1");
  if (p.depth < 0) throw ConfigError("mesh: depth must be nonnegative");
  if (p.gauss_order < 1) throw ConfigError("mesh: gauss_order must be at least 1");
  p.time = c.time;
  p.newton = c.solver;

  const ModelParams params = p.params;
  const double H = c.geometry.height;

  const WallConfig wall = c.wall;
  if (wall.profile == "ramp" || wall.profile == "constant") {
    const bool ramp = wall.profile == "ramp";
    if (ramp && !(wall.ramp_time > 0.0)) throw ConfigError("boundary: ramp_time must be positive");
    p.wall_velocity = [wall, ramp](const Vec2& x, double t) {
      const double u = ramp ? wall_ramp(t, wall.speed, wall.ramp_time) : wall.speed;
      return Vec2(x.y() >= 0.0 ? u : -u, 0.0);
    };
  } else if (wall.profile != "none") {
    throw ConfigError("boundary: unknown wall profile '" + wall.profile + "'");
  }

  const Mat2 R = rotation(p.mesh.theta);
  const double xmid = p.mesh.origin.x() + 0.5 * p.mesh.extents.x();
  const InflowConfig in = c.inflow;
  auto phase_in = [R, xmid, in](const Vec2& x) {
    return (R.transpose() * x).x() < xmid ? in.phase_left : in.phase_right;
  };
  p.boundary.inflow_phase = phase_in;
  if (in.velocity == "rest") {
    p.boundary.inflow_velocity = [](const Vec2&, double) { return Vec2(0.0, 0.0); };
  } else if (in.velocity == "uniform") {
    p.boundary.inflow_velocity = [in](const Vec2&, double) { return in.value; };
  } else if (in.velocity == "slip_couette") {
    if (!(H > 0.0)) throw ConfigError("boundary: slip_couette inflow needs a channel height");
    p.boundary.inflow_velocity = [=](const Vec2& x, double t) {
      const double uw = wall.profile == "ramp" ? wall_ramp(t, wall.speed, wall.ramp_time)
                                               : (wall.profile == "constant" ? wall.speed : 0.0);
      const double us = couette_slip_velocity(uw, params.viscosity(phase_in(x)), params.alpha_gn(), H);
      return Vec2(2.0 * us * x.y() / H, 0.0);
    };
  } else if (in.velocity == "parabolic") {
    const double span = in.y_hi - in.y_lo;
    if (!(span > 0.0)) throw ConfigError("boundary: parabolic inflow needs y_lo < y_hi");
    p.boundary.inflow_velocity = [=](const Vec2& x, double) {
      const double xi = (x.y() - 0.5 * (in.y_lo + in.y_hi)) / (0.5 * span);
      if (std::abs(xi) > 1.0) return Vec2(0.0, 0.0);
      // Peak A, curvature B with the slip condition alpha (A - B) = 4 eta B / span.
      const double eta = params.viscosity(phase_in(x));
      const double B = in.max_speed / (1.0 + 4.0 * eta / (params.alpha_gn() * span));
      return Vec2(in.max_speed - B * xi * xi, 0.0);
    };
  } else {
    throw ConfigError("boundary: unknown inflow velocity '" + in.velocity + "'");
  }

  const InitialConfig ic = c.initial;
  const double width = std::sqrt(2.0) * params.epsilon();
  if (ic.phase == "uniform") {
    p.initial.phase = [ic](const Vec2&) { return ic.value; };
  } else if (ic.phase == "vertical_interface") {
    p.initial.phase = [ic, width](const Vec2& x) { return ic.left_phase * std::tanh((ic.x0 - x.x()) / width); };
  } else if (ic.phase == "disk") {
    if (!(ic.radius > 0.0)) throw ConfigError("initial: disk radius must be positive");
    p.initial.phase = [ic, width](const Vec2& x) {
      return ic.inside_phase * std::tanh((ic.radius - (x - ic.center).norm()) / width);
    };
  } else if (ic.phase == "lamellae") {
    if (ic.positions.size() != 2 || !(ic.positions[0] < ic.positions[1]))
      throw ConfigError("initial: lamellae need two increasing interface positions");
    p.initial.phase = [ic, width](const Vec2& x) {
      return ic.inside_phase * std::tanh((x.x() - ic.positions[0]) / width) *
             std::tanh((ic.positions[1] - x.x()) / width);
    };
  } else {
    throw ConfigError("initial: unknown phase type '" + ic.phase + "'");
  }

  double vs = std::max({std::abs(wall.speed), in.max_speed, in.value.norm()});
  p.velocity_scale = vs > 0.0 ? vs : 1.0;
  return p;
}

}  // namespace nsch
