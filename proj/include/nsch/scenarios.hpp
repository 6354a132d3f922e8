#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsch/simulation.hpp"

namespace nsch {

/// Solid inclusion of the porous/obstacle geometries.
struct Obstacle {
  std::string shape = "circle";  // circle | box
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
};

struct GeometrySpec {
  /// channel: strip |y| < height/2 cut from an ambient box of length `length`
  /// rotated by theta; disk: fluid inside a circle; box: fluid inside a box;
  /// obstacles: ambient box minus the obstacles; everywhere: no trimming.
  std::string type = "everywhere";
  double length = 50e-6;
  double height = 10e-6;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();
  std::vector<Obstacle> obstacles;
};

struct MeshConfig {
  /// Element size; when positive, counts follow from extents (or the
  /// extents are snapped around the channel for channel geometries).
  double h = 0.0;
  Vec2 origin = Vec2::Zero();
  Vec2 extents = Vec2::Ones();
  std::array<int, 2> counts{4, 4};
  double theta = 0.0;
  std::array<bool, 2> periodic{false, false};
  int degree = 3;
  int depth = 3;
  int gauss_order = 5;
};

struct WallConfig {
  std::string profile = "none";  // none | constant | ramp
  double speed = 0.0;            // m/s, top wall moves +x, bottom wall -x
  double ramp_time = 1.0;        // s
};

struct InflowConfig {
  std::string velocity = "rest";  // rest | slip_couette | parabolic | uniform
  Vec2 value = Vec2::Zero();      // uniform velocity
  double max_speed = 0.0;         // parabolic peak
  double y_lo = 0.0, y_hi = 0.0;  // parabolic span (physical y)
  double phase_left = 1.0;        // phi on inflow facets left of the ambient centre
  double phase_right = 1.0;
};

struct InitialConfig {
  std::string phase = "uniform";  // uniform | vertical_interface | disk | lamellae
  double value = 1.0;
  double x0 = 0.0;
  double left_phase = 1.0;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double inside_phase = 1.0;
  std::vector<double> positions;  // lamellae interfaces (x), fluid 1 between the first two
};

struct OutputConfig {
  std::string directory = "nsch_out";
  int interval = 0;  // snapshot every N steps; 0 = initial and final only
  std::array<int, 2> grid{101, 41};
};

struct ScenarioConfig {
  std::string scenario = "custom";
  std::string mode = "steady";  // steady | transient
  GeometrySpec geometry;
  MeshConfig mesh;
  ModelParams::Values model;
  StabParams stab;
  TimeOptions time;
  std::vector<TagSegment> tags;
  WallConfig wall;
  InflowConfig inflow;
  InitialConfig initial;
  NewtonOptions solver;
  int threads = 0;  // 0 = default (env or hardware)
  OutputConfig output;
};

/// Names of the built-in presets.
std::vector<std::string> scenario_names();
/// Preset defaults; "custom" gives the default fluid parameters and an
/// untrimmed unit box.
ScenarioConfig default_config(const std::string& scenario);

/// Wall speed ramp 0.5 (1 - cos(pi t / T)) U for t <= T, U afterwards.
double wall_ramp(double t, double speed, double ramp_time);
double taylor_couette_ramp(double t);
/// Far-field slip velocity u_wall / (1 + 2 eta / (alpha H)).
double couette_slip_velocity(double u_wall, double eta, double alpha, double height);

LevelSet build_level_set(const ScenarioConfig& c);
/// Resolves the mesh (channel snapping, counts from h) into a MeshSpec.
MeshSpec resolve_mesh(const ScenarioConfig& c);
Problem build_problem(const ScenarioConfig& c);

}  // namespace nsch
