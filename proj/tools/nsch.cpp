#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "nsch/config.hpp"
#include "nsch/diagnostics.hpp"
#include "nsch/jacobian_check.hpp"
#include "nsch/linear_solver.hpp"
#include "nsch/log.hpp"
#include "nsch/snapshot.hpp"

using namespace nsch;

namespace {

std::unique_ptr<Simulation> make_simulation(const ScenarioConfig& cfg) {
  auto sim = std::make_unique<Simulation>(build_problem(cfg));
  if (cfg.threads > 0) sim->set_threads(cfg.threads);
  return sim;
}

std::string snapshot_stem(const std::filesystem::path& dir, int step) {
  std::ostringstream os;
  os << "snapshot_" << std::setw(6) << std::setfill('0') << step;
  return (dir / os.str()).string();
}

int cmd_run(const std::string& path, const std::string& out_override) {
  ScenarioConfig cfg = load_config(path);
  if (!out_override.empty()) cfg.output.directory = out_override;
  const std::filesystem::path dir(cfg.output.directory);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "config.json");
    os << serialize_config(cfg);
  }

  auto sim = make_simulation(cfg);
  const SampleGrid grid = default_sample_grid(*sim, cfg.output.grid);
  std::cout << "scenario " << cfg.scenario << ": " << sim->mesh().active_elements.size() << " active elements, "
            << sim->num_dofs() << " dofs, " << sim->assembler().threads() << " threads, "
            << linear_solver_backend() << "\n";
  write_snapshot(sample_snapshot(*sim, grid), snapshot_stem(dir, 0));

  std::ofstream csv(dir / "progress.csv");
  csv.precision(17);
  const int interval = cfg.output.interval;
  auto on_step = [&](const Simulation& s, const StepReport& r) {
    std::cout << "step " << r.step << " t=" << r.t << " dt=" << r.dt << " newton=" << r.newton_iterations
              << " rate=" << r.change_rate << std::endl;
    if (interval > 0 && r.step % interval == 0) write_snapshot(sample_snapshot(s, grid), snapshot_stem(dir, r.step));
  };
  const RunReport rep =
      cfg.mode == "steady" ? sim->run_to_steady(&csv, on_step) : sim->run_until(cfg.time.t_end, &csv, on_step);
  const FieldSnapshot final_snap = sample_snapshot(*sim, grid);
  write_snapshot(final_snap, (dir / "final").string());

  std::cout << "finished: steps=" << rep.steps << " t=" << rep.t;
  if (cfg.mode == "steady") std::cout << (rep.steady ? " (steady)" : " (t_end reached before steady state)");
  std::cout << "\n";
  if (cfg.initial.phase == "vertical_interface") {
    const InterfaceRotation rot = interface_rotation(final_snap);
    std::cout << "interface rotation: " << rot.angle << " rad (" << rot.lines_used << " sample lines)\n";
  }
  const StepDiagnostics d = sim->diagnostics();
  std::cout << "phase integral " << d.phase_integral << ", total energy " << d.total_energy << "\n";
  return cfg.mode == "steady" && !rep.steady ? 3 : 0;
}

int cmd_mesh_info(const std::string& path) {
  const ScenarioConfig cfg = load_config(path);
  const Problem p = build_problem(cfg);
  const AmbientMesh ambient = build_ambient(p.mesh.origin, p.mesh.extents, p.mesh.counts, p.mesh.theta, p.mesh.periodic);
  const ImmersedMesh mesh = tag_conforming_boundaries(classify_elements(ambient, p.domain, p.depth), p.tags);
  const CutQuadrature q = build_cut_quadrature(mesh, p.domain, p.gauss_order);
  const SplineSpace space(mesh, p.degree);
  std::size_t points = 0, surface = 0;
  for (const auto& e : q.elements) {
    points += e.volume.size();
    surface += e.surface.size();
  }
  std::array<int, 4> by_tag{0, 0, 0, 0};
  for (const auto& f : mesh.boundary_facets) ++by_tag[static_cast<int>(f.tag)];

  std::cout << "scenario            " << cfg.scenario << "\n";
  std::cout << "ambient elements    " << ambient.num_elements() << " (" << ambient.counts()[0] << " x "
            << ambient.counts()[1] << ", h = " << ambient.h() << " m, theta = " << ambient.theta() << ")\n";
  std::cout << "active elements     " << mesh.active_elements.size() << "\n";
  std::cout << "cut elements        " << mesh.cut_elements.size() << "\n";
  std::cout << "cut fraction        " << mesh.cut_fraction() << "\n";
  std::cout << "skeleton faces      " << mesh.skeleton_faces.size() << "\n";
  std::cout << "ghost faces         " << mesh.ghost_faces.size() << "\n";
  std::cout << "boundary facets     " << mesh.boundary_facets.size() << " (inflow " << by_tag[0] << ", outflow "
            << by_tag[1] << ", wall " << by_tag[2] << ", symmetric " << by_tag[3] << ")\n";
  std::cout << "spline degree       " << space.degree() << "\n";
  std::cout << "functions per field " << space.num_functions() << "\n";
  std::cout << "dofs (5 fields)     " << kNumFields * space.num_functions() << "\n";
  std::cout << "fluid area          " << q.volume() << " m^2\n";
  std::cout << "immersed boundary   " << q.immersed_boundary_length() << " m\n";
  std::cout << "quadrature points   " << points << " volume, " << surface << " surface\n";
  std::cout << "dropped pieces      " << q.stats.dropped_triangles << " triangles, " << q.stats.dropped_segments
            << " segments, " << q.stats.saddle_cells << " saddle cells\n";
  return 0;
}

struct Shape {
  std::string name;
  AmbientMesh ambient;
  LevelSet ls;
  double area, perimeter;
};

int cmd_check_quadrature(int depth) {
  if (depth < 0 || depth > 12) throw ConfigError("--depth must lie in [0, 12]");
  const double pi = std::numbers::pi;
  const double s = 0.8 * std::sqrt(2.0);
  std::vector<Shape> shapes;
  shapes.push_back({"circle r=0.3 in unit square, h=0.25", build_ambient(Vec2::Zero(), Vec2::Ones(), {4, 4}),
                    levelset::disk(Vec2(0.5, 0.5), 0.3), pi * 0.09, 2 * pi * 0.3});
  shapes.push_back({"half-plane x+y<1.13 in unit square, h=0.25", build_ambient(Vec2::Zero(), Vec2::Ones(), {4, 4}),
                    levelset::half_plane(Vec2(1, 1).normalized(), 0.8), 1.0 - 0.5 * (2 - s) * (2 - s),
                    (2 - s) * std::sqrt(2.0)});
  const double r = 10e-6;
  shapes.push_back({"lattice cell 40x20 um, h=0.625 um",
                    build_ambient(Vec2::Zero(), Vec2(40e-6, 20e-6), {64, 32}),
                    levelset::intersection({levelset::hole(Vec2(0, 0), r), levelset::hole(Vec2(40e-6, 0), r),
                                            levelset::hole(Vec2(20e-6, 20e-6), r)}),
                    800e-12 - pi * r * r, 2 * pi * r});
  std::cout << std::setprecision(12);
  for (const auto& sh : shapes) {
    const DomainMeasure m = measure_domain(sh.ambient, sh.ls, depth);
    std::cout << sh.name << " (depth " << depth << ")\n";
    std::cout << "  area      measured " << m.area << "  analytic " << sh.area << "  rel.err "
              << std::abs(m.area - sh.area) / sh.area << "\n";
    std::cout << "  perimeter measured " << m.perimeter << "  analytic " << sh.perimeter << "  rel.err "
              << std::abs(m.perimeter - sh.perimeter) / sh.perimeter << "\n";
  }
  return 0;
}

int cmd_verify_jacobian(const std::string& path, int directions, unsigned seed, double tol) {
  const ScenarioConfig cfg = load_config(path);
  auto sim = make_simulation(cfg);
  const Problem& p = sim->problem();
  const FieldScales sc = field_scales(p.params, p.velocity_scale);
  const int n = sim->space().num_functions();
  const double dt = p.time.dt0;
  const FieldState prev = random_state(n, sc, seed, 0.0);
  const FieldState state = random_state(n, sc, seed + 1, dt);
  AssemblyOptions opt;
  opt.inv_dt = 1.0 / dt;
  const JacobianCheck jc = check_jacobian(sim->assembler(), state, prev, opt, sc, directions, seed + 2);
  std::cout << std::setprecision(3);
  for (std::size_t k = 0; k < jc.errors.size(); ++k)
    std::cout << "direction " << k << ": relative error " << jc.errors[k] << "\n";
  std::cout << "worst " << jc.worst << " (tolerance " << tol << ") " << (jc.worst <= tol ? "PASS" : "FAIL") << "\n";
  return jc.worst <= tol ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Immersed isogeometric Navier-Stokes-Cahn-Hilliard solver"};
  app.require_subcommand(1);

  std::string config, out;
  auto* run = app.add_subcommand("run", "March a scenario to steady state or t_end");
  run->add_option("config", config, "Scenario JSON file")->required();
  run->add_option("--out", out, "Output directory (overrides output.directory)");

  auto* info = app.add_subcommand("mesh-info", "Print the immersed mesh summary");
  info->add_option("config", config, "Scenario JSON file")->required();

  int depth = 3;
  auto* quad = app.add_subcommand("check-quadrature", "Compare cut quadrature with analytic area and perimeter");
  quad->add_option("--depth", depth, "Octree depth");

  int directions = 20;
  unsigned seed = 1;
  double tol = 1e-6;
  auto* jac = app.add_subcommand("verify-jacobian", "Compare the analytic Jacobian with central differences");
  jac->add_option("config", config, "Scenario JSON file")->required();
  jac->add_option("--directions", directions, "Number of random directions");
  jac->add_option("--seed", seed, "Random seed");
  jac->add_option("--tol", tol, "Accepted relative error");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out);
    if (*info) return cmd_mesh_info(config);
    if (*quad) return cmd_check_quadrature(depth);
    if (*jac) return cmd_verify_jacobian(config, directions, seed, tol);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
