#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <ostream>
#include <string>
#include <vector>

#include "nsch/assembler.hpp"
#include "nsch/constraints.hpp"
#include "nsch/immersed_mesh.hpp"
#include "nsch/newton.hpp"
#include "nsch/time_controller.hpp"

namespace nsch {

struct MeshSpec {
  Vec2 origin = Vec2::Zero();
  Vec2 extents = Vec2::Ones();
  std::array<int, 2> counts{1, 1};
  double theta = 0.0;
  std::array<bool, 2> periodic{false, false};
};

struct TimeOptions {
  double dt0 = 1e-3;
  double t_end = 1.0;
  int restore_after = 8;
  int max_halvings = 10;
  double steady_tol = 1e-6;  // 1/s
  int steady_window = 3;
  int max_steps = 1000000;
};

struct InitialCondition {
  std::function<double(const Vec2&)> phase;     // analytic phi0, projected onto the space
  std::function<Vec2(const Vec2&)> velocity;    // optional, zero when empty
};

/// Everything needed to set up and march one immersed NSCH problem.
struct Problem {
  std::string name = "custom";
  MeshSpec mesh;
  LevelSet domain = levelset::everywhere();
  std::vector<TagSegment> tags;
  int degree = 3;
  int depth = 3;
  int gauss_order = 5;
  ModelParams params;
  StabParams stab;
  BoundaryData boundary;
  WallVelocity wall_velocity;
  InitialCondition initial;
  TimeOptions time;
  NewtonOptions newton;
  bool convection = true;
  /// Velocity scale for the block-scaled steady-state norm (m/s).
  double velocity_scale = 1.0;
};

struct StepDiagnostics {
  double phase_integral = 0.0;
  double mixture_energy = 0.0;
  double kinetic_energy = 0.0;
  double total_energy = 0.0;
  double max_speed = 0.0;
};

struct StepReport {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
  double residual = 0.0;  // first assembled residual norm of the accepted step
  int retries = 0;        // halvings performed for this step
  double change_rate = 0.0;
  StepDiagnostics diag;
};

struct RunReport {
  bool steady = false;
  int steps = 0;
  double t = 0.0;
  std::vector<StepReport> history;
};

class SimulationAborted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Owns mesh, quadrature, spline space and assembler of a problem and
/// marches the state with backward Euler and step halving.
class Simulation {
public:
  explicit Simulation(Problem problem);

  const Problem& problem() const noexcept { return problem_; }
  const ImmersedMesh& mesh() const noexcept { return *mesh_; }
  const CutQuadrature& quadrature() const noexcept { return *quad_; }
  const SplineSpace& space() const noexcept { return *space_; }
  const Assembler& assembler() const noexcept { return *assembler_; }
  const TimeController& controller() const noexcept { return controller_; }
  const FieldState& state() const noexcept { return state_; }
  void set_state(const FieldState& s);
  int step_count() const noexcept { return steps_; }
  int num_dofs() const noexcept { return state_.size(); }
  void set_threads(int n) { assembler_->set_threads(n); }

  Constraints constraints_at(double t) const;
  /// Newton options of the problem; unset typical magnitudes default to
  /// the field scales {U, U, sigma/eps, 1, sigma/eps}.
  NewtonOptions newton_options() const;
  /// phi0 and u0 projected, mu0 from the discrete chemical-potential
  /// closure, p0 = 0. Called by the constructor.
  void initialize();

  /// One accepted step (halving and retrying on Newton failure).
  StepReport advance();
  /// Marches until the block-scaled change rate stays below the tolerance
  /// for `steady_window` consecutive steps, or until t_end.
  RunReport run_to_steady(std::ostream* csv = nullptr,
                          const std::function<void(const Simulation&, const StepReport&)>& on_step = {});
  RunReport run_until(double t_end, std::ostream* csv = nullptr,
                      const std::function<void(const Simulation&, const StepReport&)>& on_step = {});

  StepDiagnostics diagnostics() const;
  double mean_pressure() const;
  /// Block-scaled |U1 - U0| / (dt |U0|).
  double change_rate(const FieldState& next, const FieldState& prev, double dt) const;

  static void write_csv_header(std::ostream& os);
  static void write_csv_row(std::ostream& os, const StepReport& r);

private:
  Eigen::VectorXd project(const std::function<double(const Vec2&)>& f, const Constraints& c, Field field) const;

  Problem problem_;
  std::unique_ptr<ImmersedMesh> mesh_;
  std::unique_ptr<CutQuadrature> quad_;
  std::unique_ptr<SplineSpace> space_;
  std::unique_ptr<Assembler> assembler_;
  TimeController controller_;
  FieldState state_;
  int steps_ = 0;
};

}  // namespace nsch
