#include "nsch/simulation.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nsch/jacobian_check.hpp"
#include "nsch/linear_solver.hpp"
#include "nsch/log.hpp"

namespace nsch {

Simulation::Simulation(Problem problem)
    : problem_(std::move(problem)), controller_(problem_.time.dt0, problem_.time.max_halvings,
                                                problem_.time.restore_after) {
  const MeshSpec& ms = problem_.mesh;
  const AmbientMesh ambient = build_ambient(ms.origin, ms.extents, ms.counts, ms.theta, ms.periodic);
  mesh_ = std::make_unique<ImmersedMesh>(
      tag_conforming_boundaries(classify_elements(ambient, problem_.domain, problem_.depth), problem_.tags));
  quad_ = std::make_unique<CutQuadrature>(build_cut_quadrature(*mesh_, problem_.domain, problem_.gauss_order));
  space_ = std::make_unique<SplineSpace>(*mesh_, problem_.degree);
  assembler_ =
      std::make_unique<Assembler>(*space_, *quad_, problem_.params, problem_.stab, problem_.wall_velocity);
  initialize();
}

void Simulation::set_state(const FieldState& s) {
  if (s.size() != assembler_->num_dofs()) throw ContractViolation("state size does not match the problem");
  state_ = s;
}

Constraints Simulation::constraints_at(double t) const { return build_constraints(*space_, problem_.boundary, t); }

Eigen::VectorXd Simulation::project(const std::function<double(const Vec2&)>& f, const Constraints& c,
                                    Field field) const {
  const int n = space_->num_functions();
  SparseMatrix M = assembler_->mass_matrix(problem_.stab.gamma_ghost);
  Eigen::VectorXd b = assembler_->load_vector(f);
  Eigen::VectorXd fixed_vals = Eigen::VectorXd::Zero(n);
  std::vector<char> fixed(n, 0);
  for (int a = 0; a < n; ++a)
    if (c.is_fixed(field * n + a)) {
      fixed[a] = 1;
      fixed_vals[a] = c.values[field * n + a];
    }
  b -= M * fixed_vals;
  for (int r = 0; r < M.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(M, r); it; ++it)
      if (fixed[r] || fixed[it.col()]) it.valueRef() = (r == it.col()) ? 1.0 : 0.0;
  for (int a = 0; a < n; ++a)
    if (fixed[a]) b[a] = fixed_vals[a];
  Eigen::VectorXd x;
  const LinearSolveInfo li = solve_linear(M, b, x);
  if (!li.ok) throw SimulationAborted("initial projection failed: " + li.message);
  return x;
}

void Simulation::initialize() {
  const int n = space_->num_functions();
  FieldState s(n, 0.0);
  const Constraints c = constraints_at(0.0);
  if (problem_.initial.phase) s.field(Phi) = project(problem_.initial.phase, c, Phi);
  if (problem_.initial.velocity) {
    const auto& v = problem_.initial.velocity;
    s.field(Ux) = project([&](const Vec2& x) { return v(x).x(); }, c, Ux);
    s.field(Uy) = project([&](const Vec2& x) { return v(x).y(); }, c, Uy);
  }
  c.apply(s.coeffs);

  // mu0 from the discrete closure: M mu = -(omega rows at mu = 0).
  AssemblyOptions opt;
  opt.terms = kVolume | kBoundary | kGhost;
  opt.inv_dt = 0.0;
  const Eigen::VectorXd r = assembler_->residual(s, s, opt);
  SparseMatrix M = assembler_->mass_matrix(problem_.stab.gamma_ghost);
  Eigen::VectorXd mu;
  const LinearSolveInfo li = solve_linear(M, -r.segment(Phi * n, n), mu);
  if (!li.ok) throw SimulationAborted("initial chemical potential solve failed: " + li.message);
  s.field(Mu) = mu;
  state_ = s;
  steps_ = 0;
}

StepDiagnostics Simulation::diagnostics() const {
  const auto in = assembler_->integrals(state_);
  StepDiagnostics d;
  d.phase_integral = in.phase;
  d.mixture_energy = in.mixture_energy;
  d.kinetic_energy = in.kinetic_energy;
  d.total_energy = in.mixture_energy + in.kinetic_energy;
  d.max_speed = in.max_speed;
  return d;
}

double Simulation::mean_pressure() const {
  const Eigen::VectorXd ones = assembler_->load_vector([](const Vec2&) { return 1.0; });
  const double vol = ones.sum();
  return ones.dot(state_.field(P)) / vol;
}

double Simulation::change_rate(const FieldState& next, const FieldState& prev, double dt) const {
  const int n = space_->num_functions();
  const double pscale = problem_.params.epsilon() / problem_.params.sigma();
  const double uscale = 1.0 / problem_.velocity_scale;
  const std::array<double, kNumFields> scale = {uscale, uscale, pscale, 1.0, pscale};
  double dn = 0.0, un = 0.0;
  for (int f = 0; f < kNumFields; ++f) {
    dn += std::pow(scale[f], 2) * (next.coeffs.segment(f * n, n) - prev.coeffs.segment(f * n, n)).squaredNorm();
    un += std::pow(scale[f], 2) * prev.coeffs.segment(f * n, n).squaredNorm();
  }
  if (un == 0.0) return dn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(dn / un) / dt;
}

NewtonOptions Simulation::newton_options() const {
  NewtonOptions o = problem_.newton;
  if (o.typical == std::array<double, kNumFields>{})
    o.typical = field_scales(problem_.params, problem_.velocity_scale);
  return o;
}

StepReport Simulation::advance() {
  StepReport rep;
  const FieldState prev = state_;
  for (;;) {
    const double dt = controller_.dt();
    FieldState guess = prev;
    guess.t = prev.t + dt;
    const Constraints c = constraints_at(guess.t);
    AssemblyOptions opt;
    opt.inv_dt = 1.0 / dt;
    opt.convection = problem_.convection;
    const NewtonResult nr = newton_solve(*assembler_, c, prev, guess, opt, newton_options());
    if (nr.converged) {
      controller_.on_success();
      state_ = guess;
      ++steps_;
      rep.step = steps_;
      rep.t = guess.t;
      rep.dt = dt;
      rep.newton_iterations = nr.iterations;
      rep.residual = nr.residual_history.empty() ? 0.0 : nr.residual_history.front();
      rep.change_rate = change_rate(state_, prev, dt);
      rep.diag = diagnostics();
      return rep;
    }
    std::ostringstream m;
    m << "step at t=" << prev.t << " with dt=" << dt << " failed: " << nr.failure;
    log::info(m.str());
    ++rep.retries;
    if (!controller_.on_failure()) {
      std::ostringstream a;
      a << "aborting: " << m.str() << "; halving cap " << controller_.max_halvings() << " reached. Residual history:";
      for (double r : nr.residual_history) a << ' ' << r;
      throw SimulationAborted(a.str());
    }
  }
}

void Simulation::write_csv_header(std::ostream& os) {
  os << "step,t,dt,newton_iterations,residual,retries,phase_integral,mixture_energy,kinetic_energy,total_energy,"
        "max_speed,change_rate\n";
}

void Simulation::write_csv_row(std::ostream& os, const StepReport& r) {
  os << std::setprecision(12) << r.step << ',' << r.t << ',' << r.dt << ',' << r.newton_iterations << ','
     << r.residual << ',' << r.retries << ',' << r.diag.phase_integral << ',' << r.diag.mixture_energy << ','
     << r.diag.kinetic_energy << ',' << r.diag.total_energy << ',' << r.diag.max_speed << ',' << r.change_rate
     << '\n';
  os.flush();
}

RunReport Simulation::run_to_steady(std::ostream* csv,
                                    const std::function<void(const Simulation&, const StepReport&)>& on_step) {
  RunReport out;
  if (csv) write_csv_header(*csv);
  int quiet = 0;
  while (state_.t < problem_.time.t_end * (1.0 - 1e-12) && out.steps < problem_.time.max_steps) {
    const StepReport r = advance();
    out.history.push_back(r);
    ++out.steps;
    if (csv) write_csv_row(*csv, r);
    if (on_step) on_step(*this, r);
    quiet = r.change_rate < problem_.time.steady_tol ? quiet + 1 : 0;
    if (quiet >= problem_.time.steady_window) {
      out.steady = true;
      break;
    }
  }
  out.t = state_.t;
  if (!out.steady) log::warn("end time reached without a steady state");
  return out;
}

RunReport Simulation::run_until(double t_end, std::ostream* csv,
                                const std::function<void(const Simulation&, const StepReport&)>& on_step) {
  RunReport out;
  if (csv) write_csv_header(*csv);
  while (state_.t < t_end * (1.0 - 1e-12) && out.steps < problem_.time.max_steps) {
    const StepReport r = advance();
    out.history.push_back(r);
    ++out.steps;
    if (csv) write_csv_row(*csv, r);
    if (on_step) on_step(*this, r);
  }
  out.t = state_.t;
  return out;
}

}  // namespace nsch
