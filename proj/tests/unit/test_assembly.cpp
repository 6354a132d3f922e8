#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "nsch/jacobian_check.hpp"

using namespace nsch;
using namespace nsch::testing;

namespace {

const std::vector<TagSegment> kOpenTags = {{Side::Left, BoundaryTag::Inflow, {}},
                                           {Side::Right, BoundaryTag::Outflow, {}},
                                           {Side::Bottom, BoundaryTag::Wall, {}}};

std::unique_ptr<Discretization> trimmed_disk(int degree, double theta = 0.0) {
  const AmbientMesh am = build_ambient(Vec2::Zero(), Vec2::Ones(), {8, 8}, theta);
  return discretize(am, levelset::disk(Vec2(0.5, 0.45), 0.37), degree, unit_params(), unit_stab(), {},
                    [](const Vec2& x, double t) { return Vec2(x.y() + t, -x.x()); });
}

// Domain touching the left/right/bottom box sides and cut by a slanted line.
std::unique_ptr<Discretization> open_channel(int degree) {
  const AmbientMesh am = build_ambient(Vec2::Zero(), Vec2::Ones(), {8, 8});
  return discretize(am, levelset::half_plane(Vec2(0.3, 1).normalized(), 0.75), degree, unit_params(), unit_stab(),
                    kOpenTags, [](const Vec2& x, double t) { return Vec2(x.y() + t, -x.x()); });
}

// Rotated box cut by one straight line; every boundary is a wall, and the
// immersed wall normals are exact, so the divergence theorem holds to
// rounding.
std::unique_ptr<Discretization> closed_straight(int degree) {
  const AmbientMesh am = build_ambient(Vec2::Zero(), Vec2::Ones(), {6, 6}, 0.2);
  return discretize(am, levelset::half_plane(Vec2(0.3, 1).normalized(), 0.75), degree, unit_params(), unit_stab());
}

FieldState constant_fields(int n, double ux, double uy, double p, double phi, double mu, double t = 0.0) {
  FieldState s(n, t);
  const double v[kNumFields] = {ux, uy, p, phi, mu};
  for (int f = 0; f < kNumFields; ++f) s.field(static_cast<Field>(f)).setConstant(v[f]);
  return s;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("analytic Jacobian matches central differences") {
    for (int variant = 0; variant < 3; ++variant) {
      CAPTURE(variant);
      const auto d = variant == 0 ? trimmed_disk(2) : variant == 1 ? open_channel(2) : trimmed_disk(2, 0.3);
      const FieldScales scales{1, 1, 1, 1, 1};
      const FieldState s = random_state(d->functions(), scales, 11 + variant, 0.3);
      const FieldState prev = random_state(d->functions(), scales, 97 + variant, 0.2);
      AssemblyOptions opt;
      opt.inv_dt = 2.0;
      const JacobianCheck jc = check_jacobian(*d->assembler, s, prev, opt, scales, 6, 5);
      CHECK(jc.worst < 1e-6);
    }
  }

  TEST_CASE("zero state is an equilibrium of a closed domain") {
    // The mixture energy of phi = 0 is a nonzero constant; its volume and
    // wall terms cancel by the divergence theorem.
    const auto d = closed_straight(2);
    ModelParams::Values v = unit_params().values();
    v.body_force = Vec2::Zero();
    const Assembler as(*d->space, d->quad, ModelParams(v), unit_stab());
    const FieldState s(d->functions(), 0.0);
    AssemblyOptions opt;
    opt.inv_dt = 3.0;
    const FieldState rnd = random_state(d->functions(), {1, 1, 1, 1, 1}, 9, 0.0);
    CHECK(as.residual(s, s, opt).norm() < 1e-13 * as.residual(rnd, rnd, opt).norm());
  }

  TEST_CASE("resting pure species is an equilibrium") {
    const auto d = trimmed_disk(3);
    ModelParams::Values v = unit_params().values();
    v.body_force = Vec2::Zero();
    const Assembler as(*d->space, d->quad, ModelParams(v), unit_stab());
    const FieldState s = constant_fields(d->functions(), 0, 0, 0, 1, 0);
    AssemblyOptions opt;
    opt.inv_dt = 3.0;
    // Only rounding of the partition of unity remains.
    CHECK(as.residual(s, s, opt).lpNorm<Eigen::Infinity>() < 1e-13);
  }

  TEST_CASE("phase rows sum to the discrete conservation balance") {
    const auto d = open_channel(2);
    const int n = d->functions();
    const FieldScales scales{1, 1, 1, 1, 1};
    const FieldState s = random_state(n, scales, 3, 1.0);
    const FieldState prev = random_state(n, scales, 4, 0.5);
    AssemblyOptions opt;
    opt.inv_dt = 4.0;
    const Eigen::VectorXd r = d->assembler->residual(s, prev, opt);
    const double sum = r.segment(Mu * n, n).sum();
    const auto now = d->assembler->integrals(s), before = d->assembler->integrals(prev);
    const double expected = (now.phase - before.phase) * opt.inv_dt + now.boundary_phase_flux;
    CHECK(std::abs(now.boundary_phase_flux) > 1e-3);
    CHECK(std::abs(sum - expected) < 1e-11 * (std::abs(now.phase * opt.inv_dt) + 1.0));
  }

  TEST_CASE("constant pressure lies in the Jacobian nullspace for closed walls") {
    const auto d = closed_straight(2);
    const int n = d->functions();
    const FieldState s = random_state(n, {1, 1, 1, 1, 1}, 21, 0.0);
    StabilizedSystem sys;
    AssemblyOptions opt;
    opt.inv_dt = 1.0;
    d->assembler->assemble(s, s, opt, sys, true);
    Eigen::VectorXd ones = Eigen::VectorXd::Zero(sys.residual.size());
    ones.segment(P * n, n).setOnes();
    const Eigen::VectorXd Jp = sys.jacobian * ones;
    const double scale = sys.jacobian.cwiseAbs().toDense().rowwise().sum().maxCoeff();
    CHECK(Jp.lpNorm<Eigen::Infinity>() < 1e-12 * scale);
  }

  TEST_CASE("Stokes limit has symmetric viscous and skew pressure coupling") {
    const auto d = trimmed_disk(2, 0.4);
    const int n = d->functions();
    const FieldState s = constant_fields(n, 0, 0, 0, 1, 0);
    StabilizedSystem sys;
    AssemblyOptions opt;
    opt.convection = false;
    d->assembler->assemble(s, s, opt, sys, true);
    const Eigen::MatrixXd J = Eigen::MatrixXd(sys.jacobian);
    const Eigen::MatrixXd Juu = J.block(0, 0, 2 * n, 2 * n);
    const Eigen::MatrixXd Jup = J.block(0, P * n, 2 * n, n);
    const Eigen::MatrixXd Jpu = J.block(P * n, 0, n, 2 * n);
    CHECK((Juu - Juu.transpose()).norm() < 1e-12 * Juu.norm());
    CHECK((Jup + Jpu.transpose()).norm() < 1e-12 * Jup.norm());
  }

  TEST_CASE("Jacobian pattern is structurally symmetric") {
    const auto d = open_channel(3);
    const SparseMatrix& p = d->assembler->pattern();
    const Eigen::SparseMatrix<double> ones = p.cast<double>().unaryExpr([](double) { return 1.0; });
    const Eigen::SparseMatrix<double> diff = ones - Eigen::SparseMatrix<double>(ones.transpose());
    CHECK(diff.norm() == 0.0);
  }

  TEST_CASE("stabilization vanishes on polynomial fields") {
    for (int k : {1, 2, 3}) {
      CAPTURE(k);
      const auto d = trimmed_disk(k);
      const int n = d->functions();
      const auto full = [&] {
        return discretize(build_ambient(Vec2::Zero(), Vec2::Ones(), {8, 8}), levelset::everywhere(), k, unit_params(),
                          unit_stab());
      }();
      FieldState s(n, 0.0);
      const auto poly = [k](const Vec2& x) { return std::pow(x.x() - 0.3 * x.y(), k) + 0.5 * x.y(); };
      const Eigen::VectorXd amb = project(*full, poly);
      for (int f = 0; f < kNumFields; ++f)
        for (int i = 0; i < n; ++i)
          s.coeffs[f * n + i] = (1.0 + f) * amb[full->space->compact_function(d->space->ambient_function(i))];
      AssemblyOptions opt;
      opt.terms = kSkeleton | kGhost;
      const double r_poly = d->assembler->residual(s, s, opt).norm();
      const FieldState rnd = random_state(n, {1, 1, 1, 1, 1}, 8, 0.0);
      const double r_rand = d->assembler->residual(rnd, rnd, opt).norm();
      CHECK(r_poly < 1e-9 * r_rand);
    }
  }

  TEST_CASE("face penalties carry the documented prefactors") {
    const ModelParams pm = unit_params();
    const StabParams st = unit_stab();
    for (int k : {2, 3}) {
      CAPTURE(k);
      const KinkPenalty s = skeleton_kink_penalty(8, k, pm, st);
      CHECK(s.length == doctest::Approx(1.0));
      CHECK(s.energy / s.length ==
            doctest::Approx(st.gamma_skeleton * std::pow(s.h, 2 * k + 1) / pm.viscosity(0.0)).epsilon(1e-9));
      const KinkPenalty g = ghost_kink_penalty(8, k, pm, st);
      CHECK(g.length > 0.0);
      CHECK(g.energy / g.length ==
            doctest::Approx(st.gamma_ghost * std::pow(g.h, 2 * k - 1) * pm.sigma() * pm.epsilon()).epsilon(1e-9));
    }
  }

  TEST_CASE("Nitsche penalty doubles when h halves") {
    // Wall-normal velocity u = n (constant) on a straight immersed wall.
    auto energy = [](int cells) {
      const Vec2 nrm = Vec2(0.3, 1).normalized();
      const AmbientMesh am = build_ambient(Vec2::Zero(), Vec2::Ones(), {cells, cells});
      const auto d = discretize(am, levelset::half_plane(nrm, 0.75), 2, unit_params(), unit_stab());
      const int n = d->functions();
      FieldState s = constant_fields(n, nrm.x(), nrm.y(), 0, 1, 0);
      StabilizedSystem sys;
      AssemblyOptions opt;
      opt.terms = kNitsche;
      d->assembler->assemble(s, s, opt, sys, true);
      Eigen::VectorXd u = Eigen::VectorXd::Zero(s.size());
      u.head(2 * n) = s.coeffs.head(2 * n);
      return u.dot(sys.jacobian * u);
    };
    // For constant u only the penalty beta/h eta |wall| survives.
    const double e1 = energy(8), e2 = energy(16);
    CHECK(e2 / e1 == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("fixed dofs become identity rows and columns") {
    const auto d = open_channel(2);
    const int n = d->functions();
    const FieldState s = random_state(n, {1, 1, 1, 1, 1}, 2, 0.0);
    StabilizedSystem sys;
    AssemblyOptions opt;
    opt.inv_dt = 1.0;
    d->assembler->assemble(s, s, opt, sys, true);
    Constraints c;
    c.functions = n;
    c.fixed.assign(s.size(), 0);
    c.values = Eigen::VectorXd::Zero(s.size());
    const std::vector<int> fixed = {0, n + 3, 3 * n + 7, 4 * n + n - 1};
    for (int i : fixed) c.fixed[i] = 1;
    apply_constraints(sys, c);
    const Eigen::MatrixXd J = Eigen::MatrixXd(sys.jacobian);
    for (int i : fixed) {
      CHECK(sys.residual[i] == 0.0);
      CHECK(J(i, i) == 1.0);
      CHECK(J.row(i).cwiseAbs().sum() == 1.0);
      CHECK(J.col(i).cwiseAbs().sum() == 1.0);
    }
  }

  TEST_CASE("non-finite integrand raises an assembly error") {
    const auto d = trimmed_disk(2);
    FieldState s(d->functions(), 0.0);
    s.coeffs[Phi * d->functions() + 5] = std::numeric_limits<double>::quiet_NaN();
    StabilizedSystem sys;
    CHECK_THROWS_AS(d->assembler->assemble(s, s, AssemblyOptions{}, sys, true), AssemblyError);
  }

  TEST_CASE("assembly is reproducible at fixed thread count") {
    const auto d = open_channel(2);
    const FieldState s = random_state(d->functions(), {1, 1, 1, 1, 1}, 5, 0.0);
    AssemblyOptions opt;
    opt.inv_dt = 1.0;
    for (int threads : {1, 3}) {
      d->assembler->set_threads(threads);
      StabilizedSystem a, b;
      d->assembler->assemble(s, s, opt, a, true);
      d->assembler->assemble(s, s, opt, b, true);
      CHECK((a.residual.array() == b.residual.array()).all());
      CHECK(Eigen::Map<const Eigen::VectorXd>(a.jacobian.valuePtr(), a.jacobian.nonZeros()) ==
            Eigen::Map<const Eigen::VectorXd>(b.jacobian.valuePtr(), b.jacobian.nonZeros()));
    }
  }

  TEST_CASE("volume integrals of the mass matrix and load vector") {
    const auto d = trimmed_disk(3);
    const double area = d->quad.volume();
    CHECK(area == doctest::Approx(std::numbers::pi * 0.37 * 0.37).epsilon(3e-3));
    const SparseMatrix M = d->assembler->mass_matrix(0.0);
    CHECK(M.sum() == doctest::Approx(area).epsilon(1e-12));
    CHECK(d->assembler->load_vector([](const Vec2&) { return 1.0; }).sum() == doctest::Approx(area).epsilon(1e-12));
  }
}
