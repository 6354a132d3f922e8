#include "fixtures.hpp"

#include <cmath>

namespace nsch::testing {

std::unique_ptr<Discretization> discretize(const AmbientMesh& ambient, const LevelSet& ls, int degree,
                                           const ModelParams& params, const StabParams& stab,
                                           const std::vector<TagSegment>& tags, WallVelocity wall, int depth) {
  auto d = std::make_unique<Discretization>();
  d->mesh = std::make_unique<ImmersedMesh>(tag_conforming_boundaries(classify_elements(ambient, ls, depth), tags));
  d->quad = build_cut_quadrature(*d->mesh, ls, 5);
  d->space = std::make_unique<SplineSpace>(*d->mesh, degree);
  d->assembler = std::make_unique<Assembler>(*d->space, d->quad, params, stab, std::move(wall));
  d->assembler->set_threads(1);
  return d;
}

ModelParams unit_params() {
  ModelParams::Values v;
  v.rho1 = 2.0;
  v.rho2 = 1.0;
  v.eta1 = 1.0;
  v.eta2 = 0.5;
  v.sigma12 = 0.3;
  v.epsilon = 0.1;
  v.mobility = 0.1;
  v.alpha_gn = 1.5;
  v.body_force = Vec2(0.3, -0.2);
  return ModelParams(v);
}

StabParams unit_stab() {
  StabParams s;
  s.beta = 10.0;
  s.gamma_skeleton = 0.1;
  s.gamma_ghost = 0.1;
  return s;
}

Eigen::VectorXd project(const Discretization& d, const std::function<double(const Vec2&)>& f) {
  const Eigen::MatrixXd M = Eigen::MatrixXd(d.assembler->mass_matrix(0.0));
  return M.ldlt().solve(d.assembler->load_vector(f));
}

namespace {

std::function<double(const Vec2&)> kink(double c, int k) {
  return [c, k](const Vec2& x) {
    const double s = x.x() - c;
    return s > 0.0 ? std::pow(s, k) / std::tgamma(k + 1.0) : 0.0;
  };
}

double line_length(const Discretization& d, const std::vector<Face>& faces, double c) {
  double len = 0.0;
  for (const Face& f : faces) {
    if (f.axis != 0) continue;
    const ElementFrame fr = d.mesh->ambient.frame(f.lower);
    if (std::abs(fr.lower.x() + fr.size.x() - c) < 1e-12) len += fr.size.y();
  }
  return len;
}

KinkPenalty kink_penalty(int cells, int degree, const ModelParams& params, const StabParams& stab, bool ghost) {
  const double c = 0.5;
  const AmbientMesh am = build_ambient(Vec2::Zero(), Vec2::Ones(), {cells, cells});
  const auto full = discretize(am, levelset::everywhere(), degree, params, stab);
  const Eigen::VectorXd amb = project(*full, kink(c, degree));
  const auto d = ghost ? discretize(am, levelset::disk(Vec2(0.53, 0.47), 0.37), degree, params, stab)
                       : discretize(am, levelset::everywhere(), degree, params, stab);
  const int n = d->functions();
  const Field field = ghost ? Phi : P;
  FieldState s(n, 0.0);
  for (int i = 0; i < n; ++i) s.coeffs[field * n + i] = amb[full->space->compact_function(d->space->ambient_function(i))];
  AssemblyOptions opt;
  opt.terms = ghost ? kGhost : kSkeleton;
  const Eigen::VectorXd r = d->assembler->residual(s, s, opt);
  KinkPenalty out;
  out.energy = std::abs(s.coeffs.segment(field * n, n).dot(r.segment(field * n, n)));
  out.length = line_length(*d, ghost ? d->mesh->ghost_faces : d->mesh->skeleton_faces, c);
  out.h = am.h();
  return out;
}

}  // namespace

KinkPenalty skeleton_kink_penalty(int cells, int degree, const ModelParams& params, const StabParams& stab) {
  return kink_penalty(cells, degree, params, stab, false);
}

KinkPenalty ghost_kink_penalty(int cells, int degree, const ModelParams& params, const StabParams& stab) {
  return kink_penalty(cells, degree, params, stab, true);
}

}  // namespace nsch::testing
