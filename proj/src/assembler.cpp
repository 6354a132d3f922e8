#include "nsch/assembler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <thread>

#include "nsch/gauss.hpp"

namespace nsch {

namespace {

int default_threads() {
  if (const char* env = std::getenv("NSCH_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

struct Assembler::Workspace {
  std::vector<double> values;
  Eigen::VectorXd residual;
  int bad_element = -2;  // -2: none
  std::string bad_what;
  std::vector<double> coef;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> gemm;
};

Assembler::Assembler(const SplineSpace& space, const CutQuadrature& quad, const ModelParams& params,
                     const StabParams& stab, WallVelocity wall_velocity)
    : space_(&space),
      params_(params),
      stab_(stab),
      wall_velocity_(std::move(wall_velocity)),
      h_(space.mesh().ambient.h()),
      nb_(space.functions_per_element()),
      threads_(default_threads()) {
  stab_.validate();
  const ImmersedMesh& mesh = space.mesh();
  if (quad.elements.size() != static_cast<std::size_t>(mesh.ambient.num_elements()) ||
      quad.facets.size() != mesh.boundary_facets.size())
    throw ContractViolation("cut quadrature does not belong to this mesh");

  volume_.resize(mesh.ambient.num_elements());
  wall_.resize(mesh.ambient.num_elements());
  for (int e : mesh.active_elements) {
    const auto& eq = quad.elements[e];
    std::vector<Vec2> loc, x, nrm;
    std::vector<double> w;
    for (const auto& p : eq.volume) {
      loc.push_back(p.local);
      x.push_back(p.x);
      w.push_back(p.weight);
    }
    volume_[e] = cache_points(e, loc, w, x, {});
    loc.clear(), x.clear(), w.clear();
    for (const auto& p : eq.surface) {
      loc.push_back(p.local);
      x.push_back(p.x);
      w.push_back(p.weight);
      nrm.push_back(p.normal);
    }
    wall_[e] = cache_points(e, loc, w, x, nrm);
  }

  for (std::size_t i = 0; i < mesh.boundary_facets.size(); ++i) {
    const auto& bf = mesh.boundary_facets[i];
    if (bf.tag == BoundaryTag::Symmetric) continue;
    std::vector<Vec2> loc, x, nrm;
    std::vector<double> w;
    for (const auto& p : quad.facets[i]) {
      loc.push_back(p.local);
      x.push_back(p.x);
      w.push_back(p.weight);
      nrm.push_back(p.normal);
    }
    if (w.empty()) continue;
    facets_.push_back({bf.element, bf.tag, cache_points(bf.element, loc, w, x, nrm)});
  }

  const int k = space.degree();
  const GaussRule& rule = gauss_legendre(k + 1);
  std::set<std::pair<int, int>> ghost;
  for (const auto& f : mesh.ghost_faces) ghost.insert({f.lower, f.upper});
  for (const auto& f : mesh.skeleton_faces) {
    FaceData fd;
    fd.face = f;
    fd.ghost = ghost.count({f.lower, f.upper}) > 0;
    const double len = space.face_length(f);
    std::map<int, int> slot;
    std::vector<FaceJump> jumps;
    for (double s : rule.points) {
      jumps.push_back(space.face_jump(f, s, k));
      for (int fn : jumps.back().functions) slot.emplace(fn, 0);
    }
    for (auto& [fn, idx] : slot) {
      idx = static_cast<int>(fd.functions.size());
      fd.functions.push_back(fn);
    }
    const std::size_t m = fd.functions.size();
    fd.jumps.assign(rule.points.size() * m, 0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      fd.weights.push_back(rule.weights[q] * len);
      for (std::size_t a = 0; a < jumps[q].functions.size(); ++a)
        fd.jumps[q * m + slot.at(jumps[q].functions[a])] = jumps[q].jump[a];
    }
    fd.mid_value.assign(m, 0.0);
    const Eigen::VectorXd nmid = space.eval_derivative(f.lower, space.face_local_lower(f, 0.5), 0, 0);
    const auto& fl = space.element_functions(f.lower);
    for (std::size_t a = 0; a < fl.size(); ++a) fd.mid_value[slot.at(fl[a])] += nmid[a];
    faces_.push_back(std::move(fd));
  }

  build_pattern();
}

Assembler::PointSet Assembler::cache_points(int element, const std::vector<Vec2>& local, const std::vector<double>& w,
                                            const std::vector<Vec2>& x, const std::vector<Vec2>& normal) const {
  PointSet ps;
  ps.npts = static_cast<int>(w.size());
  ps.w = w;
  ps.x = x;
  ps.normal = normal;
  ps.N.resize(static_cast<std::size_t>(ps.npts) * nb_);
  ps.Gx.resize(ps.N.size());
  ps.Gy.resize(ps.N.size());
  for (int q = 0; q < ps.npts; ++q) {
    const ElementBasis b = space_->eval(element, local[q]);
    for (int a = 0; a < nb_; ++a) {
      ps.N[q * nb_ + a] = b.value[a];
      ps.Gx[q * nb_ + a] = b.gradient(a, 0);
      ps.Gy[q * nb_ + a] = b.gradient(a, 1);
    }
  }
  return ps;
}

void Assembler::build_pattern() {
  const int n = space_->num_functions();
  std::vector<std::vector<int>> adj(n);
  auto couple = [&](const std::vector<int>& fns) {
    for (int a : fns)
      for (int b : fns) adj[a].push_back(b);
  };
  for (int e : space_->mesh().active_elements) couple(space_->element_functions(e));
  for (const auto& f : faces_) couple(f.functions);
  for (auto& row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  const int N = kNumFields * n;
  std::vector<int> outer(N + 1, 0), inner;
  std::size_t nnz = 0;
  for (const auto& row : adj) nnz += row.size();
  inner.reserve(nnz * kNumFields * kNumFields);
  for (int fr = 0; fr < kNumFields; ++fr)
    for (int a = 0; a < n; ++a) {
      const int r = fr * n + a;
      for (int fc = 0; fc < kNumFields; ++fc)
        for (int b : adj[a]) inner.push_back(fc * n + b);
      outer[r + 1] = static_cast<int>(inner.size());
    }
  std::vector<double> zeros(inner.size(), 0.0);
  pattern_ = Eigen::Map<const SparseMatrix>(N, N, static_cast<int>(inner.size()), outer.data(), inner.data(),
                                            zeros.data());
  pattern_.makeCompressed();
}

void Assembler::scatter(const std::vector<int>& dofs, const Eigen::VectorXd& re, const Eigen::MatrixXd* ke,
                        int element, Workspace& ws) const {
  if (!finite(re) || (ke && !ke->allFinite())) {
    if (ws.bad_element == -2) ws.bad_element = element;
    return;
  }
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  const int m = static_cast<int>(dofs.size());
  for (int i = 0; i < m; ++i) {
    const int r = dofs[i];
    ws.residual[r] += re[i];
    if (!ke) continue;
    const int* begin = inner + outer[r];
    const int* end = inner + outer[r + 1];
    for (int j = 0; j < m; ++j) {
      const double v = (*ke)(i, j);
      if (v == 0.0) continue;
      const int* pos = std::lower_bound(begin, end, dofs[j]);
      ws.values[pos - inner] += v;
    }
  }
}

void Assembler::volume_jacobian(const PointSet& ps, const std::vector<double>& coef, Eigen::MatrixXd& ke,
                                Workspace& ws) const {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int nb = nb_, npts = ps.npts;
  const Eigen::Map<const RowMat> X[3] = {Eigen::Map<const RowMat>(ps.N.data(), npts, nb),
                                         Eigen::Map<const RowMat>(ps.Gx.data(), npts, nb),
                                         Eigen::Map<const RowMat>(ps.Gy.data(), npts, nb)};
  RowMat& Y = ws.gemm;
  Y.resize(npts, nb);
  for (int fr = 0; fr < kNumFields; ++fr)
    for (int fc = 0; fc < kNumFields; ++fc) {
      const double* cb = &coef[static_cast<std::size_t>(fr * kNumFields + fc) * 9 * npts];
      for (int b = 0; b < 3; ++b) {
        bool any = false;
        for (int a = 0; a < 3; ++a) {
          const Eigen::Map<const Eigen::VectorXd> c(cb + (a * 3 + b) * npts, npts);
          if (c.cwiseAbs().maxCoeff() == 0.0) continue;
          if (any)
            Y.noalias() += c.asDiagonal() * X[a];
          else
            Y.noalias() = c.asDiagonal() * X[a];
          any = true;
        }
        if (any) ke.block(fr * nb, fc * nb, nb, nb).noalias() += Y.transpose() * X[b];
      }
    }
}

void Assembler::element_terms(int e, const FieldState& s, const FieldState& prev, const AssemblyOptions& opt,
                              bool with_jacobian, Workspace& ws) const {
  const auto& fns = space_->element_functions(e);
  const int nb = nb_;
  const int n = space_->num_functions();
  const int L = kNumFields * nb;
  std::vector<int> dofs(L);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < nb; ++a) dofs[f * nb + a] = f * n + fns[a];

  // Local coefficients.
  Eigen::MatrixXd c(nb, kNumFields), cn(nb, kNumFields);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < nb; ++a) {
      c(a, f) = s.coeffs[f * n + fns[a]];
      cn(a, f) = prev.coeffs[f * n + fns[a]];
    }

  Eigen::VectorXd re = Eigen::VectorXd::Zero(L);
  Eigen::MatrixXd ke;
  if (with_jacobian) ke = Eigen::MatrixXd::Zero(L, L);

  const ModelParams& pm = params_;
  const double sig = pm.sigma(), eps = pm.epsilon(), mob = pm.mobility();
  const double cJ = opt.convection ? pm.mass_flux_coefficient() : 0.0;
  const double cv = opt.convection ? 1.0 : 0.0;
  const double idt = opt.inv_dt;
  const Vec2 F = pm.body_force();

  if (opt.terms & kVolume) {
    const PointSet& ps = volume_[e];
    const int npts = ps.npts;
    std::vector<double>& coef = ws.coef;
    if (with_jacobian) coef.assign(static_cast<std::size_t>(kNumFields * kNumFields * 9) * npts, 0.0);
    for (int q = 0; q < npts; ++q) {
      const Eigen::Map<const Eigen::VectorXd> N(&ps.N[q * nb], nb), Gx(&ps.Gx[q * nb], nb), Gy(&ps.Gy[q * nb], nb);
      const double w = ps.w[q];
      const Vec2 u(N.dot(c.col(Ux)), N.dot(c.col(Uy)));
      const Vec2 un(N.dot(cn.col(Ux)), N.dot(cn.col(Uy)));
      Mat2 gu;  // gu(i, j) = d u_i / d x_j
      gu << Gx.dot(c.col(Ux)), Gy.dot(c.col(Ux)), Gx.dot(c.col(Uy)), Gy.dot(c.col(Uy));
      const double p = N.dot(c.col(P));
      const double phi = N.dot(c.col(Phi)), phin = N.dot(cn.col(Phi));
      const Vec2 gphi(Gx.dot(c.col(Phi)), Gy.dot(c.col(Phi)));
      const double mu = N.dot(c.col(Mu));
      const Vec2 gmu(Gx.dot(c.col(Mu)), Gy.dot(c.col(Mu)));

      const double rho = pm.density(phi), drho = pm.density_slope(phi), ddrho = pm.density_curvature(phi);
      const double rhon = pm.density(phin);
      const double eta = pm.viscosity(phi), deta = pm.viscosity_slope(phi);
      const double psi = double_well(phi), dpsi = double_well_slope(phi), ddpsi = double_well_curvature(phi);
      const double E = 0.5 * sig * eps * gphi.squaredNorm() + sig / eps * psi;
      const Mat2 S = 0.5 * (gu + gu.transpose());
      const double phiu = gphi.dot(u);

      const Eigen::VectorXd uG = u.x() * Gx + u.y() * Gy;
      const Eigen::VectorXd phiG = gphi.x() * Gx + gphi.y() * Gy;
      const Eigen::VectorXd muG = gmu.x() * Gx + gmu.y() * Gy;
      const Eigen::Map<const Eigen::VectorXd>* G[2] = {&Gx, &Gy};

      // Momentum.
      for (int i = 0; i < 2; ++i) {
        const auto& Gi = *G[i];
        const double convi = gu.row(i).dot(u);  // u . grad(u_i)
        re.segment(i * nb, nb) +=
            w * ((rho * u[i] - rhon * un[i]) * idt * N +
                 cv * (-0.5 * rho * u[i] * uG + 0.5 * drho * phiu * u[i] * N + 0.5 * rho * convi * N) +
                 cJ * u[i] * muG + 2.0 * eta * (S(i, 0) * Gx + S(i, 1) * Gy) - sig * eps * gphi[i] * phiG + E * Gi -
                 p * Gi - F[i] * N);
      }
      // Mass.
      re.segment(P * nb, nb) += w * (gu(0, 0) + gu(1, 1)) * N;
      // Potential closure (omega rows).
      re.segment(Phi * nb, nb) += w * (mu * N - sig * eps * phiG - sig / eps * dpsi * N);
      // Transport (lambda rows).
      re.segment(Mu * nb, nb) += w * ((phi - phin) * idt * N - phi * uG + mob * muG);

      if (!with_jacobian) continue;
      // Jacobian coefficients: block (test field, trial field) gains
      // sum_q c_ab(q) X_a X_b^T with X in {N, Gx, Gy}.
      auto C = [&](int fr, int fc, int a, int b) -> double& {
        return coef[((fr * kNumFields + fc) * 9 + a * 3 + b) * npts + q];
      };
      const double wcv = w * cv;
      for (int i = 0; i < 2; ++i) {
        const double convi = gu.row(i).dot(u);
        for (int kk = 0; kk < 2; ++kk) {
          const double d = i == kk ? 1.0 : 0.0;
          C(i, kk, 0, 0) += w * rho * idt * d + 0.5 * wcv * (drho * (gphi[kk] * u[i] + d * phiu) + rho * gu(i, kk));
          C(i, kk, 1, 0) += -0.5 * wcv * rho * d * u.x() + cJ * d * w * gmu.x();
          C(i, kk, 2, 0) += -0.5 * wcv * rho * d * u.y() + cJ * d * w * gmu.y();
          C(i, kk, 1 + kk, 0) += -0.5 * wcv * rho * u[i];
          C(i, kk, 0, 1) += 0.5 * wcv * rho * d * u.x();
          C(i, kk, 0, 2) += 0.5 * wcv * rho * d * u.y();
          C(i, kk, 1, 1) += w * eta * d;
          C(i, kk, 2, 2) += w * eta * d;
          C(i, kk, 1 + kk, 1 + i) += w * eta;
        }
        C(i, P, 1 + i, 0) += -w;
        C(i, Phi, 0, 0) += w * drho * u[i] * idt + wcv * (0.5 * ddrho * phiu * u[i] + 0.5 * drho * convi);
        C(i, Phi, 1, 0) += -0.5 * wcv * drho * u[i] * u.x() + 2.0 * w * deta * S(i, 0);
        C(i, Phi, 2, 0) += -0.5 * wcv * drho * u[i] * u.y() + 2.0 * w * deta * S(i, 1);
        C(i, Phi, 0, 1) += 0.5 * wcv * drho * u[i] * u.x();
        C(i, Phi, 0, 2) += 0.5 * wcv * drho * u[i] * u.y();
        C(i, Phi, 1, 1 + i) += -sig * eps * w * gphi.x();
        C(i, Phi, 2, 1 + i) += -sig * eps * w * gphi.y();
        C(i, Phi, 1, 1) += -sig * eps * w * gphi[i];
        C(i, Phi, 2, 2) += -sig * eps * w * gphi[i];
        C(i, Phi, 1 + i, 1) += w * sig * eps * gphi.x();
        C(i, Phi, 1 + i, 2) += w * sig * eps * gphi.y();
        C(i, Phi, 1 + i, 0) += w * sig / eps * dpsi;
        C(i, Mu, 1, 1) += w * cJ * u[i];
        C(i, Mu, 2, 2) += w * cJ * u[i];
      }
      C(P, Ux, 0, 1) += w;
      C(P, Uy, 0, 2) += w;
      C(Phi, Mu, 0, 0) += w;
      C(Phi, Phi, 1, 1) += -w * sig * eps;
      C(Phi, Phi, 2, 2) += -w * sig * eps;
      C(Phi, Phi, 0, 0) += -w * sig / eps * ddpsi;
      C(Mu, Phi, 0, 0) += w * idt;
      C(Mu, Phi, 1, 0) += -w * u.x();
      C(Mu, Phi, 2, 0) += -w * u.y();
      C(Mu, Ux, 1, 0) += -w * phi;
      C(Mu, Uy, 2, 0) += -w * phi;
      C(Mu, Mu, 1, 1) += w * mob;
      C(Mu, Mu, 2, 2) += w * mob;
    }
    if (with_jacobian && npts > 0) volume_jacobian(ps, coef, ke, ws);
  }

  if (opt.terms & (kBoundary | kNitsche)) {
    const PointSet& ps = wall_[e];
    for (int q = 0; q < ps.npts; ++q) {
      const Eigen::Map<const Eigen::VectorXd> N(&ps.N[q * nb], nb), Gx(&ps.Gx[q * nb], nb), Gy(&ps.Gy[q * nb], nb);
      const double w = ps.w[q];
      const Vec2& nrm = ps.normal[q];
      const Vec2 uw = wall_velocity_ ? wall_velocity_(ps.x[q], s.t) : Vec2::Zero();
      const Vec2 u(N.dot(c.col(Ux)), N.dot(c.col(Uy)));
      Mat2 gu;
      gu << Gx.dot(c.col(Ux)), Gy.dot(c.col(Ux)), Gx.dot(c.col(Uy)), Gy.dot(c.col(Uy));
      const double p = N.dot(c.col(P));
      const double phi = N.dot(c.col(Phi));
      const Vec2 gphi(Gx.dot(c.col(Phi)), Gy.dot(c.col(Phi)));
      const double un = u.dot(nrm);
      const Eigen::VectorXd nG = nrm.x() * Gx + nrm.y() * Gy;

      if (opt.terms & kBoundary) {
        const double alpha = pm.alpha_gn();
        const double dsf = pm.solid_fluid_tension_slope(phi), ddsf = pm.solid_fluid_tension_curvature(phi);
        for (int i = 0; i < 2; ++i) re.segment(i * nb, nb) += w * alpha * (u[i] - uw[i]) * N;
        re.segment(Phi * nb, nb) += -w * dsf * N;
        if (with_jacobian) {
          const Eigen::MatrixXd NN = w * N * N.transpose();
          for (int i = 0; i < 2; ++i) ke.block(i * nb, i * nb, nb, nb) += alpha * NN;
          ke.block(Phi * nb, Phi * nb, nb, nb) += -ddsf * NN;
        }
      }
      if (opt.terms & kNitsche) {
        const double eta = pm.viscosity(phi), deta = pm.viscosity_slope(phi);
        const double psi = double_well(phi), dpsi = double_well_slope(phi);
        const double E = 0.5 * sig * eps * gphi.squaredNorm() + sig / eps * psi;
        const double nSn = nrm.dot(0.5 * (gu + gu.transpose()) * nrm);
        const double pen = stab_.beta / h_;
        for (int i = 0; i < 2; ++i)
          re.segment(i * nb, nb) += w * (pen * eta * un * nrm[i] * N + nrm[i] * (p - 2.0 * eta * nSn - E) * N -
                                         2.0 * eta * un * nrm[i] * nG);
        re.segment(P * nb, nb) += -w * un * N;
        if (with_jacobian) {
          const Eigen::VectorXd phiG = gphi.x() * Gx + gphi.y() * Gy;
          const Eigen::VectorXd dE = sig * eps * phiG + sig / eps * dpsi * N;
          for (int i = 0; i < 2; ++i) {
            for (int kk = 0; kk < 2; ++kk)
              ke.block(i * nb, kk * nb, nb, nb) +=
                  w * nrm[i] * nrm[kk] *
                  (pen * eta * N * N.transpose() - 2.0 * eta * N * nG.transpose() - 2.0 * eta * nG * N.transpose());
            ke.block(i * nb, P * nb, nb, nb) += w * nrm[i] * N * N.transpose();
            ke.block(i * nb, Phi * nb, nb, nb) +=
                w * nrm[i] *
                (pen * deta * un * N * N.transpose() - 2.0 * deta * nSn * N * N.transpose() - N * dE.transpose() -
                 2.0 * deta * un * nG * N.transpose());
          }
          ke.block(P * nb, Ux * nb, nb, nb) += -w * nrm.x() * N * N.transpose();
          ke.block(P * nb, Uy * nb, nb, nb) += -w * nrm.y() * N * N.transpose();
        }
      }
    }
  }
  scatter(dofs, re, with_jacobian ? &ke : nullptr, e, ws);
}

void Assembler::facet_terms(const FacetData& fd, const FieldState& s, const AssemblyOptions& opt, bool with_jacobian,
                            Workspace& ws) const {
  const int e = fd.element;
  const auto& fns = space_->element_functions(e);
  const int nb = nb_;
  const int n = space_->num_functions();
  const int L = kNumFields * nb;
  std::vector<int> dofs(L);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < nb; ++a) dofs[f * nb + a] = f * n + fns[a];
  Eigen::MatrixXd c(nb, kNumFields);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < nb; ++a) c(a, f) = s.coeffs[f * n + fns[a]];

  Eigen::VectorXd re = Eigen::VectorXd::Zero(L);
  Eigen::MatrixXd ke;
  if (with_jacobian) ke = Eigen::MatrixXd::Zero(L, L);
  const ModelParams& pm = params_;
  const double sig = pm.sigma(), eps = pm.epsilon();
  const PointSet& ps = fd.points;

  for (int q = 0; q < ps.npts; ++q) {
    const Eigen::Map<const Eigen::VectorXd> N(&ps.N[q * nb], nb), Gx(&ps.Gx[q * nb], nb), Gy(&ps.Gy[q * nb], nb);
    const double w = ps.w[q];
    const Vec2& nrm = ps.normal[q];
    const Vec2 u(N.dot(c.col(Ux)), N.dot(c.col(Uy)));
    const double phi = N.dot(c.col(Phi));
    const double un = u.dot(nrm);
    const Eigen::MatrixXd NN = w * N * N.transpose();

    if (fd.tag == BoundaryTag::Inflow || fd.tag == BoundaryTag::Outflow) {
      if (opt.terms & kBoundary) {
        re.segment(Mu * nb, nb) += w * un * phi * N;
        if (with_jacobian) {
          ke.block(Mu * nb, Phi * nb, nb, nb) += un * NN;
          ke.block(Mu * nb, Ux * nb, nb, nb) += nrm.x() * phi * NN;
          ke.block(Mu * nb, Uy * nb, nb, nb) += nrm.y() * phi * NN;
        }
        if (fd.tag == BoundaryTag::Outflow && opt.convection) {
          const double rho = pm.density(phi), drho = pm.density_slope(phi);
          for (int i = 0; i < 2; ++i) {
            re.segment(i * nb, nb) += w * 0.5 * rho * un * u[i] * N;
            if (!with_jacobian) continue;
            for (int kk = 0; kk < 2; ++kk)
              ke.block(i * nb, kk * nb, nb, nb) += 0.5 * rho * (nrm[kk] * u[i] + (i == kk ? un : 0.0)) * NN;
            ke.block(i * nb, Phi * nb, nb, nb) += 0.5 * drho * un * u[i] * NN;
          }
        }
      }
      continue;
    }

    // Conforming wall facet: same treatment as the immersed walls.
    Mat2 gu;
    gu << Gx.dot(c.col(Ux)), Gy.dot(c.col(Ux)), Gx.dot(c.col(Uy)), Gy.dot(c.col(Uy));
    const double p = N.dot(c.col(P));
    const Vec2 gphi(Gx.dot(c.col(Phi)), Gy.dot(c.col(Phi)));
    const Eigen::VectorXd nG = nrm.x() * Gx + nrm.y() * Gy;
    if (opt.terms & kBoundary) {
      const Vec2 uw = wall_velocity_ ? wall_velocity_(ps.x[q], s.t) : Vec2::Zero();
      const double alpha = pm.alpha_gn();
      for (int i = 0; i < 2; ++i) re.segment(i * nb, nb) += w * alpha * (u[i] - uw[i]) * N;
      re.segment(Phi * nb, nb) += -w * pm.solid_fluid_tension_slope(phi) * N;
      if (with_jacobian) {
        for (int i = 0; i < 2; ++i) ke.block(i * nb, i * nb, nb, nb) += alpha * NN;
        ke.block(Phi * nb, Phi * nb, nb, nb) += -pm.solid_fluid_tension_curvature(phi) * NN;
      }
    }
    if (opt.terms & kNitsche) {
      const double eta = pm.viscosity(phi), deta = pm.viscosity_slope(phi);
      const double E = 0.5 * sig * eps * gphi.squaredNorm() + sig / eps * double_well(phi);
      const double nSn = nrm.dot(0.5 * (gu + gu.transpose()) * nrm);
      const double pen = stab_.beta / h_;
      for (int i = 0; i < 2; ++i)
        re.segment(i * nb, nb) +=
            w * (pen * eta * un * nrm[i] * N + nrm[i] * (p - 2.0 * eta * nSn - E) * N - 2.0 * eta * un * nrm[i] * nG);
      re.segment(P * nb, nb) += -w * un * N;
      if (with_jacobian) {
        const Eigen::VectorXd phiG = gphi.x() * Gx + gphi.y() * Gy;
        const Eigen::VectorXd dE = sig * eps * phiG + sig / eps * double_well_slope(phi) * N;
        for (int i = 0; i < 2; ++i) {
          for (int kk = 0; kk < 2; ++kk)
            ke.block(i * nb, kk * nb, nb, nb) +=
                w * nrm[i] * nrm[kk] *
                (pen * eta * N * N.transpose() - 2.0 * eta * N * nG.transpose() - 2.0 * eta * nG * N.transpose());
          ke.block(i * nb, P * nb, nb, nb) += w * nrm[i] * N * N.transpose();
          ke.block(i * nb, Phi * nb, nb, nb) +=
              w * nrm[i] *
              (pen * deta * un * N * N.transpose() - 2.0 * deta * nSn * N * N.transpose() - N * dE.transpose() -
               2.0 * deta * un * nG * N.transpose());
        }
        ke.block(P * nb, Ux * nb, nb, nb) += -w * nrm.x() * N * N.transpose();
        ke.block(P * nb, Uy * nb, nb, nb) += -w * nrm.y() * N * N.transpose();
      }
    }
  }
  scatter(dofs, re, with_jacobian ? &ke : nullptr, e, ws);
}

void Assembler::face_terms(const FaceData& fd, const FieldState& s, const AssemblyOptions& opt, bool with_jacobian,
                           Workspace& ws) const {
  const bool skel = (opt.terms & kSkeleton) != 0;
  const bool ghost = fd.ghost && (opt.terms & kGhost) != 0;
  if (!skel && !ghost) return;
  const int m = static_cast<int>(fd.functions.size());
  const int n = space_->num_functions();
  const int k = space_->degree();
  std::vector<int> dofs(kNumFields * m);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < m; ++a) dofs[f * m + a] = f * n + fd.functions[a];

  Eigen::MatrixXd c(m, kNumFields);
  for (int f = 0; f < kNumFields; ++f)
    for (int a = 0; a < m; ++a) c(a, f) = s.coeffs[f * n + fd.functions[a]];
  const Eigen::Map<const Eigen::VectorXd> Nmid(fd.mid_value.data(), m);
  const double phi_mid = Nmid.dot(c.col(Phi));
  const double eta = params_.viscosity(phi_mid), deta = params_.viscosity_slope(phi_mid);

  Eigen::VectorXd re = Eigen::VectorXd::Zero(kNumFields * m);
  Eigen::MatrixXd ke;
  if (with_jacobian) ke = Eigen::MatrixXd::Zero(kNumFields * m, kNumFields * m);

  const double cs = stab_.gamma_skeleton * std::pow(h_, 2 * k + 1);
  const double cg = stab_.gamma_ghost * std::pow(h_, 2 * k - 1);
  const double se = params_.sigma() * params_.epsilon();
  const double mob = params_.mobility();

  for (std::size_t q = 0; q < fd.weights.size(); ++q) {
    const Eigen::Map<const Eigen::VectorXd> J(&fd.jumps[q * m], m);
    const double w = fd.weights[q];
    const Eigen::VectorXd jc = J.transpose() * c;  // field jumps, one per field
    if (skel) {
      re.segment(P * m, m) += w * cs / eta * jc[P] * J;
      if (with_jacobian) {
        ke.block(P * m, P * m, m, m) += w * cs / eta * J * J.transpose();
        ke.block(P * m, Phi * m, m, m) += -w * cs * deta / (eta * eta) * jc[P] * J * Nmid.transpose();
      }
    }
    if (ghost) {
      for (int i = 0; i < 2; ++i) {
        re.segment(i * m, m) += w * cg * eta * jc[i] * J;
        if (with_jacobian) {
          ke.block(i * m, i * m, m, m) += w * cg * eta * J * J.transpose();
          ke.block(i * m, Phi * m, m, m) += w * cg * deta * jc[i] * J * Nmid.transpose();
        }
      }
      re.segment(Phi * m, m) += -w * cg * se * jc[Phi] * J;
      re.segment(Mu * m, m) += w * cg * mob * jc[Mu] * J;
      if (with_jacobian) {
        ke.block(Phi * m, Phi * m, m, m) += -w * cg * se * J * J.transpose();
        ke.block(Mu * m, Mu * m, m, m) += w * cg * mob * J * J.transpose();
      }
    }
  }
  scatter(dofs, re, with_jacobian ? &ke : nullptr, fd.face.lower, ws);
}

void Assembler::assemble(const FieldState& state, const FieldState& prev, const AssemblyOptions& opt,
                         StabilizedSystem& out, bool with_jacobian) const {
  const int N = num_dofs();
  if (state.size() != N || prev.size() != N) throw ContractViolation("state size does not match the spline space");
  if (opt.inv_dt < 0.0 || !std::isfinite(opt.inv_dt)) throw ContractViolation("1/dt must be finite and nonnegative");
  const ImmersedMesh& mesh = space_->mesh();
  const std::size_t ne = mesh.active_elements.size();
  const std::size_t nf = facets_.size();
  const std::size_t nface = faces_.size();
  const std::size_t total = ne + nf + nface;
  const int T = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(threads_), std::max<std::size_t>(total, 1)));
  const std::size_t nnz = static_cast<std::size_t>(pattern_.nonZeros());

  std::vector<Workspace> ws(T);
  auto work = [&](int t) {
    Workspace& w = ws[t];
    w.residual = Eigen::VectorXd::Zero(N);
    if (with_jacobian) w.values.assign(nnz, 0.0);
    const std::size_t lo = total * t / T, hi = total * (t + 1) / T;
    try {
      for (std::size_t i = lo; i < hi; ++i) {
        if (i < ne)
          element_terms(mesh.active_elements[i], state, prev, opt, with_jacobian, w);
        else if (i < ne + nf)
          facet_terms(facets_[i - ne], state, opt, with_jacobian, w);
        else
          face_terms(faces_[i - ne - nf], state, opt, with_jacobian, w);
      }
    } catch (const std::exception& ex) {
      w.bad_element = -1;
      w.bad_what = ex.what();
    }
  };
  if (T == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < T; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& w : ws) {
    if (w.bad_element == -1) throw AssemblyError("assembly failed: " + w.bad_what, -1);
    if (w.bad_element >= 0)
      throw AssemblyError("non-finite value in the integrand of element " + std::to_string(w.bad_element),
                          w.bad_element);
  }
  out.residual = ws[0].residual;
  for (int t = 1; t < T; ++t) out.residual += ws[t].residual;
  if (with_jacobian) {
    out.jacobian = pattern_;
    double* v = out.jacobian.valuePtr();
    for (int t = 0; t < T; ++t)
      for (std::size_t i = 0; i < nnz; ++i) v[i] += ws[t].values[i];
  }
}

Eigen::VectorXd Assembler::residual(const FieldState& state, const FieldState& prev,
                                    const AssemblyOptions& opt) const {
  StabilizedSystem sys;
  assemble(state, prev, opt, sys, false);
  return std::move(sys.residual);
}

SparseMatrix Assembler::mass_matrix(double ghost_scale) const {
  const int n = space_->num_functions();
  std::vector<Eigen::Triplet<double>> trip;
  for (int e : space_->mesh().active_elements) {
    const auto& fns = space_->element_functions(e);
    const PointSet& ps = volume_[e];
    Eigen::MatrixXd me = Eigen::MatrixXd::Zero(nb_, nb_);
    for (int q = 0; q < ps.npts; ++q) {
      const Eigen::Map<const Eigen::VectorXd> N(&ps.N[q * nb_], nb_);
      me += ps.w[q] * N * N.transpose();
    }
    for (int a = 0; a < nb_; ++a)
      for (int b = 0; b < nb_; ++b) trip.emplace_back(fns[a], fns[b], me(a, b));
  }
  if (ghost_scale > 0.0) {
    const double c = ghost_scale * std::pow(h_, 2 * space_->degree() + 1);
    for (const auto& fd : faces_) {
      if (!fd.ghost) continue;
      const int m = static_cast<int>(fd.functions.size());
      for (std::size_t q = 0; q < fd.weights.size(); ++q)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b)
            trip.emplace_back(fd.functions[a], fd.functions[b],
                              c * fd.weights[q] * fd.jumps[q * m + a] * fd.jumps[q * m + b]);
    }
  }
  SparseMatrix M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd Assembler::load_vector(const std::function<double(const Vec2&)>& f) const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space_->num_functions());
  for (int e : space_->mesh().active_elements) {
    const auto& fns = space_->element_functions(e);
    const PointSet& ps = volume_[e];
    for (int q = 0; q < ps.npts; ++q) {
      const double v = ps.w[q] * f(ps.x[q]);
      for (int a = 0; a < nb_; ++a) b[fns[a]] += v * ps.N[q * nb_ + a];
    }
  }
  return b;
}

Assembler::Integrals Assembler::integrals(const FieldState& s) const {
  Integrals out;
  const int n = space_->num_functions();
  const double sig = params_.sigma(), eps = params_.epsilon();
  auto field_at = [&](const PointSet& ps, int q, const std::vector<int>& fns, Field f, double& v, Vec2& g) {
    v = 0.0;
    g.setZero();
    for (int a = 0; a < nb_; ++a) {
      const double c = s.coeffs[f * n + fns[a]];
      v += c * ps.N[q * nb_ + a];
      g += c * Vec2(ps.Gx[q * nb_ + a], ps.Gy[q * nb_ + a]);
    }
  };
  for (int e : space_->mesh().active_elements) {
    const auto& fns = space_->element_functions(e);
    const PointSet& ps = volume_[e];
    for (int q = 0; q < ps.npts; ++q) {
      double ux, uy, phi;
      Vec2 g, gphi;
      field_at(ps, q, fns, Ux, ux, g);
      field_at(ps, q, fns, Uy, uy, g);
      field_at(ps, q, fns, Phi, phi, gphi);
      const double w = ps.w[q];
      const double speed2 = ux * ux + uy * uy;
      out.volume += w;
      out.phase += w * phi;
      out.mixture_energy += w * (0.5 * sig * eps * gphi.squaredNorm() + sig / eps * double_well(phi));
      out.kinetic_energy += w * 0.5 * params_.density(phi) * speed2;
      out.max_speed = std::max(out.max_speed, std::sqrt(speed2));
    }
  }
  for (const auto& fd : facets_) {
    if (fd.tag != BoundaryTag::Inflow && fd.tag != BoundaryTag::Outflow) continue;
    const auto& fns = space_->element_functions(fd.element);
    for (int q = 0; q < fd.points.npts; ++q) {
      double ux, uy, phi;
      Vec2 g;
      field_at(fd.points, q, fns, Ux, ux, g);
      field_at(fd.points, q, fns, Uy, uy, g);
      field_at(fd.points, q, fns, Phi, phi, g);
      out.boundary_phase_flux += fd.points.w[q] * Vec2(ux, uy).dot(fd.points.normal[q]) * phi;
    }
  }
  return out;
}

void apply_constraints(StabilizedSystem& sys, const Constraints& c) {
  SparseMatrix& J = sys.jacobian;
  if (static_cast<std::size_t>(J.rows()) != c.fixed.size()) throw ContractViolation("constraint map size mismatch");
  for (int r = 0; r < J.outerSize(); ++r) {
    const bool row_fixed = c.fixed[r] != 0;
    for (SparseMatrix::InnerIterator it(J, r); it; ++it) {
      if (row_fixed || c.fixed[it.col()]) it.valueRef() = (it.col() == r) ? 1.0 : 0.0;
    }
    if (row_fixed) sys.residual[r] = 0.0;
  }
}

}  // namespace nsch
