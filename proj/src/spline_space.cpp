#include "nsch/spline_space.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace nsch {

SplineSpace::SplineSpace(const ImmersedMesh& mesh, int degree)
    : mesh_(&mesh),
      k_(degree),
      axes_{UniformBSpline(mesh.ambient.counts()[0], degree, mesh.ambient.periodic()[0]),
            UniformBSpline(mesh.ambient.counts()[1], degree, mesh.ambient.periodic()[1])} {
  const int nfx = axes_[0].num_functions();
  std::vector<char> used(num_ambient_functions(), 0);
  for (int e : mesh.active_elements) {
    const auto [i, j] = mesh.ambient.element_index(e);
    for (int ly = 0; ly <= k_; ++ly)
      for (int lx = 0; lx <= k_; ++lx)
        used[axes_[1].function_index(j, ly) * nfx + axes_[0].function_index(i, lx)] = 1;
  }
  compact_.assign(used.size(), -1);
  for (std::size_t a = 0; a < used.size(); ++a)
    if (used[a]) {
      compact_[a] = static_cast<int>(active_.size());
      active_.push_back(static_cast<int>(a));
    }
  element_functions_.resize(mesh.ambient.num_elements());
  for (int e : mesh.active_elements) {
    const auto [i, j] = mesh.ambient.element_index(e);
    auto& list = element_functions_[e];
    list.reserve(functions_per_element());
    for (int ly = 0; ly <= k_; ++ly)
      for (int lx = 0; lx <= k_; ++lx)
        list.push_back(compact_[axes_[1].function_index(j, ly) * nfx + axes_[0].function_index(i, lx)]);
  }
}

const std::vector<int>& SplineSpace::element_functions(int element) const {
  if (element < 0 || element >= mesh_->ambient.num_elements() || !mesh_->is_active(element))
    throw ContractViolation("element " + std::to_string(element) + " is not active");
  return element_functions_[element];
}

ElementBasis SplineSpace::eval(int element, const Vec2& local) const {
  element_functions(element);
  const auto [i, j] = mesh_->ambient.element_index(element);
  const Vec2 h = mesh_->ambient.element_size();
  const Eigen::MatrixXd bx = axes_[0].evaluate(i, local.x(), 1);
  const Eigen::MatrixXd by = axes_[1].evaluate(j, local.y(), 1);
  const int n = functions_per_element();
  ElementBasis out{Eigen::VectorXd(n), Eigen::MatrixXd(n, 2)};
  const Mat2& R = mesh_->ambient.rotation();
  for (int ly = 0; ly <= k_; ++ly)
    for (int lx = 0; lx <= k_; ++lx) {
      const int a = ly * (k_ + 1) + lx;
      out.value[a] = bx(0, lx) * by(0, ly);
      const Vec2 ga(bx(1, lx) * by(0, ly) / h.x(), bx(0, lx) * by(1, ly) / h.y());
      out.gradient.row(a) = (R * ga).transpose();
    }
  return out;
}

Eigen::VectorXd SplineSpace::eval_derivative(int element, const Vec2& local, int dx, int dy) const {
  element_functions(element);
  if (dx < 0 || dy < 0 || dx > k_ || dy > k_) throw ContractViolation("derivative order exceeds the spline degree");
  const auto [i, j] = mesh_->ambient.element_index(element);
  const Vec2 h = mesh_->ambient.element_size();
  const Eigen::MatrixXd bx = axes_[0].evaluate(i, local.x(), dx);
  const Eigen::MatrixXd by = axes_[1].evaluate(j, local.y(), dy);
  const double scale = std::pow(h.x(), -dx) * std::pow(h.y(), -dy);
  Eigen::VectorXd out(functions_per_element());
  for (int ly = 0; ly <= k_; ++ly)
    for (int lx = 0; lx <= k_; ++lx) out[ly * (k_ + 1) + lx] = bx(dx, lx) * by(dy, ly) * scale;
  return out;
}

double SplineSpace::eval_field(const Eigen::Ref<const Eigen::VectorXd>& coeffs, int element,
                               const Vec2& local) const {
  const auto& fns = element_functions(element);
  const Eigen::VectorXd v = eval_derivative(element, local, 0, 0);
  double s = 0.0;
  for (std::size_t a = 0; a < fns.size(); ++a) s += coeffs[fns[a]] * v[a];
  return s;
}

Vec2 SplineSpace::eval_field_gradient(const Eigen::Ref<const Eigen::VectorXd>& coeffs, int element,
                                      const Vec2& local) const {
  const auto& fns = element_functions(element);
  const ElementBasis b = eval(element, local);
  Vec2 g = Vec2::Zero();
  for (std::size_t a = 0; a < fns.size(); ++a) g += coeffs[fns[a]] * b.gradient.row(a).transpose();
  return g;
}

void SplineSpace::check_face(const Face& f) const {
  const auto& amb = mesh_->ambient;
  if (f.axis < 0 || f.axis > 1) throw ContractViolation("face axis must be 0 or 1");
  const bool inside = f.lower >= 0 && f.upper >= 0 && f.lower < amb.num_elements() && f.upper < amb.num_elements();
  if (!inside) throw ContractViolation("face is on the outer boundary");
  const auto lo = amb.element_index(f.lower);
  const auto up = amb.element_index(f.upper);
  const int a = f.axis, b = 1 - f.axis;
  const int n = amb.counts()[a];
  const bool adjacent = lo[b] == up[b] && (up[a] == lo[a] + 1 || (amb.periodic()[a] && lo[a] == n - 1 && up[a] == 0));
  if (!adjacent || !mesh_->is_active(f.lower) || !mesh_->is_active(f.upper))
    throw ContractViolation("face is not an interior face between two active elements");
}

Vec2 SplineSpace::face_local_lower(const Face& f, double s) const {
  return f.axis == 0 ? Vec2(1.0, s) : Vec2(s, 1.0);
}

Vec2 SplineSpace::face_local_upper(const Face& f, double s) const {
  return f.axis == 0 ? Vec2(0.0, s) : Vec2(s, 0.0);
}

Vec2 SplineSpace::face_point(const Face& f, double s) const {
  return mesh_->ambient.frame(f.lower).physical(face_local_lower(f, s));
}

double SplineSpace::face_length(const Face& f) const { return mesh_->ambient.element_size()[1 - f.axis]; }

FaceJump SplineSpace::face_jump(const Face& f, double s, int order) const {
  check_face(f);
  if (order < 0 || order > k_) throw ContractViolation("derivative order exceeds the spline degree");
  const int dx = f.axis == 0 ? order : 0;
  const int dy = f.axis == 1 ? order : 0;
  const Eigen::VectorXd lo = eval_derivative(f.lower, face_local_lower(f, s), dx, dy);
  const Eigen::VectorXd up = eval_derivative(f.upper, face_local_upper(f, s), dx, dy);
  const auto& flo = element_functions_[f.lower];
  const auto& fup = element_functions_[f.upper];
  std::map<int, double> acc;
  for (std::size_t a = 0; a < flo.size(); ++a) acc[flo[a]] -= lo[a];
  for (std::size_t a = 0; a < fup.size(); ++a) acc[fup[a]] += up[a];
  FaceJump out;
  out.functions.reserve(acc.size());
  out.jump.reserve(acc.size());
  for (const auto& [fn, v] : acc) {
    out.functions.push_back(fn);
    out.jump.push_back(v);
  }
  return out;
}

double SplineSpace::normal_derivative_jump(const Face& f, double s, int order,
                                           const Eigen::Ref<const Eigen::VectorXd>& coeffs) const {
  const FaceJump j = face_jump(f, s, order);
  double v = 0.0;
  for (std::size_t a = 0; a < j.functions.size(); ++a) v += j.jump[a] * coeffs[j.functions[a]];
  return v;
}

}  // namespace nsch
