#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "nsch/bspline.hpp"
#include "nsch/immersed_mesh.hpp"

namespace nsch {

/// Values and physical gradients of the (k+1)^2 functions supported on one
/// element at one point, listed in the order of `SplineSpace::element_functions`.
struct ElementBasis {
  Eigen::VectorXd value;
  Eigen::MatrixXd gradient;  // rows = functions, cols = physical x, y
};

/// k-th (or lower) derivative jump of all functions touching a face, at one
/// point of the face: entries (compact function, upper-side minus
/// lower-side derivative along the face normal axis).
struct FaceJump {
  std::vector<int> functions;
  std::vector<double> jump;
};

/// Tensor-product spline space of degree k over an immersed mesh,
/// restricted to the functions whose support meets an active element.
/// Functions are numbered axis-major (iy * nx_functions + ix) and then
/// compacted to the active set.
class SplineSpace {
public:
  SplineSpace(const ImmersedMesh& mesh, int degree);

  const ImmersedMesh& mesh() const noexcept { return *mesh_; }
  int degree() const noexcept { return k_; }
  const UniformBSpline& axis(int a) const noexcept { return axes_[a]; }
  int functions_per_element() const noexcept { return (k_ + 1) * (k_ + 1); }

  int num_ambient_functions() const noexcept { return axes_[0].num_functions() * axes_[1].num_functions(); }
  int num_functions() const noexcept { return static_cast<int>(active_.size()); }
  int ambient_function(int compact) const { return active_[compact]; }
  /// Compact index of an ambient function, or -1 when inactive.
  int compact_function(int ambient) const { return compact_[ambient]; }
  std::array<int, 2> function_index(int ambient) const {
    return {ambient % axes_[0].num_functions(), ambient / axes_[0].num_functions()};
  }

  /// Compact indices of the functions supported on an active element,
  /// ordered ly * (k+1) + lx.
  const std::vector<int>& element_functions(int element) const;

  ElementBasis eval(int element, const Vec2& local) const;
  /// Ambient-frame partial derivatives d^dx/da_x^dx d^dy/da_y^dy of the element
  /// functions (physical units, i.e. scaled by the element size).
  Eigen::VectorXd eval_derivative(int element, const Vec2& local, int dx, int dy) const;

  double eval_field(const Eigen::Ref<const Eigen::VectorXd>& coeffs, int element, const Vec2& local) const;
  Vec2 eval_field_gradient(const Eigen::Ref<const Eigen::VectorXd>& coeffs, int element, const Vec2& local) const;

  /// Local coordinates on the lower / upper element of the face point with
  /// face parameter s in [0,1].
  Vec2 face_local_lower(const Face& f, double s) const;
  Vec2 face_local_upper(const Face& f, double s) const;
  Vec2 face_point(const Face& f, double s) const;
  double face_length(const Face& f) const;

  /// Derivative jumps of order `order` across an interior face.
  FaceJump face_jump(const Face& f, double s, int order) const;
  double normal_derivative_jump(const Face& f, double s, int order,
                                const Eigen::Ref<const Eigen::VectorXd>& coeffs) const;

private:
  void check_face(const Face& f) const;

  const ImmersedMesh* mesh_;
  int k_;
  std::array<UniformBSpline, 2> axes_;
  std::vector<int> active_;
  std::vector<int> compact_;
  std::vector<std::vector<int>> element_functions_;
};

}  // namespace nsch
