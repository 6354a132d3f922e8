#pragma once

#include <array>
#include <optional>

#include "nsch/cut_quadrature.hpp"
#include "nsch/types.hpp"

namespace nsch {

/// Rectilinear mesh over the ambient box [origin, origin + extents] given in
/// ambient coordinates; physical coordinates are x = R(theta) a.
class AmbientMesh {
public:
  AmbientMesh(const Vec2& origin, const Vec2& extents, std::array<int, 2> counts, double theta,
              std::array<bool, 2> periodic);

  const Vec2& origin() const noexcept { return origin_; }
  const Vec2& extents() const noexcept { return extents_; }
  const std::array<int, 2>& counts() const noexcept { return counts_; }
  double theta() const noexcept { return theta_; }
  const std::array<bool, 2>& periodic() const noexcept { return periodic_; }
  const Mat2& rotation() const noexcept { return rotation_; }

  int num_elements() const noexcept { return counts_[0] * counts_[1]; }
  int element_id(int i, int j) const noexcept { return j * counts_[0] + i; }
  std::array<int, 2> element_index(int id) const noexcept { return {id % counts_[0], id / counts_[0]}; }

  /// Element size per ambient axis.
  Vec2 element_size() const { return extents_.cwiseQuotient(Vec2(counts_[0], counts_[1])); }
  /// Penalty length scale: the (uniform) element size; max over axes when
  /// the mesh is anisotropic.
  double h() const { return element_size().maxCoeff(); }

  ElementFrame frame(int id) const;

  Vec2 to_physical(const Vec2& ambient) const { return rotation_ * ambient; }
  Vec2 to_ambient(const Vec2& physical) const { return rotation_.transpose() * physical; }

  struct Location {
    int element;
    Vec2 local;
  };
  /// Element containing a physical point (closed boxes; ties go to the
  /// lower element), or nothing when outside the ambient box.
  std::optional<Location> locate(const Vec2& physical) const;

private:
  Vec2 origin_;
  Vec2 extents_;
  std::array<int, 2> counts_;
  double theta_;
  std::array<bool, 2> periodic_;
  Mat2 rotation_;
};

AmbientMesh build_ambient(const Vec2& origin, const Vec2& extents, std::array<int, 2> counts, double theta = 0.0,
                          std::array<bool, 2> periodic = {false, false});

}  // namespace nsch
