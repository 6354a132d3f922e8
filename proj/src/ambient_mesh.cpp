#include "nsch/ambient_mesh.hpp"

#include <algorithm>
#include <cmath>

namespace nsch {

AmbientMesh::AmbientMesh(const Vec2& origin, const Vec2& extents, std::array<int, 2> counts, double theta,
                         std::array<bool, 2> periodic)
    : origin_(origin), extents_(extents), counts_(counts), theta_(theta), periodic_(periodic),
      rotation_(nsch::rotation(theta)) {
  if (!(extents.x() > 0.0) || !(extents.y() > 0.0)) throw ConfigError("mesh: extents must be positive");
  if (counts[0] < 1 || counts[1] < 1) throw ConfigError("mesh: element counts must be at least 1");
  if (!std::isfinite(theta)) throw ConfigError("mesh: rotation must be finite");
}

ElementFrame AmbientMesh::frame(int id) const {
  const auto [i, j] = element_index(id);
  const Vec2 h = element_size();
  return {origin_ + Vec2(i * h.x(), j * h.y()), h, rotation_};
}

std::optional<AmbientMesh::Location> AmbientMesh::locate(const Vec2& physical) const {
  const Vec2 a = to_ambient(physical) - origin_;
  const Vec2 h = element_size();
  const double tol = 1e-12;
  std::array<int, 2> idx;
  Vec2 local;
  for (int d = 0; d < 2; ++d) {
    const double s = a[d] / h[d];
    if (s < -tol || s > counts_[d] + tol) return std::nullopt;
    int k = static_cast<int>(std::floor(s));
    k = std::clamp(k, 0, counts_[d] - 1);
    idx[d] = k;
    local[d] = std::clamp(s - k, 0.0, 1.0);
  }
  return Location{element_id(idx[0], idx[1]), local};
}

AmbientMesh build_ambient(const Vec2& origin, const Vec2& extents, std::array<int, 2> counts, double theta,
                          std::array<bool, 2> periodic) {
  return AmbientMesh(origin, extents, counts, theta, periodic);
}

}  // namespace nsch
