#include "nsch/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsch::levelset {

LevelSet everywhere() {
  return {[](const Vec2&) { return -1.0; }, [](const Vec2&) { return Vec2(0.0, 0.0); }, "everywhere"};
}

LevelSet half_plane(const Vec2& normal, double offset) {
  const Vec2 n = normal.normalized();
  std::ostringstream d;
  d << "half-plane n=(" << n.x() << "," << n.y() << ") offset=" << offset;
  return {[n, offset](const Vec2& x) { return n.dot(x) - offset; }, [n](const Vec2&) { return n; }, d.str()};
}

LevelSet disk(const Vec2& center, double radius) {
  std::ostringstream d;
  d << "disk c=(" << center.x() << "," << center.y() << ") r=" << radius;
  return {[center, radius](const Vec2& x) { return (x - center).norm() - radius; },
          [center](const Vec2& x) -> Vec2 {
            const Vec2 r = x - center;
            const double n = r.norm();
            return n > 0.0 ? Vec2(r / n) : Vec2(0.0, 0.0);
          },
          d.str()};
}

LevelSet hole(const Vec2& center, double radius) {
  auto ls = complement(disk(center, radius));
  std::ostringstream d;
  d << "hole c=(" << center.x() << "," << center.y() << ") r=" << radius;
  ls.description = d.str();
  return ls;
}

LevelSet horizontal_strip(double y0, double y1) {
  std::ostringstream d;
  d << "strip " << y0 << " < y < " << y1;
  return {[y0, y1](const Vec2& x) { return std::max(x.y() - y1, y0 - x.y()); },
          [y0, y1](const Vec2& x) {
            return (x.y() - y1 >= y0 - x.y()) ? Vec2(0.0, 1.0) : Vec2(0.0, -1.0);
          },
          d.str()};
}

LevelSet box(const Vec2& lo, const Vec2& hi) {
  auto ls = intersection({half_plane(Vec2(-1, 0), -lo.x()), half_plane(Vec2(1, 0), hi.x()),
                          half_plane(Vec2(0, -1), -lo.y()), half_plane(Vec2(0, 1), hi.y())});
  std::ostringstream d;
  d << "box (" << lo.x() << "," << lo.y() << ")-(" << hi.x() << "," << hi.y() << ")";
  ls.description = d.str();
  return ls;
}

namespace {

LevelSet combine(std::vector<LevelSet> parts, bool take_max, const char* name) {
  if (parts.empty()) throw ContractViolation("level set combination needs at least one member");
  std::string d = std::string(name) + "(";
  for (std::size_t i = 0; i < parts.size(); ++i) d += (i ? ", " : "") + parts[i].description;
  d += ")";
  auto pick = [parts, take_max](const Vec2& x) {
    std::size_t best = 0;
    double v = parts[0].value(x);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const double w = parts[i].value(x);
      if (take_max ? (w > v) : (w < v)) {
        v = w;
        best = i;
      }
    }
    return std::make_pair(v, best);
  };
  return {[pick](const Vec2& x) { return pick(x).first; },
          [pick, parts](const Vec2& x) { return parts[pick(x).second].gradient(x); }, d};
}

}  // namespace

LevelSet intersection(std::vector<LevelSet> parts) { return combine(std::move(parts), true, "intersection"); }
LevelSet merge(std::vector<LevelSet> parts) { return combine(std::move(parts), false, "union"); }

LevelSet complement(LevelSet ls) {
  auto v = ls.value;
  auto g = ls.gradient;
  return {[v](const Vec2& x) { return -v(x); }, [g](const Vec2& x) -> Vec2 { return -g(x); },
          "complement(" + ls.description + ")"};
}

LevelSet scaled(LevelSet ls, double factor) {
  if (!(factor > 0.0)) throw ContractViolation("level set scale factor must be positive");
  auto v = ls.value;
  auto g = ls.gradient;
  return {[v, factor](const Vec2& x) { return factor * v(x); },
          [g, factor](const Vec2& x) -> Vec2 { return factor * g(x); }, ls.description};
}

}  // namespace nsch::levelset

namespace nsch {

Vec2 surface_normal(const LevelSet& ls, const Vec2& x) {
  const Vec2 g = ls.gradient(x);
  const double n = g.norm();
  if (!(n > 1e-300) || !std::isfinite(n)) {
    std::ostringstream m;
    m << "vanishing level-set gradient at (" << x.x() << ", " << x.y() << ") for " << ls.description;
    throw GeometryError(m.str());
  }
  return g / n;
}

}  // namespace nsch
