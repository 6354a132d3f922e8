#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsch/types.hpp"

namespace nsch {

/// Analytic level set over the physical plane. Negative values are inside
/// the fluid domain, zero is the immersed boundary, positive is solid.
struct LevelSet {
  std::function<double(const Vec2&)> value;
  std::function<Vec2(const Vec2&)> gradient;
  std::string description;

  double operator()(const Vec2& x) const { return value(x); }
};

namespace levelset {

/// Every point inside (no trimming).
LevelSet everywhere();
/// Inside where n.x < offset.
LevelSet half_plane(const Vec2& normal, double offset);
/// Inside the disk |x - c| < r.
LevelSet disk(const Vec2& center, double radius);
/// Inside is the exterior of the disk: a circular obstacle.
LevelSet hole(const Vec2& center, double radius);
/// Inside y0 < y < y1.
LevelSet horizontal_strip(double y0, double y1);
/// Inside the axis-aligned box lo < x < hi.
LevelSet box(const Vec2& lo, const Vec2& hi);

/// max of the members: inside all of them.
LevelSet intersection(std::vector<LevelSet> parts);
/// min of the members: inside any of them.
LevelSet merge(std::vector<LevelSet> parts);
LevelSet complement(LevelSet ls);
LevelSet scaled(LevelSet ls, double factor);

}  // namespace levelset

/// Unit outward normal grad(ls)/|grad(ls)|. Throws GeometryError where the
/// gradient vanishes.
Vec2 surface_normal(const LevelSet& ls, const Vec2& x);

}  // namespace nsch
