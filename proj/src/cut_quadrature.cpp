#include "nsch/cut_quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nsch/gauss.hpp"
#include "nsch/log.hpp"

namespace nsch {

double ElementQuadrature::volume_measure() const {
  double s = 0.0;
  for (const auto& p : volume) s += p.weight;
  return s;
}

double ElementQuadrature::surface_measure() const {
  double s = 0.0;
  for (const auto& p : surface) s += p.weight;
  return s;
}

LeafLattice::LeafLattice(const ElementFrame& frame, const LevelSet& ls, int depth) : depth_(depth) {
  if (depth < 0) throw ContractViolation("octree depth must be nonnegative");
  n_ = 1 << depth;
  values_.resize(static_cast<std::size_t>(n_ + 1) * (n_ + 1));
  for (int j = 0; j <= n_; ++j)
    for (int i = 0; i <= n_; ++i)
      values_[static_cast<std::size_t>(j) * (n_ + 1) + i] =
          ls(frame.physical(Vec2(double(i) / n_, double(j) / n_)));
  // Points on the boundary up to round-off (a corner exactly on a circle,
  // say) count as outside, so touching the domain at a point or along an
  // edge never activates an element.
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  const double snap = 1e-12 * (*hi - *lo);
  for (double& v : values_)
    if (std::abs(v) <= snap) v = 0.0;
}

CellStatus LeafLattice::classify(int i0, int j0, int span) const {
  bool any_in = false, any_out = false;
  for (int j = j0; j <= j0 + span; ++j)
    for (int i = i0; i <= i0 + span; ++i) {
      if (at(i, j) < 0.0)
        any_in = true;
      else
        any_out = true;
      if (any_in && any_out) return CellStatus::Cut;
    }
  return any_in ? CellStatus::Inside : CellStatus::Outside;
}

namespace {

struct Builder {
  const ElementFrame& frame;
  const LevelSet& ls;
  const LeafLattice& lattice;
  const GaussRule& rule;
  QuadratureStats* stats;
  ElementQuadrature out;
  double area_scale;  // physical area of the unit local square

  void add_square(const Vec2& lo, double len) {
    const auto& g = rule;
    for (std::size_t a = 0; a < g.points.size(); ++a)
      for (std::size_t b = 0; b < g.points.size(); ++b) {
        const Vec2 local = lo + len * Vec2(g.points[a], g.points[b]);
        out.volume.push_back({local, frame.physical(local), g.weights[a] * g.weights[b] * len * len * area_scale});
      }
  }

  // Collapsed (Duffy) tensor rule on the triangle (p0, p1, p2) in local coordinates.
  void add_triangle(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    const Vec2 e1 = p1 - p0, e2 = p2 - p0;
    const double twice_area = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    if (!(twice_area > 1e-14 * lattice_cell_area())) {
      if (stats) ++stats->dropped_triangles;
      return;
    }
    const auto& g = rule;
    for (std::size_t a = 0; a < g.points.size(); ++a)
      for (std::size_t b = 0; b < g.points.size(); ++b) {
        const double s = g.points[a], t = g.points[b];
        const Vec2 local = p0 + s * ((1.0 - t) * e1 + t * e2);
        out.volume.push_back({local, frame.physical(local), g.weights[a] * g.weights[b] * s * twice_area * area_scale});
      }
  }

  void add_segment(const Vec2& a, const Vec2& b) {
    const Vec2 pa = frame.physical(a), pb = frame.physical(b);
    const Vec2 d = pb - pa;
    const double len = d.norm();
    if (!(len > 1e-12 * std::sqrt(lattice_cell_area() * area_scale))) {
      if (stats) ++stats->dropped_segments;
      log::debug("cut quadrature: dropped degenerate interface segment");
      return;
    }
    // Polygons are walked counter-clockwise in local coordinates; the rotation
    // and a positive diagonal scaling preserve orientation, so the outward
    // normal is the right-hand normal of the segment direction.
    const Vec2 facet_n = Vec2(d.y(), -d.x()) / len;
    const auto& g = rule;
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const Vec2 local = a + g.points[q] * (b - a);
      const Vec2 x = frame.physical(local);
      out.surface.push_back({local, x, g.weights[q] * len, surface_normal(ls, x), facet_n});
    }
  }

  double lattice_cell_area() const {
    const double l = 1.0 / lattice.resolution();
    return l * l;
  }

  void tessellate(int i, int j) {
    const double l = 1.0 / lattice.resolution();
    const std::array<Vec2, 4> c = {Vec2(i * l, j * l), Vec2((i + 1) * l, j * l), Vec2((i + 1) * l, (j + 1) * l),
                                   Vec2(i * l, (j + 1) * l)};
    const std::array<double, 4> v = {lattice.at(i, j), lattice.at(i + 1, j), lattice.at(i + 1, j + 1),
                                     lattice.at(i, j + 1)};
    std::array<bool, 4> in;
    for (int k = 0; k < 4; ++k) in[k] = v[k] < 0.0;

    auto crossing = [&](int a, int b) -> Vec2 {
      const double t = v[a] / (v[a] - v[b]);
      return c[a] + t * (c[b] - c[a]);
    };

    const bool saddle = in[0] == in[2] && in[1] == in[3] && in[0] != in[1];
    if (saddle) {
      if (stats) ++stats->saddle_cells;
      const bool center_in = ls(frame.physical(Vec2((i + 0.5) * l, (j + 0.5) * l))) < 0.0;
      const int a = in[0] ? 0 : 1;  // first inside corner
      const int b = a + 2;
      const Vec2 xa_next = crossing(a, a + 1), xa_prev = crossing(a, (a + 3) % 4);
      const Vec2 xb_next = crossing(b, (b + 1) % 4), xb_prev = crossing(b, b - 1);
      if (center_in) {
        // Connected hexagon through the centre; the two outside corners are cut off.
        const std::array<Vec2, 6> poly = {c[a], xa_next, crossing(b, b - 1), c[b], xb_next, xa_prev};
        for (int k = 1; k + 1 < 6; ++k) add_triangle(poly[0], poly[k], poly[k + 1]);
        add_segment(xa_next, xb_prev);
        add_segment(xb_next, xa_prev);
      } else {
        add_triangle(c[a], xa_next, xa_prev);
        add_segment(xa_next, xa_prev);
        add_triangle(c[b], xb_next, xb_prev);
        add_segment(xb_next, xb_prev);
      }
      return;
    }

    // Single polygon: walk the corners counter-clockwise keeping inside corners
    // and edge crossings.
    std::array<Vec2, 8> poly;
    std::array<bool, 8> is_cross{};
    int n = 0;
    for (int k = 0; k < 4; ++k) {
      const int kn = (k + 1) % 4;
      if (in[k]) {
        poly[n] = c[k];
        is_cross[n++] = false;
      }
      if (in[k] != in[kn]) {
        poly[n] = crossing(k, kn);
        is_cross[n++] = true;
      }
    }
    if (n < 3) return;
    for (int k = 1; k + 1 < n; ++k) add_triangle(poly[0], poly[k], poly[k + 1]);
    for (int k = 0; k < n; ++k) {
      const int kn = (k + 1) % n;
      if (is_cross[k] && is_cross[kn]) add_segment(poly[k], poly[kn]);
    }
  }

  void recurse(int i0, int j0, int span) {
    switch (lattice.classify(i0, j0, span)) {
      case CellStatus::Outside:
        return;
      case CellStatus::Inside:
        add_square(Vec2(i0, j0) / lattice.resolution(), double(span) / lattice.resolution());
        return;
      case CellStatus::Cut:
        break;
    }
    if (span == 1) {
      tessellate(i0, j0);
      return;
    }
    const int h = span / 2;
    recurse(i0, j0, h);
    recurse(i0 + h, j0, h);
    recurse(i0, j0 + h, h);
    recurse(i0 + h, j0 + h, h);
  }
};

}  // namespace

ElementQuadrature octree_quadrature(const ElementFrame& frame, const LevelSet& ls, const LeafLattice& lattice,
                                    int gauss_order, QuadratureStats* stats) {
  if (gauss_order < 1) throw ContractViolation("Gauss order must be at least 1");
  Builder b{frame, ls, lattice, gauss_legendre(gauss_order), stats, {}, frame.size.x() * frame.size.y()};
  b.recurse(0, 0, lattice.resolution());
  return std::move(b.out);
}

ElementQuadrature octree_quadrature(const ElementFrame& frame, const LevelSet& ls, int depth, int gauss_order,
                                    QuadratureStats* stats) {
  const LeafLattice lattice(frame, ls, depth);
  return octree_quadrature(frame, ls, lattice, gauss_order, stats);
}

std::vector<SurfacePoint> facet_quadrature(const ElementFrame& frame, const LevelSet& ls, int side, int depth,
                                           int gauss_order) {
  if (side < 0 || side > 3) throw ContractViolation("element side index out of range");
  if (depth < 0) throw ContractViolation("octree depth must be nonnegative");
  const int n = 1 << depth;
  const int axis = side < 2 ? 0 : 1;    // axis normal to the side
  const double fixed = (side % 2 == 0) ? 0.0 : 1.0;
  Vec2 ambient_normal = Vec2::Zero();
  ambient_normal[axis] = (side % 2 == 0) ? -1.0 : 1.0;
  const Vec2 normal = frame.rotation * ambient_normal;
  const double side_length = frame.size[1 - axis];

  auto local_at = [&](double s) {
    Vec2 p;
    p[axis] = fixed;
    p[1 - axis] = s;
    return p;
  };
  std::vector<double> vals(n + 1);
  for (int i = 0; i <= n; ++i) vals[i] = ls(frame.physical(local_at(double(i) / n)));

  const auto& g = gauss_legendre(gauss_order);
  std::vector<SurfacePoint> out;
  auto add = [&](double s0, double s1) {
    if (!(s1 > s0)) return;
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const Vec2 local = local_at(s0 + g.points[q] * (s1 - s0));
      out.push_back({local, frame.physical(local), g.weights[q] * (s1 - s0) * side_length, normal, normal});
    }
  };
  // Binary recursion mirrors the volume octree.
  auto recurse = [&](auto&& self, int i0, int span) -> void {
    bool any_in = false, any_out = false;
    for (int i = i0; i <= i0 + span; ++i) (vals[i] < 0.0 ? any_in : any_out) = true;
    if (!any_in) return;
    if (!any_out) {
      add(double(i0) / n, double(i0 + span) / n);
      return;
    }
    if (span == 1) {
      const double a = double(i0) / n, b = double(i0 + 1) / n;
      const double t = vals[i0] / (vals[i0] - vals[i0 + 1]);
      const double m = a + t * (b - a);
      if (vals[i0] < 0.0)
        add(a, m);
      else
        add(m, b);
      return;
    }
    self(self, i0, span / 2);
    self(self, i0 + span / 2, span / 2);
  };
  recurse(recurse, 0, n);
  return out;
}

}  // namespace nsch
