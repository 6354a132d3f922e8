#include "nsch/immersed_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nsch/log.hpp"

namespace nsch {

const char* to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Inflow: return "inflow";
    case BoundaryTag::Outflow: return "outflow";
    case BoundaryTag::Wall: return "wall";
    case BoundaryTag::Symmetric: return "symmetric";
  }
  return "?";
}

const char* to_string(Side s) {
  switch (s) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

BoundaryTag parse_boundary_tag(const std::string& s) {
  if (s == "inflow") return BoundaryTag::Inflow;
  if (s == "outflow") return BoundaryTag::Outflow;
  if (s == "wall") return BoundaryTag::Wall;
  if (s == "symmetric") return BoundaryTag::Symmetric;
  throw ConfigError("unknown boundary tag '" + s + "'");
}

Side parse_side(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  if (s == "bottom") return Side::Bottom;
  if (s == "top") return Side::Top;
  throw ConfigError("unknown boundary side '" + s + "'");
}

ImmersedMesh classify_elements(const AmbientMesh& ambient, const LevelSet& ls, int depth) {
  ImmersedMesh m{ambient, depth, {}, {}, {}, {}, {}, {}};
  const int ne = ambient.num_elements();
  m.status.resize(ne);
  for (int e = 0; e < ne; ++e) {
    m.status[e] = LeafLattice(ambient.frame(e), ls, depth).classify();
    if (m.status[e] != CellStatus::Outside) m.active_elements.push_back(e);
    if (m.status[e] == CellStatus::Cut) m.cut_elements.push_back(e);
  }
  if (m.active_elements.empty())
    throw GeometryError("level set '" + ls.description + "' has no inside region within the ambient domain");

  const auto [nx, ny] = ambient.counts();
  const auto [px, py] = ambient.periodic();
  auto add_face = [&](int lo, int up, int axis) {
    if (lo == up || !m.is_active(lo) || !m.is_active(up)) return;
    const Face f{lo, up, axis};
    m.skeleton_faces.push_back(f);
    if (m.is_cut(lo) || m.is_cut(up)) m.ghost_faces.push_back(f);
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) add_face(ambient.element_id(i, j), ambient.element_id(i + 1, j), 0);
    if (px && nx > 1) add_face(ambient.element_id(nx - 1, j), ambient.element_id(0, j), 0);
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) add_face(ambient.element_id(i, j), ambient.element_id(i, j + 1), 1);
    if (py && ny > 1) add_face(ambient.element_id(i, ny - 1), ambient.element_id(i, 0), 1);
  }

  for (int e : m.active_elements) {
    const auto [i, j] = ambient.element_index(e);
    if (!px && i == 0) m.boundary_facets.push_back({e, Side::Left});
    if (!px && i == nx - 1) m.boundary_facets.push_back({e, Side::Right});
    if (!py && j == 0) m.boundary_facets.push_back({e, Side::Bottom});
    if (!py && j == ny - 1) m.boundary_facets.push_back({e, Side::Top});
  }
  return m;
}

ImmersedMesh tag_conforming_boundaries(ImmersedMesh mesh, const std::vector<TagSegment>& spec) {
  const auto& amb = mesh.ambient;
  const Vec2 h = amb.element_size();
  std::vector<int> assigned(mesh.boundary_facets.size(), -1);

  for (std::size_t s = 0; s < spec.size(); ++s) {
    const auto& seg = spec[s];
    const int axis = (seg.side == Side::Left || seg.side == Side::Right) ? 0 : 1;
    if (amb.periodic()[axis])
      throw ConfigError(std::string("boundary tag on side '") + to_string(seg.side) + "' of a periodic axis");
    const int along = 1 - axis;
    // Range in element indices along the side.
    int first = 0, last = amb.counts()[along];
    if (seg.range) {
      auto node = [&](double c) {
        const double k = (c - amb.origin()[along]) / h[along];
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-9 || r < 0 || r > amb.counts()[along]) {
          std::ostringstream m;
          m << "boundary tag segment endpoint " << c << " on side '" << to_string(seg.side)
            << "' does not coincide with a mesh node";
          throw ConfigError(m.str());
        }
        return static_cast<int>(r);
      };
      first = node(seg.range->first);
      last = node(seg.range->second);
      if (first >= last) throw ConfigError("boundary tag segment has nonpositive length");
    }
    for (std::size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
      auto& bf = mesh.boundary_facets[f];
      if (bf.side != seg.side) continue;
      const int k = amb.element_index(bf.element)[along];
      if (k < first || k >= last) continue;
      if (assigned[f] >= 0)
        throw ConfigError(std::string("overlapping boundary tag segments on side '") + to_string(seg.side) + "'");
      assigned[f] = static_cast<int>(s);
      bf.tag = seg.tag;
    }
  }
  int defaulted = 0;
  for (std::size_t f = 0; f < assigned.size(); ++f)
    if (assigned[f] < 0) {
      mesh.boundary_facets[f].tag = BoundaryTag::Wall;
      ++defaulted;
    }
  if (defaulted > 0) log::info(std::to_string(defaulted) + " untagged boundary facets default to wall");
  return mesh;
}

double CutQuadrature::volume() const {
  double s = 0.0;
  for (const auto& e : elements) s += e.volume_measure();
  return s;
}

double CutQuadrature::immersed_boundary_length() const {
  double s = 0.0;
  for (const auto& e : elements) s += e.surface_measure();
  return s;
}

CutQuadrature build_cut_quadrature(const ImmersedMesh& mesh, const LevelSet& ls, int gauss_order) {
  CutQuadrature q;
  q.gauss_order = gauss_order;
  q.elements.resize(mesh.ambient.num_elements());
  for (int e : mesh.active_elements) {
    q.elements[e] = octree_quadrature(mesh.ambient.frame(e), ls, mesh.depth, gauss_order, &q.stats);
  }
  q.facets.reserve(mesh.boundary_facets.size());
  for (const auto& bf : mesh.boundary_facets)
    q.facets.push_back(
        facet_quadrature(mesh.ambient.frame(bf.element), ls, static_cast<int>(bf.side), mesh.depth, gauss_order));
  if (q.stats.dropped_segments > 0)
    log::info("cut quadrature: dropped " + std::to_string(q.stats.dropped_segments) + " degenerate segments");
  return q;
}

DomainMeasure measure_domain(const AmbientMesh& ambient, const LevelSet& ls, int depth, int gauss_order) {
  const ImmersedMesh mesh = classify_elements(ambient, ls, depth);
  const CutQuadrature q = build_cut_quadrature(mesh, ls, gauss_order);
  return {q.volume(), q.immersed_boundary_length()};
}

}  // namespace nsch
