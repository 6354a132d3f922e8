#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsch/ambient_mesh.hpp"
#include "nsch/cut_quadrature.hpp"
#include "nsch/level_set.hpp"

namespace nsch {

enum class BoundaryTag { Inflow, Outflow, Wall, Symmetric };
enum class Side { Left = 0, Right = 1, Bottom = 2, Top = 3 };

const char* to_string(BoundaryTag t);
const char* to_string(Side s);
BoundaryTag parse_boundary_tag(const std::string& s);
Side parse_side(const std::string& s);

/// Interior face between two active elements. `axis` is the ambient axis
/// normal to the face; `lower` precedes `upper` along that axis (across the
/// periodic seam, `lower` is the last element of the row).
struct Face {
  int lower;
  int upper;
  int axis;

  friend bool operator==(const Face&, const Face&) = default;
};

struct BoundaryFacet {
  int element;
  Side side;
  BoundaryTag tag = BoundaryTag::Wall;
};

/// Active background mesh with its cut elements, skeleton and ghost faces,
/// and the conforming boundary facets of the ambient box.
struct ImmersedMesh {
  AmbientMesh ambient;
  int depth = 3;
  std::vector<CellStatus> status;  // per ambient element
  std::vector<int> active_elements;
  std::vector<int> cut_elements;
  std::vector<Face> skeleton_faces;
  std::vector<Face> ghost_faces;
  std::vector<BoundaryFacet> boundary_facets;

  bool is_active(int e) const { return status[e] != CellStatus::Outside; }
  bool is_cut(int e) const { return status[e] == CellStatus::Cut; }
  double cut_fraction() const {
    return active_elements.empty() ? 0.0 : double(cut_elements.size()) / double(active_elements.size());
  }
};

/// Inside/outside/cut classification from the octree sampling lattice of
/// each element, followed by skeleton/ghost extraction.
ImmersedMesh classify_elements(const AmbientMesh& ambient, const LevelSet& ls, int depth = 3);

/// One entry of a boundary tag specification: a whole side of the ambient
/// box, or the part [range.first, range.second] of it (measured in ambient
/// coordinates along the side), which must start and end on mesh nodes.
struct TagSegment {
  Side side;
  BoundaryTag tag;
  std::optional<std::pair<double, double>> range;
};

/// Assigns a tag to every outer facet of the active mesh. Untagged facets
/// default to wall.
ImmersedMesh tag_conforming_boundaries(ImmersedMesh mesh, const std::vector<TagSegment>& spec);

/// Per-element cut quadrature for the whole active mesh, plus clipped
/// quadrature on the conforming boundary facets (indexed like
/// `ImmersedMesh::boundary_facets`).
struct CutQuadrature {
  std::vector<ElementQuadrature> elements;  // indexed by ambient element id; empty for inactive
  std::vector<std::vector<SurfacePoint>> facets;
  QuadratureStats stats;
  int gauss_order = 5;

  double volume() const;
  double immersed_boundary_length() const;
};

CutQuadrature build_cut_quadrature(const ImmersedMesh& mesh, const LevelSet& ls, int gauss_order = 5);

/// Area of the trimmed domain and length of its immersed boundary as seen
/// by the cut quadrature at the given octree depth.
struct DomainMeasure {
  double area = 0.0;
  double perimeter = 0.0;
};
DomainMeasure measure_domain(const AmbientMesh& ambient, const LevelSet& ls, int depth, int gauss_order = 5);

}  // namespace nsch
