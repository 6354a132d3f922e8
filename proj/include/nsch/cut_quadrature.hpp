#pragma once

#include <vector>

#include "nsch/level_set.hpp"
#include "nsch/types.hpp"

namespace nsch {

/// Placement of one rectangular background element in the physical plane:
/// ambient coordinates a = lower + local .* size, physical x = R a.
struct ElementFrame {
  Vec2 lower;
  Vec2 size;
  Mat2 rotation = Mat2::Identity();

  Vec2 ambient(const Vec2& local) const { return lower + local.cwiseProduct(size); }
  Vec2 physical(const Vec2& local) const { return rotation * ambient(local); }
};

struct VolumePoint {
  Vec2 local;  // element reference coordinates in [0,1]^2
  Vec2 x;      // physical position
  double weight;
};

struct SurfacePoint {
  Vec2 local;
  Vec2 x;
  double weight;
  Vec2 normal;        // analytic outward unit normal (into the solid)
  Vec2 facet_normal;  // outward normal of the tessellated segment
};

struct ElementQuadrature {
  std::vector<VolumePoint> volume;
  std::vector<SurfacePoint> surface;

  double volume_measure() const;
  double surface_measure() const;
};

enum class CellStatus { Outside, Inside, Cut };

/// Level-set samples on the finest octree lattice of one element:
/// (2^depth + 1)^2 points, row-major in the second local coordinate.
class LeafLattice {
public:
  LeafLattice(const ElementFrame& frame, const LevelSet& ls, int depth);

  int depth() const noexcept { return depth_; }
  int resolution() const noexcept { return n_; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * (n_ + 1) + i]; }
  /// Status of the lattice block [i0, i0+span] x [j0, j0+span].
  CellStatus classify(int i0, int j0, int span) const;
  CellStatus classify() const { return classify(0, 0, n_); }

private:
  int depth_;
  int n_;
  std::vector<double> values_;
};

struct QuadratureStats {
  int dropped_segments = 0;
  int dropped_triangles = 0;
  int saddle_cells = 0;
};

/// Octree (quadtree) cut-element integration: sub-cells fully inside keep a
/// tensor Gauss rule, fully outside ones are discarded, intersected ones are
/// bisected until `depth`, where a marching-squares tessellation yields
/// triangles (volume points) and segments (surface points).
ElementQuadrature octree_quadrature(const ElementFrame& frame, const LevelSet& ls, int depth,
                                    int gauss_order, QuadratureStats* stats = nullptr);

/// Same, reusing an already sampled lattice.
ElementQuadrature octree_quadrature(const ElementFrame& frame, const LevelSet& ls,
                                    const LeafLattice& lattice, int gauss_order,
                                    QuadratureStats* stats = nullptr);

/// Quadrature on the part inside the domain of one element side, with the
/// same bisection depth. `side` is 0..3 = left, right, bottom, top in local
/// coordinates. Normals are the outward element-side normals.
std::vector<SurfacePoint> facet_quadrature(const ElementFrame& frame, const LevelSet& ls, int side,
                                           int depth, int gauss_order);

}  // namespace nsch
