#pragma once

#include <string>
#include <vector>

#include "nsch/simulation.hpp"

namespace nsch {

/// Fields sampled on a uniform physical grid. Points outside the fluid
/// have inside = 0 and NaN field values.
struct FieldSnapshot {
  std::array<int, 2> counts{0, 0};
  Vec2 origin = Vec2::Zero();
  Vec2 spacing = Vec2::Ones();
  double t = 0.0;
  std::vector<int> inside;
  std::vector<double> phi, ux, uy, p, mu;

  int size() const noexcept { return counts[0] * counts[1]; }
  int index(int i, int j) const noexcept { return j * counts[0] + i; }
  Vec2 point(int i, int j) const { return origin + Vec2(i * spacing.x(), j * spacing.y()); }
  /// Allocates all arrays, everything masked out.
  void resize(std::array<int, 2> n);
};

/// Axis-aligned physical box sampled with `counts` points per axis
/// (endpoints included).
struct SampleGrid {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Ones();
  std::array<int, 2> counts{2, 2};
};

/// Physical bounding box of the active elements.
SampleGrid default_sample_grid(const Simulation& sim, std::array<int, 2> counts);

/// Samples the current state. A point counts as inside when it lies in an
/// active element and the level set is negative there; fields are only
/// evaluated on such points. Pressure is reported relative to its mean
/// when no outflow boundary fixes its level.
FieldSnapshot sample_snapshot(const Simulation& sim, const SampleGrid& grid);

/// Legacy VTK structured-points ASCII file (layout in docs/vtk_format.md).
void write_vtk(const FieldSnapshot& s, const std::string& path);
FieldSnapshot read_vtk(const std::string& path);
/// CSV with columns x,y,inside,phi,ux,uy,p,mu.
void write_csv(const FieldSnapshot& s, const std::string& path);
/// Writes <stem>.vtk and <stem>.csv.
void write_snapshot(const FieldSnapshot& s, const std::string& stem);

}  // namespace nsch
