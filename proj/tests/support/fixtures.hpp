#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "nsch/assembler.hpp"
#include "nsch/immersed_mesh.hpp"
#include "nsch/level_set.hpp"

namespace nsch::testing {

/// Mesh, quadrature, space and assembler kept at fixed addresses.
struct Discretization {
  std::unique_ptr<ImmersedMesh> mesh;
  CutQuadrature quad;
  std::unique_ptr<SplineSpace> space;
  std::unique_ptr<Assembler> assembler;

  int functions() const { return space->num_functions(); }
};

std::unique_ptr<Discretization> discretize(const AmbientMesh& ambient, const LevelSet& ls, int degree,
                                           const ModelParams& params, const StabParams& stab,
                                           const std::vector<TagSegment>& tags = {}, WallVelocity wall = {},
                                           int depth = 3);

/// Parameters of order one in every group, so that all blocks of the
/// Jacobian carry comparable weight.
ModelParams unit_params();
StabParams unit_stab();

/// L2 projection onto the active functions (mass matrix without ghost
/// term, dense solve). Exact for functions in the space when the mass
/// matrix is well conditioned.
Eigen::VectorXd project(const Discretization& d, const std::function<double(const Vec2&)>& f);

/// Face penalty of the truncated power (x - c)_+^k / k! placed in one
/// field on the unit square with `cells` elements per side. Its k-th
/// normal derivative jumps by one across x = c and nowhere else.
struct KinkPenalty {
  double energy = 0.0;  // |c^T r_field| with only the selected terms assembled
  double length = 0.0;  // total length of the penalized faces on x = c
  double h = 0.0;
};
/// Skeleton term (pressure) on the untrimmed square.
KinkPenalty skeleton_kink_penalty(int cells, int degree, const ModelParams& params, const StabParams& stab);
/// Ghost term (phase field) with the square trimmed to a disk crossing x = c.
KinkPenalty ghost_kink_penalty(int cells, int degree, const ModelParams& params, const StabParams& stab);

}  // namespace nsch::testing
