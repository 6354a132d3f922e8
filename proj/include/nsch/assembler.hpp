#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

#include "nsch/constraints.hpp"
#include "nsch/field_state.hpp"
#include "nsch/immersed_mesh.hpp"
#include "nsch/physics.hpp"
#include "nsch/spline_space.hpp"

namespace nsch {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Groups of terms of the discrete operator, for selective assembly.
enum TermGroup : unsigned {
  kVolume = 1u << 0,    // all domain integrals
  kBoundary = 1u << 1,  // GNBC, outflow, in/outflow transport, wall tension
  kNitsche = 1u << 2,   // penalty, consistency and symmetry wall terms
  kSkeleton = 1u << 3,  // pressure jump penalty on all interior faces
  kGhost = 1u << 4,     // u, phi, mu jump penalties on ghost faces
  kAllTerms = 0x1fu,
};

struct AssemblyOptions {
  unsigned terms = kAllTerms;
  /// 1/dt of the backward Euler step; 0 gives the stationary operator.
  double inv_dt = 0.0;
  /// Momentum convection and relative-mass-flux transfer terms.
  bool convection = true;
};

struct StabilizedSystem {
  Eigen::VectorXd residual;
  SparseMatrix jacobian;
};

/// Wall velocity u_wall(x, t) entering the slip condition.
using WallVelocity = std::function<Vec2(const Vec2& x, double t)>;

/// Residual and analytic Jacobian of the stabilized Galerkin form. Rows are
/// blocked like the unknowns: momentum (u_x, u_y), mass (p), the chemical
/// potential closure tested with omega (phi rows) and the phase transport
/// tested with lambda (mu rows). Basis data at every quadrature point is
/// precomputed at construction; the object is read-only afterwards.
class Assembler {
public:
  Assembler(const SplineSpace& space, const CutQuadrature& quad, const ModelParams& params, const StabParams& stab,
            WallVelocity wall_velocity = {});

  const SplineSpace& space() const noexcept { return *space_; }
  const ModelParams& params() const noexcept { return params_; }
  const StabParams& stab() const noexcept { return stab_; }
  int num_dofs() const noexcept { return kNumFields * space_->num_functions(); }
  /// Jacobian sparsity (zero values), symmetric as a pattern.
  const SparseMatrix& pattern() const noexcept { return pattern_; }

  /// Raw (unconstrained) residual and, if requested, Jacobian. `state.t` is
  /// the new time level.
  void assemble(const FieldState& state, const FieldState& prev, const AssemblyOptions& opt, StabilizedSystem& out,
                bool with_jacobian = true) const;
  Eigen::VectorXd residual(const FieldState& state, const FieldState& prev, const AssemblyOptions& opt) const;

  /// Scalar mass matrix over the active functions, plus
  /// `ghost_scale * h^(2k+1)` times the k-th jump product on ghost faces.
  SparseMatrix mass_matrix(double ghost_scale) const;
  /// Load vector of a scalar function against every active function.
  Eigen::VectorXd load_vector(const std::function<double(const Vec2&)>& f) const;

  struct Integrals {
    double volume = 0.0;
    double phase = 0.0;             // integral of phi
    double mixture_energy = 0.0;    // integral of E_mix
    double kinetic_energy = 0.0;    // integral of rho |u|^2 / 2
    double max_speed = 0.0;         // over volume quadrature points
    double boundary_phase_flux = 0.0;  // in/outflow integral of (u.n) phi
  };
  Integrals integrals(const FieldState& state) const;

  /// Number of worker threads (env NSCH_THREADS, default hardware concurrency).
  int threads() const noexcept { return threads_; }
  void set_threads(int n) { threads_ = n < 1 ? 1 : n; }

private:
  struct PointSet {
    int npts = 0;
    std::vector<double> w;
    std::vector<Vec2> x;
    std::vector<Vec2> normal;
    std::vector<double> N, Gx, Gy;  // npts * nb
  };
  struct FaceData {
    Face face;
    std::vector<int> functions;     // union of both elements
    std::vector<double> jumps;      // npts * functions.size(), order-k normal jumps
    std::vector<double> weights;    // npts
    std::vector<double> mid_value;  // functions.size(): basis at the face midpoint
    bool ghost = false;
  };
  struct FacetData {
    int element;
    BoundaryTag tag;
    PointSet points;
  };
  struct Workspace;

  PointSet cache_points(int element, const std::vector<Vec2>& local, const std::vector<double>& w,
                        const std::vector<Vec2>& x, const std::vector<Vec2>& normal) const;
  void build_pattern();
  void volume_jacobian(const PointSet& ps, const std::vector<double>& coef, Eigen::MatrixXd& ke,
                       Workspace& ws) const;
  void element_terms(int element, const FieldState& s, const FieldState& prev, const AssemblyOptions& opt,
                     bool with_jacobian, Workspace& ws) const;
  void facet_terms(const FacetData& f, const FieldState& s, const AssemblyOptions& opt, bool with_jacobian,
                   Workspace& ws) const;
  void face_terms(const FaceData& f, const FieldState& s, const AssemblyOptions& opt, bool with_jacobian,
                  Workspace& ws) const;
  void scatter(const std::vector<int>& dofs, const Eigen::VectorXd& re, const Eigen::MatrixXd* ke, int element,
               Workspace& ws) const;

  const SplineSpace* space_;
  ModelParams params_;
  StabParams stab_;
  WallVelocity wall_velocity_;
  double h_;
  int nb_;
  std::vector<PointSet> volume_;  // per ambient element
  std::vector<PointSet> wall_;    // immersed boundary points per ambient element
  std::vector<FacetData> facets_;
  std::vector<FaceData> faces_;   // skeleton faces, ghost flag marks the ghost subset
  SparseMatrix pattern_;
  int threads_ = 1;
};

/// Rows and columns of fixed dofs become identity; their residual entries
/// are zeroed (the state is assumed to satisfy the constraints).
void apply_constraints(StabilizedSystem& sys, const Constraints& c);

}  // namespace nsch
