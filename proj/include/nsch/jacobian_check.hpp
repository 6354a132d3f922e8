#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nsch/assembler.hpp"

namespace nsch {

/// Typical magnitude of each field block, used to draw random states and
/// directions of comparable size in every block.
using FieldScales = std::array<double, kNumFields>;

/// Scales {U, U, sigma/eps, 1, sigma/eps} for a velocity scale U.
FieldScales field_scales(const ModelParams& params, double velocity_scale);

/// Coefficients uniform in [-scale_f, scale_f] per block.
FieldState random_state(int num_functions, const FieldScales& scales, std::uint64_t seed, double t);

struct JacobianCheck {
  /// max over blocks of |FD - J d|_f / |J d|_f, per direction.
  std::vector<double> errors;
  double worst = 0.0;
};

/// Compares J d with the central difference (r(x + s d) - r(x - s d)) / 2s
/// for `directions` random scaled directions d.
JacobianCheck check_jacobian(const Assembler& assembler, const FieldState& state, const FieldState& prev,
                             const AssemblyOptions& opt, const FieldScales& scales, int directions,
                             std::uint64_t seed, double step = 1e-6);

}  // namespace nsch
