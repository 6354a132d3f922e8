#pragma once

#include "nsch/snapshot.hpp"

namespace nsch {

struct InterfaceRotation {
  double angle = 0.0;     // rad
  int lines_used = 0;     // sample rows with exactly one phi = 0 crossing
  int lines_skipped = 0;  // rows with zero or several crossings
};

/// Maximum tilt of the phi = 0 line from the vertical. Each grid row with
/// exactly one sign change of phi between neighbouring inside points gives
/// x(y) by linear interpolation; the tilt is max arctan|dx/dy| from central
/// differences over consecutive usable rows.
InterfaceRotation interface_rotation(const FieldSnapshot& s);

}  // namespace nsch
