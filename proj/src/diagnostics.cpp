#include "nsch/diagnostics.hpp"

#include <cmath>
#include <optional>

#include "nsch/log.hpp"

namespace nsch {

InterfaceRotation interface_rotation(const FieldSnapshot& s) {
  InterfaceRotation r;
  std::vector<std::optional<double>> xs(s.counts[1]);
  for (int j = 0; j < s.counts[1]; ++j) {
    int crossings = 0;
    double xc = 0.0;
    for (int i = 0; i + 1 < s.counts[0]; ++i) {
      const int a = s.index(i, j), b = s.index(i + 1, j);
      if (!s.inside[a] || !s.inside[b]) continue;
      const double fa = s.phi[a], fb = s.phi[b];
      if ((fa > 0.0) == (fb > 0.0)) continue;
      ++crossings;
      const double w = fa == fb ? 0.0 : fa / (fa - fb);
      xc = s.point(i, j).x() + w * s.spacing.x();
    }
    if (crossings == 1) {
      xs[j] = xc;
      ++r.lines_used;
    } else {
      ++r.lines_skipped;
    }
  }
  if (r.lines_skipped > 0)
    log::warn("interface_rotation: skipped " + std::to_string(r.lines_skipped) + " of " +
              std::to_string(s.counts[1]) + " sample lines without a single crossing");
  for (int j = 1; j + 1 < s.counts[1]; ++j) {
    if (!xs[j - 1] || !xs[j] || !xs[j + 1]) continue;
    const double slope = (*xs[j + 1] - *xs[j - 1]) / (2.0 * s.spacing.y());
    r.angle = std::max(r.angle, std::atan(std::abs(slope)));
  }
  return r;
}

}  // namespace nsch
