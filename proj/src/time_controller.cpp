#include "nsch/time_controller.hpp"

#include <cmath>

#include "nsch/types.hpp"

namespace nsch {

TimeController::TimeController(double dt0, int max_halvings, int restore_after)
    : dt0_(dt0), max_halvings_(max_halvings), restore_after_(restore_after) {
  if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw ConfigError("time step must be positive");
  if (max_halvings < 0) throw ConfigError("max_halvings must be nonnegative");
  if (restore_after < 1) throw ConfigError("restore_after must be at least 1");
}

double TimeController::dt() const noexcept { return std::ldexp(dt0_, -halvings_); }

void TimeController::on_success() {
  if (halvings_ == 0) {
    streak_ = 0;
    return;
  }
  if (++streak_ >= restore_after_) {
    --halvings_;
    streak_ = 0;
  }
}

bool TimeController::on_failure() {
  streak_ = 0;
  if (halvings_ >= max_halvings_) return false;
  ++halvings_;
  return true;
}

}  // namespace nsch
