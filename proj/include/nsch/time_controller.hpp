#pragma once

namespace nsch {

/// Step size control by halving: dt = dt0 * 2^-halvings. A failed step
/// halves dt; `restore_after` consecutive converged steps at a reduced dt
/// double it again.
class TimeController {
public:
  TimeController(double dt0, int max_halvings, int restore_after = 8);

  double dt0() const noexcept { return dt0_; }
  double dt() const noexcept;
  int halvings() const noexcept { return halvings_; }
  int converged_streak() const noexcept { return streak_; }
  int restore_after() const noexcept { return restore_after_; }
  int max_halvings() const noexcept { return max_halvings_; }

  void on_success();
  /// Returns false when the halving cap is exceeded (dt unchanged then).
  bool on_failure();

private:
  double dt0_;
  int max_halvings_;
  int restore_after_;
  int halvings_ = 0;
  int streak_ = 0;
};

}  // namespace nsch
