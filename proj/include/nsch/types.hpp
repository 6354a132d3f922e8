#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nsch {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Invalid user input: a config value, a tag spec, a mesh size.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Level set or mesh geometry that cannot be handled (empty domain,
/// vanishing gradient on the boundary).
class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite integrand or missing boundary data during assembly.
class AssemblyError : public std::runtime_error {
public:
  AssemblyError(const std::string& what, int element)
      : std::runtime_error(what + " (element " + std::to_string(element) + ")"),
        element_(element) {}
  int element() const noexcept { return element_; }

private:
  int element_;
};

/// Caller broke an API precondition.
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

inline Mat2 rotation(double theta) {
  Mat2 r;
  const double c = std::cos(theta), s = std::sin(theta);
  r << c, -s, s, c;
  return r;
}

}  // namespace nsch
