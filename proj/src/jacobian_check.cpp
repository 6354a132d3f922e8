#include "nsch/jacobian_check.hpp"

#include <random>

namespace nsch {

FieldScales field_scales(const ModelParams& params, double velocity_scale) {
  const double ps = params.sigma() / params.epsilon();
  return {velocity_scale, velocity_scale, ps, 1.0, ps};
}

FieldState random_state(int num_functions, const FieldScales& scales, std::uint64_t seed, double t) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FieldState s(num_functions, t);
  for (int f = 0; f < kNumFields; ++f)
    for (int i = 0; i < num_functions; ++i) s.coeffs[s.dof(static_cast<Field>(f), i)] = scales[f] * u(rng);
  return s;
}

JacobianCheck check_jacobian(const Assembler& assembler, const FieldState& state, const FieldState& prev,
                             const AssemblyOptions& opt, const FieldScales& scales, int directions,
                             std::uint64_t seed, double step) {
  StabilizedSystem sys;
  assembler.assemble(state, prev, opt, sys, true);
  const int n = state.functions;
  JacobianCheck out;
  for (int k = 0; k < directions; ++k) {
    const FieldState d = random_state(n, scales, seed + 1000003ull * (k + 1), 0.0);
    FieldState a = state, b = state;
    a.coeffs += step * d.coeffs;
    b.coeffs -= step * d.coeffs;
    const Eigen::VectorXd fd = (assembler.residual(a, prev, opt) - assembler.residual(b, prev, opt)) / (2.0 * step);
    const Eigen::VectorXd jd = sys.jacobian * d.coeffs;
    double e = 0.0;
    for (int f = 0; f < kNumFields; ++f) {
      const double ref = jd.segment(f * n, n).norm();
      const double diff = (fd - jd).segment(f * n, n).norm();
      if (ref > 0.0) e = std::max(e, diff / ref);
      else if (diff > 0.0) e = std::max(e, 1.0);
    }
    out.errors.push_back(e);
    out.worst = std::max(out.worst, e);
  }
  return out;
}

}  // namespace nsch
