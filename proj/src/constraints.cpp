#include "nsch/constraints.hpp"

#include <cmath>
#include <map>
#include <set>

#include "nsch/gauss.hpp"
#include "nsch/log.hpp"

namespace nsch {

namespace {

int normal_axis(Side s) { return (s == Side::Left || s == Side::Right) ? 0 : 1; }

Vec2 side_local(Side s, double t) {
  switch (s) {
    case Side::Left: return {0.0, t};
    case Side::Right: return {1.0, t};
    case Side::Bottom: return {t, 0.0};
    case Side::Top: return {t, 1.0};
  }
  return {0.0, 0.0};
}

// Ambient index of the only univariate function with nonzero trace at the
// side (open axis).
int trace_layer(const SplineSpace& space, Side s) {
  const int a = normal_axis(s);
  return (s == Side::Left || s == Side::Bottom) ? 0 : space.axis(a).num_functions() - 1;
}

int ambient_id(const SplineSpace& space, int ix, int iy) { return iy * space.axis(0).num_functions() + ix; }

int compact_on_side(const SplineSpace& space, Side s, int along) {
  const int layer = trace_layer(space, s);
  return normal_axis(s) == 0 ? space.compact_function(ambient_id(space, layer, along))
                             : space.compact_function(ambient_id(space, along, layer));
}

}  // namespace

int Constraints::num_fixed() const {
  int n = 0;
  for (char c : fixed) n += c ? 1 : 0;
  return n;
}

void Constraints::apply(Eigen::VectorXd& coeffs) const {
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i]) coeffs[static_cast<Eigen::Index>(i)] = values[static_cast<Eigen::Index>(i)];
}

std::vector<std::pair<int, int>> side_trace_functions(const SplineSpace& space, Side side) {
  const int b = 1 - normal_axis(side);
  std::vector<std::pair<int, int>> out;
  for (int g = 0; g < space.axis(b).num_functions(); ++g) {
    const int c = compact_on_side(space, side, g);
    if (c >= 0) out.emplace_back(c, g);
  }
  return out;
}

Constraints build_constraints(const SplineSpace& space, const BoundaryData& data, double t) {
  const ImmersedMesh& mesh = space.mesh();
  const int n = space.num_functions();
  Constraints c;
  c.functions = n;
  c.fixed.assign(static_cast<std::size_t>(kNumFields) * n, 0);
  c.values = Eigen::VectorXd::Zero(kNumFields * n);
  const int k = space.degree();
  const GaussRule& rule = gauss_legendre(k + 2);

  for (Side side : {Side::Left, Side::Right, Side::Bottom, Side::Top}) {
    std::vector<int> elems;
    for (const auto& bf : mesh.boundary_facets)
      if (bf.side == side && bf.tag == BoundaryTag::Inflow) elems.push_back(bf.element);
    if (elems.empty()) continue;
    if (!data.inflow_velocity || !data.inflow_phase)
      throw ConfigError(std::string("inflow facets on side '") + to_string(side) + "' but no inflow data given");
    const int b = 1 - normal_axis(side);
    const UniformBSpline& bs = space.axis(b);
    const double hb = mesh.ambient.element_size()[b];

    // One-dimensional L2 projection of the trace data onto the side layer.
    std::map<int, int> local;  // univariate index -> row
    for (int e : elems) {
      const int ie = mesh.ambient.element_index(e)[b];
      for (int l = 0; l <= k; ++l) local.emplace(bs.function_index(ie, l), 0);
    }
    int row = 0;
    for (auto& [g, r] : local) r = row++;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(row, row);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(row, 3);
    for (int e : elems) {
      const int ie = mesh.ambient.element_index(e)[b];
      const ElementFrame frame = mesh.ambient.frame(e);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = rule.points[q];
        const double w = rule.weights[q] * hb;
        const Vec2 x = frame.physical(side_local(side, s));
        const Vec2 u = data.inflow_velocity(x, t);
        const double phi = data.inflow_phase(x);
        const Eigen::MatrixXd B = bs.evaluate(ie, s, 0);
        for (int la = 0; la <= k; ++la) {
          const int ra = local.at(bs.function_index(ie, la));
          rhs(ra, 0) += w * B(0, la) * u.x();
          rhs(ra, 1) += w * B(0, la) * u.y();
          rhs(ra, 2) += w * B(0, la) * phi;
          for (int lb = 0; lb <= k; ++lb) M(ra, local.at(bs.function_index(ie, lb))) += w * B(0, la) * B(0, lb);
        }
      }
    }
    const Eigen::MatrixXd coef = M.ldlt().solve(rhs);
    for (const auto& [g, r] : local) {
      const int fn = compact_on_side(space, side, g);
      if (fn < 0) continue;
      const std::array<Field, 3> fields = {Ux, Uy, Phi};
      for (int q = 0; q < 3; ++q) {
        const int dof = fields[q] * n + fn;
        if (c.fixed[dof] && std::abs(c.values[dof] - coef(r, q)) > 1e-12 * (1.0 + std::abs(coef(r, q))))
          log::warn("inflow data on adjacent sides disagree at a corner function; keeping the later value");
        c.fixed[dof] = 1;
        c.values[dof] = coef(r, q);
      }
    }
  }

  for (const auto& bf : mesh.boundary_facets) {
    if (bf.tag != BoundaryTag::Symmetric) continue;
    Vec2 an = Vec2::Zero();
    an[normal_axis(bf.side)] = (bf.side == Side::Left || bf.side == Side::Bottom) ? -1.0 : 1.0;
    const Vec2 nrm = mesh.ambient.rotation() * an;
    int comp;
    if (std::abs(std::abs(nrm.x()) - 1.0) < 1e-12)
      comp = 0;
    else if (std::abs(std::abs(nrm.y()) - 1.0) < 1e-12)
      comp = 1;
    else
      throw ConfigError("symmetric boundary requires a facet normal aligned with a physical axis");
    const int b = 1 - normal_axis(bf.side);
    const int ie = mesh.ambient.element_index(bf.element)[b];
    for (int l = 0; l <= k; ++l) {
      const int fn = compact_on_side(space, bf.side, space.axis(b).function_index(ie, l));
      if (fn < 0) continue;
      const int dof = (comp == 0 ? Ux : Uy) * n + fn;
      if (c.fixed[dof] && c.values[dof] != 0.0) continue;  // inflow data takes precedence
      c.fixed[dof] = 1;
      c.values[dof] = 0.0;
    }
  }

  bool has_outflow = false;
  for (const auto& bf : mesh.boundary_facets) has_outflow = has_outflow || bf.tag == BoundaryTag::Outflow;
  if (!has_outflow) {
    // Pin a pressure function whose support lies in uncut active elements.
    const int nfx = space.axis(0).num_functions();
    int pin = 0;
    bool found = false;
    for (int fn = 0; fn < n && !found; ++fn) {
      const int a = space.ambient_function(fn);
      const int ix = a % nfx, iy = a / nfx;
      bool interior = true;
      for (int dy = 0; dy <= k && interior; ++dy)
        for (int dx = 0; dx <= k && interior; ++dx) {
          int ex = ix - dx, ey = iy - dy;
          const auto& amb = mesh.ambient;
          if (amb.periodic()[0]) ex = (ex + amb.counts()[0]) % amb.counts()[0];
          if (amb.periodic()[1]) ey = (ey + amb.counts()[1]) % amb.counts()[1];
          if (ex < 0 || ey < 0 || ex >= amb.counts()[0] || ey >= amb.counts()[1]) continue;
          const int e = amb.element_id(ex, ey);
          interior = mesh.status[e] == CellStatus::Inside;
        }
      if (interior) {
        pin = fn;
        found = true;
      }
    }
    c.pressure_pin = P * n + pin;
    c.fixed[*c.pressure_pin] = 1;
    c.values[*c.pressure_pin] = 0.0;
    log::debug("no outflow boundary: pressure function " + std::to_string(pin) + " pinned to 0");
  }
  return c;
}

}  // namespace nsch
