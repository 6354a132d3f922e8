#include "nsch/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nsch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os.precision(17);
  return os;
}

void check_written(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

void check_size(const FieldSnapshot& s) {
  const size_t n = static_cast<size_t>(s.size());
  if (s.counts[0] < 1 || s.counts[1] < 1 || s.inside.size() != n || s.phi.size() != n || s.ux.size() != n ||
      s.uy.size() != n || s.p.size() != n || s.mu.size() != n)
    throw ContractViolation("snapshot arrays do not match the grid size");
}

}  // namespace

void FieldSnapshot::resize(std::array<int, 2> n) {
  counts = n;
  const size_t m = static_cast<size_t>(n[0]) * n[1];
  inside.assign(m, 0);
  for (auto* v : {&phi, &ux, &uy, &p, &mu}) v->assign(m, kNaN);
}

SampleGrid default_sample_grid(const Simulation& sim, std::array<int, 2> counts) {
  const AmbientMesh& am = sim.mesh().ambient;
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (int e : sim.mesh().active_elements) {
    const auto [i, j] = am.element_index(e);
    for (int c = 0; c < 4; ++c) {
      const Vec2 a = am.origin() + Vec2((i + (c & 1)) * am.element_size().x(), (j + (c >> 1)) * am.element_size().y());
      const Vec2 x = am.to_physical(a);
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
  }
  return {lo, hi, counts};
}

FieldSnapshot sample_snapshot(const Simulation& sim, const SampleGrid& grid) {
  if (grid.counts[0] < 2 || grid.counts[1] < 2 || !(grid.hi.x() > grid.lo.x()) || !(grid.hi.y() > grid.lo.y()))
    throw ContractViolation("sample grid needs at least 2 points per axis and a nonempty box");
  FieldSnapshot s;
  s.resize(grid.counts);
  s.origin = grid.lo;
  s.spacing = Vec2((grid.hi.x() - grid.lo.x()) / (grid.counts[0] - 1), (grid.hi.y() - grid.lo.y()) / (grid.counts[1] - 1));
  s.t = sim.state().t;

  const ImmersedMesh& mesh = sim.mesh();
  const SplineSpace& space = sim.space();
  const FieldState& st = sim.state();
  bool has_outflow = false;
  for (const auto& f : mesh.boundary_facets) has_outflow |= f.tag == BoundaryTag::Outflow;
  const double pshift = has_outflow ? 0.0 : sim.mean_pressure();

  for (int j = 0; j < s.counts[1]; ++j) {
    for (int i = 0; i < s.counts[0]; ++i) {
      const Vec2 x = s.point(i, j);
      const auto loc = mesh.ambient.locate(x);
      if (!loc || !mesh.is_active(loc->element) || !(sim.problem().domain(x) < 0.0)) continue;
      const int k = s.index(i, j);
      s.inside[k] = 1;
      s.phi[k] = space.eval_field(st.field(Phi), loc->element, loc->local);
      s.ux[k] = space.eval_field(st.field(Ux), loc->element, loc->local);
      s.uy[k] = space.eval_field(st.field(Uy), loc->element, loc->local);
      s.p[k] = space.eval_field(st.field(P), loc->element, loc->local) - pshift;
      s.mu[k] = space.eval_field(st.field(Mu), loc->element, loc->local);
    }
  }
  return s;
}

void write_vtk(const FieldSnapshot& s, const std::string& path) {
  check_size(s);
  std::ofstream os = open_out(path);
  os << "# vtk DataFile Version 3.0\n";
  os << "nsch snapshot time=" << s.t << "\n";
  os << "ASCII\n";
  os << "DATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << s.counts[0] << " " << s.counts[1] << " 1\n";
  os << "ORIGIN " << s.origin.x() << " " << s.origin.y() << " 0\n";
  os << "SPACING " << s.spacing.x() << " " << s.spacing.y() << " 1\n";
  os << "POINT_DATA " << s.size() << "\n";
  os << "SCALARS inside int 1\nLOOKUP_TABLE default\n";
  for (int v : s.inside) os << v << "\n";
  auto scalars = [&](const char* name, const std::vector<double>& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) os << x << "\n";
  };
  scalars("phi", s.phi);
  os << "VECTORS velocity double\n";
  for (int k = 0; k < s.size(); ++k) os << s.ux[k] << " " << s.uy[k] << " 0\n";
  scalars("pressure", s.p);
  scalars("mu", s.mu);
  check_written(os, path);
}

FieldSnapshot read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("'" + path + "': " + what);
  };
  // Values may be "nan", which operator>> does not accept.
  auto number = [&]() {
    std::string tok;
    if (!(in >> tok)) throw fail("truncated data");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end) throw fail("bad number '" + tok + "'");
    return v;
  };
  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) throw fail("not a legacy VTK file");
  FieldSnapshot s;
  std::getline(in, line);
  if (auto pos = line.find("time="); pos != std::string::npos) s.t = std::strtod(line.c_str() + pos + 5, nullptr);
  std::string word;
  in >> word;
  if (word != "ASCII") throw fail("only ASCII files are supported");
  in >> word >> word;
  if (word != "STRUCTURED_POINTS") throw fail("expected STRUCTURED_POINTS");
  int nz = 0;
  in >> word >> s.counts[0] >> s.counts[1] >> nz;
  if (word != "DIMENSIONS" || nz != 1 || s.counts[0] < 1 || s.counts[1] < 1) throw fail("bad DIMENSIONS");
  double z;
  in >> word;
  if (word != "ORIGIN") throw fail("expected ORIGIN");
  s.origin.x() = number();
  s.origin.y() = number();
  z = number();
  in >> word;
  if (word != "SPACING") throw fail("expected SPACING");
  s.spacing.x() = number();
  s.spacing.y() = number();
  z = number();
  (void)z;
  int npts = 0;
  in >> word >> npts;
  if (word != "POINT_DATA" || npts != s.size()) throw fail("bad POINT_DATA");
  const std::array<int, 2> n = s.counts;
  s.resize(n);
  while (in >> word) {
    std::string name, type;
    if (word == "SCALARS") {
      in >> name >> type >> word;  // components
      in >> word >> word;          // LOOKUP_TABLE default
      std::vector<double>* dst = name == "phi" ? &s.phi : name == "pressure" ? &s.p : name == "mu" ? &s.mu : nullptr;
      for (int k = 0; k < npts; ++k) {
        const double v = number();
        if (name == "inside")
          s.inside[k] = static_cast<int>(v);
        else if (dst)
          (*dst)[k] = v;
      }
    } else if (word == "VECTORS") {
      in >> name >> type;
      for (int k = 0; k < npts; ++k) {
        s.ux[k] = number();
        s.uy[k] = number();
        (void)number();
      }
    } else {
      throw fail("unexpected section '" + word + "'");
    }
  }
  return s;
}

void write_csv(const FieldSnapshot& s, const std::string& path) {
  check_size(s);
  std::ofstream os = open_out(path);
  os << "x,y,inside,phi,ux,uy,p,mu\n";
  for (int j = 0; j < s.counts[1]; ++j)
    for (int i = 0; i < s.counts[0]; ++i) {
      const int k = s.index(i, j);
      const Vec2 x = s.point(i, j);
      os << x.x() << "," << x.y() << "," << s.inside[k] << "," << s.phi[k] << "," << s.ux[k] << "," << s.uy[k] << ","
         << s.p[k] << "," << s.mu[k] << "\n";
    }
  check_written(os, path);
}

void write_snapshot(const FieldSnapshot& s, const std::string& stem) {
  write_vtk(s, stem + ".vtk");
  write_csv(s, stem + ".csv");
}

}  // namespace nsch
