#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "nsch/gauss.hpp"
#include "nsch/immersed_mesh.hpp"

using namespace nsch;

namespace {

const double kPi = std::numbers::pi;

ElementFrame unit_frame() { return {Vec2::Zero(), Vec2(1, 1), Mat2::Identity()}; }

// Area enclosed by the piecewise-linear zero contour of `f` on an n x n
// lattice over the unit square: each cell is clipped to the polygon whose
// edge crossings come from linear interpolation of the corner values.
double marching_squares_area(int n, const std::function<double(const Vec2&)>& f) {
  double total = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 P[4] = {Vec2(i, j) / n, Vec2(i + 1, j) / n, Vec2(i + 1, j + 1) / n, Vec2(i, j + 1) / n};
      double V[4];
      for (int k = 0; k < 4; ++k) V[k] = f(P[k]);
      std::vector<Vec2> poly;
      for (int k = 0; k < 4; ++k) {
        const Vec2 &a = P[k], &b = P[(k + 1) % 4];
        const double va = V[k], vb = V[(k + 1) % 4];
        if (va < 0) poly.push_back(a);
        if ((va < 0) != (vb < 0)) poly.push_back(a + va / (va - vb) * (b - a));
      }
      double s = 0.0;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2 &p = poly[k], &q = poly[(k + 1) % poly.size()];
        s += p.x() * q.y() - q.x() * p.y();
      }
      total += 0.5 * std::abs(s);
    }
  return total;
}

}  // namespace

TEST_SUITE("cutcell") {
  TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1") {
    for (int n = 1; n <= 8; ++n) {
      const GaussRule& g = gauss_legendre(n);
      REQUIRE(g.points.size() == std::size_t(n));
      for (int d = 0; d <= 2 * n - 1; ++d) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += g.weights[q] * std::pow(g.points[q], d);
        CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("untrimmed element gets the tensor rule") {
    const ElementFrame fr{Vec2(0.5, -1.0), Vec2(0.25, 0.5), rotation(0.3)};
    const ElementQuadrature q = octree_quadrature(fr, levelset::everywhere(), 3, 5);
    CHECK(q.volume.size() == 25u);
    CHECK(q.surface.empty());
    CHECK(q.volume_measure() == doctest::Approx(0.125).epsilon(1e-15));
    // Degree-9 polynomial in the local coordinates integrates exactly.
    double s = 0.0;
    for (const auto& p : q.volume) s += p.weight * std::pow(p.local.x(), 9) * std::pow(p.local.y(), 9);
    CHECK(s == doctest::Approx(0.125 / 100.0).epsilon(1e-13));
  }

  TEST_CASE("straight cuts are integrated exactly") {
    for (int depth : {0, 1, 3, 5}) {
      const ElementQuadrature q = octree_quadrature(unit_frame(), levelset::half_plane(Vec2(1, 0), 0.5), depth, 5);
      CHECK(q.volume_measure() == doctest::Approx(0.5).epsilon(1e-14));
      CHECK(q.surface_measure() == doctest::Approx(1.0).epsilon(1e-14));
      for (const auto& p : q.surface) CHECK((p.normal - Vec2(1, 0)).norm() < 1e-15);
    }
    // Oblique line: area of the triangle cut off is exact too.
    const LevelSet ls = levelset::half_plane(Vec2(1, 1), 1.2 / std::sqrt(2.0));
    const ElementQuadrature q = octree_quadrature(unit_frame(), ls, 3, 5);
    CHECK(q.volume_measure() == doctest::Approx(1.0 - 0.5 * 0.8 * 0.8).epsilon(1e-13));
    CHECK(q.surface_measure() == doctest::Approx(0.8 * std::sqrt(2.0)).epsilon(1e-13));
  }

  TEST_CASE("circle area equals the marching-squares polygon and converges") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {4, 4});
    const LevelSet ls = levelset::disk(Vec2(0.5, 0.5), 0.3);
    const DomainMeasure oracle = measure_domain(a, ls, 8);
    CHECK(oracle.area == doctest::Approx(kPi * 0.09).epsilon(1e-4));
    CHECK(oracle.perimeter == doctest::Approx(2 * kPi * 0.3).epsilon(1e-4));
    double prev_area = 1.0, prev_perimeter = 1.0;
    for (int depth = 1; depth <= 5; ++depth) {
      const DomainMeasure d = measure_domain(a, ls, depth);
      const double poly = marching_squares_area(4 << depth, [&](const Vec2& x) { return ls(x); });
      CHECK(d.area == doctest::Approx(poly).epsilon(1e-12));
      const double ea = std::abs(d.area - oracle.area) / oracle.area;
      const double ep = std::abs(d.perimeter - oracle.perimeter) / oracle.perimeter;
      CHECK(ea < prev_area);
      CHECK(ep < prev_perimeter);
      if (depth > 1) CHECK(ea < 0.35 * prev_area);  // second order
      prev_area = ea;
      prev_perimeter = ep;
    }
  }

  TEST_CASE("quadrature weights and normals") {
    const ElementFrame fr{Vec2(-0.5, -0.5), Vec2(1, 1), rotation(0.2)};
    const Vec2 c(0.1, -0.05);
    const LevelSet ls = levelset::disk(c, 0.4);
    const ElementQuadrature q = octree_quadrature(fr, ls, 4, 5);
    REQUIRE(!q.surface.empty());
    for (const auto& p : q.volume) CHECK(p.weight >= 0.0);
    for (const auto& p : q.surface) {
      CHECK(p.weight >= 0.0);
      CHECK(std::abs(p.normal.norm() - 1.0) < 1e-12);
      CHECK(p.normal.dot(p.x - c) > 0.0);  // out of the fluid
      CHECK(std::abs(p.facet_normal.norm() - 1.0) < 1e-12);
      CHECK((fr.physical(p.local) - p.x).norm() < 1e-14);
    }
  }

  TEST_CASE("divergence theorem on the tessellated boundary") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const AmbientMesh a = build_ambient(Vec2(-1, -1), Vec2(2, 2), {8, 8}, 0.3);
    const ImmersedMesh m = classify_elements(a, levelset::disk(Vec2(0.05, 0.02), 0.71), 3);
    const CutQuadrature q = build_cut_quadrature(m, levelset::disk(Vec2(0.05, 0.02), 0.71), 5);
    const double perimeter = q.immersed_boundary_length();
    for (int trial = 0; trial < 5; ++trial) {
      const Vec2 cst(u(rng), u(rng));
      double flux = 0.0;
      for (const auto& e : q.elements)
        for (const auto& p : e.surface) flux += p.weight * cst.dot(p.facet_normal);
      CHECK(std::abs(flux) < 1e-10 * cst.norm() * perimeter);

      // Quadratic field F = A x + (x.B x) c: div F exact on triangles.
      Mat2 A;
      A << u(rng), u(rng), u(rng), u(rng);
      const Vec2 b(u(rng), u(rng));
      auto F = [&](const Vec2& x) -> Vec2 { return A * x + x.squaredNorm() * b; };
      auto divF = [&](const Vec2& x) { return A.trace() + 2.0 * x.dot(b); };
      double vol = 0.0, surf = 0.0;
      for (const auto& e : q.elements) {
        for (const auto& p : e.volume) vol += p.weight * divF(p.x);
        for (const auto& p : e.surface) surf += p.weight * F(p.x).dot(p.facet_normal);
      }
      CHECK(std::abs(vol - surf) < 1e-11);
    }
  }

  TEST_CASE("surface normals") {
    const double r = 0.7;
    CHECK((surface_normal(levelset::disk(Vec2::Zero(), r), Vec2(r, 0)) - Vec2(1, 0)).norm() < 1e-15);
    CHECK((surface_normal(levelset::half_plane(Vec2(1, 0), 0.3), Vec2(0.3, 5.0)) - Vec2(1, 0)).norm() < 1e-15);
    // The channel walls keep their physical normals whatever the ambient
    // rotation; in the ambient frame they are the rotated-back normals.
    const LevelSet strip = levelset::horizontal_strip(-0.5, 0.5);
    CHECK((surface_normal(strip, Vec2(0.2, 0.5)) - Vec2(0, 1)).norm() < 1e-15);
    CHECK((surface_normal(strip, Vec2(0.2, -0.5)) - Vec2(0, -1)).norm() < 1e-15);
    const double theta = kPi / 8;
    const Vec2 na = rotation(theta).transpose() * surface_normal(strip, Vec2(0.0, 0.5));
    CHECK((na - Vec2(std::sin(theta), std::cos(theta))).norm() < 1e-15);
    CHECK_THROWS_AS(surface_normal(levelset::disk(Vec2::Zero(), r), Vec2::Zero()), GeometryError);
  }
}
