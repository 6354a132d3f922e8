#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "nsch/immersed_mesh.hpp"

using namespace nsch;

namespace {

bool any_inside_sample(const AmbientMesh& am, int e, const LevelSet& ls, int depth) {
  const int n = 1 << depth;
  const ElementFrame fr = am.frame(e);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      if (ls(fr.physical(Vec2(double(i) / n, double(j) / n))) < 0.0) return true;
  return false;
}

bool touches_cut(const ImmersedMesh& m, const Face& f) { return m.is_cut(f.lower) || m.is_cut(f.upper); }

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("ambient mesh geometry") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {2, 2});
    CHECK(a.num_elements() == 4);
    CHECK(a.h() == 0.5);
    const AmbientMesh tc = build_ambient(Vec2::Zero(), Vec2(50e-6, 10e-6), {80, 16});
    CHECK(tc.element_size().x() == doctest::Approx(0.625e-6).epsilon(1e-14));
    CHECK(tc.element_size().y() == doctest::Approx(0.625e-6).epsilon(1e-14));
    const AmbientMesh r = build_ambient(Vec2::Zero(), Vec2(1, 1), {2, 2}, std::numbers::pi / 4);
    const Vec2 x = r.to_physical(Vec2(1, 0));
    CHECK(x.x() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(x.y() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK((r.to_ambient(x) - Vec2(1, 0)).norm() < 1e-15);
    const auto loc = r.locate(r.to_physical(Vec2(0.75, 0.25)));
    REQUIRE(loc.has_value());
    CHECK(loc->element == r.element_id(1, 0));
    CHECK((loc->local - Vec2(0.5, 0.5)).norm() < 1e-12);
    CHECK_FALSE(r.locate(r.to_physical(Vec2(1.5, 0.5))).has_value());
    CHECK_THROWS_AS(build_ambient(Vec2::Zero(), Vec2(0, 1), {2, 2}), ConfigError);
    CHECK_THROWS_AS(build_ambient(Vec2::Zero(), Vec2(1, -1), {2, 2}), ConfigError);
    CHECK_THROWS_AS(build_ambient(Vec2::Zero(), Vec2(1, 1), {0, 2}), ConfigError);
  }

  TEST_CASE("untrimmed mesh has no cut elements and the full skeleton") {
    for (auto [n, m] : {std::pair{2, 2}, std::pair{5, 3}, std::pair{7, 4}}) {
      const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {n, m});
      const ImmersedMesh im = classify_elements(a, levelset::everywhere());
      CHECK(im.active_elements.size() == std::size_t(n * m));
      CHECK(im.cut_elements.empty());
      CHECK(im.skeleton_faces.size() == std::size_t((n - 1) * m + n * (m - 1)));
      CHECK(im.ghost_faces.empty());
      CHECK(im.boundary_facets.size() == std::size_t(2 * (n + m)));
    }
    const ImmersedMesh p = classify_elements(build_ambient(Vec2::Zero(), Vec2(1, 1), {5, 3}, 0.0, {true, false}),
                                             levelset::everywhere());
    CHECK(p.skeleton_faces.size() == std::size_t(5 * 3 + 5 * 2));  // seams included
    CHECK(p.boundary_facets.size() == 10u);                          // top and bottom only
  }

  TEST_CASE("half-plane on a 2x2 mesh") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {2, 2});
    const ImmersedMesh im = classify_elements(a, levelset::half_plane(Vec2(1, 0), 0.75));
    CHECK(im.active_elements.size() == 4u);
    CHECK(im.cut_elements == std::vector<int>{1, 3});
    CHECK(im.skeleton_faces.size() == 4u);
    // Faces (0|1), (2|3) and (1|3) touch a cut element; (0|2) does not.
    CHECK(im.ghost_faces.size() == 3u);
    for (const Face& f : im.ghost_faces) CHECK(touches_cut(im, f));
  }

  TEST_CASE("circle strictly inside one element") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {4, 4});
    const ImmersedMesh im = classify_elements(a, levelset::disk(Vec2(0.37, 0.62), 0.05));
    CHECK(im.active_elements == std::vector<int>{a.element_id(1, 2)});
    CHECK(im.cut_elements == std::vector<int>{a.element_id(1, 2)});
    CHECK(im.skeleton_faces.empty());  // no active neighbours
  }

  TEST_CASE("touching the domain at a round-off corner does not activate an element") {
    // Nodes (4, -3), (3, 4), ... lie on the circle; their level set is a
    // round-off residue of either sign.
    const AmbientMesh a = build_ambient(Vec2(-6e-6, -6e-6), Vec2(12e-6, 12e-6), {24, 24});
    const LevelSet ls = levelset::disk(Vec2::Zero(), 5e-6);
    const ImmersedMesh im = classify_elements(a, ls, 3);
    CHECK_FALSE(im.is_active(a.element_id(20, 5)));  // [4, 4.5] x [-3.5, -3] um
    CHECK_FALSE(im.is_active(a.element_id(18, 20)));  // [3, 3.5] x [4, 4.5] um
    const CutQuadrature q = build_cut_quadrature(im, ls);
    for (int e : im.active_elements) CHECK(q.elements[e].volume_measure() > 0.0);
  }

  TEST_CASE("classification matches brute-force lattice sampling and the face invariants") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double theta = 0.8 * u(rng);
      const AmbientMesh a = build_ambient(Vec2(-1, -1), Vec2(2, 2), {9, 7}, theta, {trial % 3 == 0, false});
      const LevelSet ls = levelset::intersection(
          {levelset::disk(Vec2(0.4 * u(rng) - 0.2, 0.4 * u(rng) - 0.2), 0.5 + 0.4 * u(rng)),
           levelset::hole(Vec2(u(rng) - 0.5, u(rng) - 0.5), 0.1 + 0.2 * u(rng))});
      const ImmersedMesh im = classify_elements(a, ls, 3);
      for (int e = 0; e < a.num_elements(); ++e) CHECK(im.is_active(e) == any_inside_sample(a, e, ls, 3));
      std::set<std::tuple<int, int, int>> skel;
      for (const Face& f : im.skeleton_faces) {
        CHECK(im.is_active(f.lower));
        CHECK(im.is_active(f.upper));
        const auto lo = a.element_index(f.lower), hi = a.element_index(f.upper);
        const int ax = f.axis, other = 1 - ax;
        CHECK(lo[other] == hi[other]);
        CHECK((hi[ax] == lo[ax] + 1 || (a.periodic()[ax] && lo[ax] == a.counts()[ax] - 1 && hi[ax] == 0)));
        skel.insert({f.lower, f.upper, f.axis});
      }
      CHECK(skel.size() == im.skeleton_faces.size());
      for (const Face& f : im.ghost_faces) {
        CHECK(skel.count({f.lower, f.upper, f.axis}) == 1);
        CHECK(touches_cut(im, f));
      }
      std::size_t expected_ghost = 0;
      for (const Face& f : im.skeleton_faces) expected_ghost += touches_cut(im, f);
      CHECK(im.ghost_faces.size() == expected_ghost);
      // Only the sign field matters.
      const ImmersedMesh scaled = classify_elements(a, levelset::scaled(ls, 37.5), 3);
      CHECK(scaled.active_elements == im.active_elements);
      CHECK(scaled.cut_elements == im.cut_elements);
      CHECK(scaled.ghost_faces == im.ghost_faces);
    }
  }

  TEST_CASE("empty domain is rejected") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {4, 4});
    CHECK_THROWS_AS(classify_elements(a, levelset::disk(Vec2(3, 3), 0.5)), GeometryError);
  }

  TEST_CASE("boundary tags") {
    const AmbientMesh a = build_ambient(Vec2::Zero(), Vec2(1, 1), {4, 4});
    const ImmersedMesh im = classify_elements(a, levelset::everywhere());
    const ImmersedMesh t = tag_conforming_boundaries(
        im, {{Side::Left, BoundaryTag::Inflow, {}}, {Side::Bottom, BoundaryTag::Outflow, std::pair{0.25, 0.75}}});
    int inflow = 0, outflow = 0, wall = 0;
    for (const auto& f : t.boundary_facets) {
      if (f.tag == BoundaryTag::Inflow) {
        ++inflow;
        CHECK(f.side == Side::Left);
      } else if (f.tag == BoundaryTag::Outflow) {
        ++outflow;
        CHECK(f.side == Side::Bottom);
        const int i = a.element_index(f.element)[0];
        CHECK((i == 1 || i == 2));
      } else {
        ++wall;
        CHECK(f.tag == BoundaryTag::Wall);
      }
    }
    CHECK(inflow == 4);
    CHECK(outflow == 2);
    CHECK(wall == 10);

    CHECK_THROWS_AS(tag_conforming_boundaries(im, {{Side::Top, BoundaryTag::Wall, std::pair{0.1, 0.5}}}),
                    ConfigError);
    CHECK_THROWS_AS(tag_conforming_boundaries(im, {{Side::Top, BoundaryTag::Wall, std::pair{0.5, 0.5}}}),
                    ConfigError);
    CHECK_THROWS_AS(tag_conforming_boundaries(im, {{Side::Top, BoundaryTag::Wall, {}},
                                                   {Side::Top, BoundaryTag::Inflow, std::pair{0.0, 0.5}}}),
                    ConfigError);
    const ImmersedMesh p = classify_elements(build_ambient(Vec2::Zero(), Vec2(1, 1), {4, 4}, 0.0, {true, false}),
                                             levelset::everywhere());
    CHECK_THROWS_AS(tag_conforming_boundaries(p, {{Side::Left, BoundaryTag::Inflow, {}}}), ConfigError);
  }

  TEST_CASE("tag names") {
    CHECK(parse_side("left") == Side::Left);
    CHECK(parse_side("top") == Side::Top);
    CHECK(parse_boundary_tag("symmetric") == BoundaryTag::Symmetric);
    CHECK(std::string(to_string(BoundaryTag::Outflow)) == "outflow");
    CHECK_THROWS_AS(parse_side("front"), ConfigError);
    CHECK_THROWS_AS(parse_boundary_tag("slip"), ConfigError);
  }
}
