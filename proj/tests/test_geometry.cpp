#include <doctest.h>

#include <cmath>
#include <vector>

#include "ebm/errors.hpp"
#include "ebm/geometry.hpp"

using namespace ebm;

TEST_CASE("line stores a unit normal and a signed offset") {
  const Line l = Line::normal_offset(2.0, 0.0, 4.0);
  CHECK(l.n.x() == doctest::Approx(1.0));
  CHECK(l.n.y() == doctest::Approx(0.0));
  CHECK(l.c == doctest::Approx(2.0));
  CHECK(l.side({3.0, 7.0}) == doctest::Approx(1.0));
  CHECK(l.side({2.0, -1.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(Line::normal_offset(0.0, 0.0, 1.0), DegenerateDomain);
}

TEST_CASE("line through two points contains both") {
  const Point p{0.5, 0.25}, q{1.5, 2.0};
  const Line l = Line::through(p, q);
  CHECK(std::abs(l.side(p)) < 1e-15);
  CHECK(std::abs(l.side(q)) < 1e-15);
  CHECK_THROWS_AS(Line::through(p, p), DegenerateDomain);
}

TEST_CASE("reflection is an involution that fixes the line") {
  const Line l = Line::normal_offset(1.0, 1.0, 1.3);
  const Point p{0.8, -0.4};
  const Point r = reflect(p, l);
  CHECK(l.side(r) == doctest::Approx(-l.side(p)));
  CHECK((reflect(r, l) - p).norm() < 1e-15);
}

TEST_CASE("fold keeps the anchor side and mirrors the far side") {
  const Line l = Line::normal_offset(1.0, 0.0, 1.0);
  const Point anchor{0.2, 0.1};
  const Point near{0.7, 0.9};
  CHECK((fold(near, l, anchor) - near).norm() == 0.0);
  const Point far{1.6, 0.3};
  const Point folded = fold(far, l, anchor);
  CHECK(folded.x() == doctest::Approx(0.4));
  CHECK(folded.y() == doctest::Approx(0.3));
  CHECK_THROWS_AS(fold(far, l, Point{1.0, 0.5}), AnchorOnLine);
}

TEST_CASE("polygon construction reorients clockwise input") {
  const ConvexPolygon p({{0, 0}, {0, 1}, {1, 1}, {1, 0}});  // clockwise
  CHECK(p.area() == doctest::Approx(1.0));
  // counterclockwise after construction: consecutive edge cross products >= 0
  const auto& v = p.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point e1 = v[(i + 1) % v.size()] - v[i];
    const Point e2 = v[(i + 2) % v.size()] - v[(i + 1) % v.size()];
    CHECK(e1.x() * e2.y() - e1.y() * e2.x() >= 0.0);
  }
  CHECK(p.centroid().x() == doctest::Approx(0.5));
  CHECK(p.centroid().y() == doctest::Approx(0.5));
}

TEST_CASE("degenerate and nonconvex vertex lists are rejected") {
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}}), DegenerateDomain);
  CHECK_THROWS_AS(ConvexPolygon({{0, 0}, {1, 0}, {2, 0}}), DegenerateDomain);
  CHECK_THROWS_AS(
      ConvexPolygon({{0, 0}, {2, 0}, {0.1, 0.1}, {0, 2}}), DegenerateDomain);
}

TEST_CASE("containment, outside distance and projection agree") {
  const ConvexPolygon sq({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  CHECK(sq.contains({1.0, 1.0}));
  CHECK(sq.contains({0.0, 0.0}));
  CHECK(!sq.contains({2.1, 1.0}));
  CHECK(sq.contains({2.0 + 1e-13, 1.0}));  // within tolerance
  CHECK(sq.outside_distance({1.0, 1.0}) == 0.0);
  CHECK(sq.outside_distance({3.0, 1.0}) == doctest::Approx(1.0));
  const Point proj = sq.project({3.0, -1.0});
  CHECK(proj.x() == doctest::Approx(2.0));
  CHECK(proj.y() == doctest::Approx(0.0));
  CHECK((sq.project({0.5, 0.5}) - Point{0.5, 0.5}).norm() < 1e-15);
}

TEST_CASE("bounding box covers exactly the vertex span") {
  const ConvexPolygon tri({{0, 0}, {2, 0}, {1, 1}});
  const Aabb box = tri.bounds();
  CHECK(box.lo.x() == 0.0);
  CHECK(box.lo.y() == 0.0);
  CHECK(box.hi.x() == 2.0);
  CHECK(box.hi.y() == 1.0);
}

TEST_CASE("clipping a square against a diagonal keeps the requested side") {
  const ConvexPolygon sq({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const Line diag = Line::normal_offset(1.0, 1.0, 1.0);  // x + y = 1
  const std::vector<Point> lower = sq.clip(diag, -1);
  const ConvexPolygon lower_poly(lower);
  CHECK(lower_poly.area() == doctest::Approx(0.5));
  for (const Point& p : lower) CHECK(p.x() + p.y() <= 1.0 + 1e-12);
  const std::vector<Point> upper = sq.clip(diag, +1);
  CHECK(ConvexPolygon(upper).area() == doctest::Approx(0.5));
  // a line missing the polygon clips to nothing on the far side
  const Line far = Line::normal_offset(1.0, 0.0, 5.0);
  CHECK(sq.clip(far, +1).empty());
}

TEST_CASE("polygon sampling is deterministic and stays inside") {
  const ConvexPolygon tri({{0, 0}, {2, 0}, {1, 1}});
  const auto pts1 = sample(tri, 256, 42);
  const auto pts2 = sample(tri, 256, 42);
  REQUIRE(pts1.size() == 256);
  for (std::size_t i = 0; i < pts1.size(); ++i) {
    CHECK(pts1[i] == pts2[i]);
    CHECK(tri.contains(pts1[i]));
  }
  const auto pts3 = sample(tri, 256, 43);
  CHECK(pts1[0] != pts3[0]);
}
