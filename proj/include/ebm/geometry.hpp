#pragma once

#include <cstdint>
#include <vector>

#include "ebm/types.hpp"

namespace ebm {

// Line { p : n . p = c } with unit normal n.
struct Line {
  Eigen::Vector2d n;
  double c = 0.0;

  // Normalizes (nx, ny, c); throws DegenerateDomain on zero normal.
  static Line normal_offset(double nx, double ny, double c);
  // Line through two distinct points.
  static Line through(const Point& p, const Point& q);

  // Signed distance, positive on the normal side.
  double side(const Point& p) const { return n.dot(p) - c; }
};

// Mirror image of p across l.
Point reflect(const Point& p, const Line& l);

// Fold toward an anchor: identity on the closed anchor side, reflection on
// the other side. Throws AnchorOnLine when the anchor is on l within kGeomTol.
Point fold(const Point& p, const Line& l, const Point& anchor);

struct Aabb {
  Point lo;
  Point hi;
};

// Convex polygon with counterclockwise vertex order (re-oriented and
// validated on construction).
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return v_; }
  double area() const { return area_; }
  Point centroid() const { return centroid_; }
  Aabb bounds() const;

  bool contains(const Point& p, double tol = kGeomTol) const;

  // Signed distance of p outside the polygon: 0 when inside, otherwise the
  // largest half-plane violation over the edges.
  double outside_distance(const Point& p) const;

  // Closest point of the polygon (used for boundary snapping).
  Point project(const Point& p) const;

  // Part of the polygon on the closed side of l where side has the given
  // sign (+1 keeps side >= 0, -1 keeps side <= 0). Empty result possible.
  std::vector<Point> clip(const Line& l, int keep_sign) const;

 private:
  std::vector<Point> v_;
  double area_ = 0.0;
  Point centroid_{0.0, 0.0};
};

// n points uniform in the polygon, deterministic in the seed (rejection from
// the bounding box). Throws DegenerateDomain if the polygon has no area.
std::vector<Point> sample(const ConvexPolygon& domain, std::size_t n,
                          std::uint64_t rng_seed);

}  // namespace ebm
