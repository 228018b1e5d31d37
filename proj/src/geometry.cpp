#include "ebm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebm/errors.hpp"
#include "ebm/rng.hpp"

namespace ebm {

Line Line::normal_offset(double nx, double ny, double c) {
  const double len = std::hypot(nx, ny);
  if (len < kGeomTol) throw DegenerateDomain("line normal is zero");
  return Line{Eigen::Vector2d(nx / len, ny / len), c / len};
}

Line Line::through(const Point& p, const Point& q) {
  const Eigen::Vector2d d = q - p;
  if (d.norm() < kGeomTol) throw DegenerateDomain("line through equal points");
  // Left normal of the direction.
  return normal_offset(-d.y(), d.x(), -d.y() * p.x() + d.x() * p.y());
}

Point reflect(const Point& p, const Line& l) {
  return p - 2.0 * l.side(p) * l.n;
}

Point fold(const Point& p, const Line& l, const Point& anchor) {
  const double sa = l.side(anchor);
  if (std::abs(sa) < kGeomTol) throw AnchorOnLine("fold anchor on the line");
  const double sp = l.side(p);
  if (sa > 0.0 ? sp >= 0.0 : sp <= 0.0) return p;
  return reflect(p, l);
}

namespace {

double polygon_area2(const std::vector<Point>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Point& p = v[i];
    const Point& q = v[(i + 1) % v.size()];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return s;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point> vertices) : v_(std::move(vertices)) {
  if (v_.size() < 3) throw DegenerateDomain("polygon needs >= 3 vertices");
  for (const Point& p : v_) {
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
      throw DegenerateDomain("polygon vertex not finite");
  }
  double a2 = polygon_area2(v_);
  if (a2 < 0.0) {
    std::reverse(v_.begin(), v_.end());
    a2 = -a2;
  }
  if (a2 <= kGeomTol * kGeomTol) throw DegenerateDomain("polygon has no area");
  area_ = 0.5 * a2;

  // Convexity: all consecutive edge cross products >= -tol at the polygon's
  // scale (collinear vertices allowed).
  double scale = 0.0;
  for (const Point& p : v_) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = kGeomTol * std::max(1.0, scale * scale);
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e1 = v_[(i + 1) % n] - v_[i];
    const Eigen::Vector2d e2 = v_[(i + 2) % n] - v_[(i + 1) % n];
    if (e1.x() * e2.y() - e1.y() * e2.x() < -tol)
      throw DegenerateDomain("polygon not convex");
  }

  Point c{0.0, 0.0};
  for (const Point& p : v_) c += p;
  centroid_ = c / static_cast<double>(n);
}

Aabb ConvexPolygon::bounds() const {
  Point lo = v_.front(), hi = v_.front();
  for (const Point& p : v_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

bool ConvexPolygon::contains(const Point& p, double tol) const {
  return outside_distance(p) <= tol;
}

double ConvexPolygon::outside_distance(const Point& p) const {
  // CCW order: interior is left of each edge, so the inward normal of edge
  // (a, b) is (-dy, dx) normalized; violation is the signed distance on the
  // outward side.
  double worst = 0.0;
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v_[i];
    const Point& b = v_[(i + 1) % n];
    const Eigen::Vector2d e = b - a;
    const double len = e.norm();
    if (len < kGeomTol) continue;
    const double out = (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x())) / len;
    worst = std::min(worst, out);
  }
  return -worst;
}

Point ConvexPolygon::project(const Point& p) const {
  if (contains(p, 0.0)) return p;
  double best = std::numeric_limits<double>::infinity();
  Point bp = v_.front();
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v_[i];
    const Point& b = v_[(i + 1) % n];
    const Eigen::Vector2d e = b - a;
    const double ee = e.squaredNorm();
    double t = ee > 0.0 ? (p - a).dot(e) / ee : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point q = a + t * e;
    const double d = (p - q).squaredNorm();
    if (d < best) {
      best = d;
      bp = q;
    }
  }
  return bp;
}

std::vector<Point> ConvexPolygon::clip(const Line& l, int keep_sign) const {
  const double s = keep_sign >= 0 ? 1.0 : -1.0;
  std::vector<Point> out;
  const std::size_t n = v_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = v_[i];
    const Point& b = v_[(i + 1) % n];
    const double sa = s * l.side(a);
    const double sb = s * l.side(b);
    if (sa >= -kGeomTol) out.push_back(a);
    if ((sa > kGeomTol && sb < -kGeomTol) || (sa < -kGeomTol && sb > kGeomTol)) {
      const double t = sa / (sa - sb);
      out.push_back(a + t * (b - a));
    }
  }
  return out;
}

std::vector<Point> sample(const ConvexPolygon& domain, std::size_t n,
                          std::uint64_t rng_seed) {
  if (domain.area() <= 0.0) throw DegenerateDomain("cannot sample zero area");
  const Aabb box = domain.bounds();
  Rng rng(rng_seed);
  std::vector<Point> out;
  out.reserve(n);
  while (out.size() < n) {
    const Point p{rng.uniform(box.lo.x(), box.hi.x()),
                  rng.uniform(box.lo.y(), box.hi.y())};
    if (domain.contains(p, 0.0)) out.push_back(p);
  }
  return out;
}

}  // namespace ebm
