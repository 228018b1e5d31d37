#include "ebm/maps.hpp"

#include <cmath>
#include <utility>

#include "ebm/errors.hpp"
#include "ebm/rng.hpp"

namespace ebm {

const ConvexPolygon& triangle_domain() {
  static const ConvexPolygon tri{
      {Point{0.0, 0.0}, Point{2.0, 0.0}, Point{1.0, 1.0}}};
  return tri;
}

ConvexPolygon tent_square(double mu) {
  if (!(mu > 1.0 && mu <= 2.0))
    throw OutOfRange("tent square needs mu in (1, 2]");
  const double lo = mu * (2.0 - mu);
  return ConvexPolygon{
      {Point{lo, lo}, Point{mu, lo}, Point{mu, mu}, Point{lo, mu}}};
}

double tent_eval(double mu, double x) {
  if (!(mu >= 0.0 && mu <= 2.0)) throw OutOfRange("tent slope outside [0, 2]");
  if (x < -kGeomTol || x > 2.0 + kGeomTol)
    throw OutOfDomain("tent input outside [0, 2]");
  return x <= 1.0 ? mu * x : mu * (2.0 - x);
}

Branch tent_branch(double x) { return x <= 1.0 ? Branch::Left : Branch::Right; }

Point tent_product_eval(double mu, const Point& p) {
  return {tent_eval(mu, p.x()), tent_eval(mu, p.y())};
}

Branch lambda_branch(const Point& p) {
  return p.x() <= 1.0 ? Branch::T0 : Branch::T1;
}

Point lambda_eval(double t, const Point& p) {
  if (!triangle_domain().contains(p))
    throw OutOfDomain("point outside the triangle");
  if (p.x() <= 1.0) return {t * (p.x() + p.y()), t * (p.x() - p.y())};
  return {t * (2.0 - p.x() + p.y()), t * (2.0 - p.x() - p.y())};
}

Mat2 lambda_differential(double t, Branch br) {
  Mat2 m;
  switch (br) {
    case Branch::T0:
      m << t, t, t, -t;
      return m;
    case Branch::T1:
      m << -t, t, -t, -t;
      return m;
    default:
      throw OutOfRange("branch not part of the two-piece family");
  }
}

Branch psi_branch(const Params& prm, const Point& p) {
  if (p.x() <= 1.0)
    return p.x() + p.y() <= prm.b ? Branch::T0minus : Branch::T0plus;
  return p.x() - p.y() >= 2.0 - prm.b ? Branch::T1minus : Branch::T1plus;
}

Point psi_eval(const Params& prm, const Point& p) {
  if (!triangle_domain().contains(p))
    throw OutOfDomain("point outside the triangle");
  const double a = prm.a, b = prm.b;
  switch (psi_branch(prm, p)) {
    case Branch::T0minus:
      return {a * p.x(), a * p.y()};
    case Branch::T0plus:
      return {a * (b - p.y()), a * (b - p.x())};
    case Branch::T1minus:
      return {a * (2.0 - p.x()), a * p.y()};
    default:  // T1plus
      return {a * (b - p.y()), a * (b - 2.0 + p.x())};
  }
}

Mat2 psi_differential(const Params& prm, Branch br) {
  const double a = prm.a;
  Mat2 m;
  switch (br) {
    case Branch::T0minus:
      m << a, 0, 0, a;
      return m;
    case Branch::T0plus:
      m << 0, -a, -a, 0;
      return m;
    case Branch::T1minus:
      m << -a, 0, 0, a;
      return m;
    case Branch::T1plus:
      m << 0, -a, a, 0;
      return m;
    default:
      throw OutOfRange("branch not part of the four-branch family");
  }
}

namespace {

// Point-in-union test with a snap tolerance.
bool union_contains(const std::vector<ConvexPolygon>& pieces, const Point& p) {
  for (const ConvexPolygon& poly : pieces)
    if (poly.contains(p, kSnapTol)) return true;
  return false;
}

// Representative points of a piece: vertices, edge midpoints, centroid, and a
// few deterministic interior samples.
std::vector<Point> probe_points(const ConvexPolygon& piece) {
  std::vector<Point> pts = piece.vertices();
  const std::size_t n = piece.vertices().size();
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(0.5 * (piece.vertices()[i] + piece.vertices()[(i + 1) % n]));
  pts.push_back(piece.centroid());
  for (const Point& s : sample(piece, 64, 0x5eedull)) pts.push_back(s);
  return pts;
}

}  // namespace

GenericEBM::GenericEBM(ConvexPolygon domain, std::vector<Line> fold_lines,
                       Point anchor, Mat2 linear)
    : domain_(std::move(domain)),
      folds_(std::move(fold_lines)),
      anchor_(std::move(anchor)),
      linear_(std::move(linear)) {
  if (!(std::abs(linear_.determinant()) > 1.0))
    throw OutOfRange("linear part must expand area");
  if (!domain_.contains(anchor_)) throw OutOfDomain("anchor outside domain");
  for (const Line& l : folds_)
    if (std::abs(l.side(anchor_)) <= kGeomTol)
      throw AnchorOnLine("anchor lies on a fold line");

  // Track the folded region as a union of convex pieces and require each fold
  // to send its far part into the near part already covered.
  std::vector<ConvexPolygon> pieces{domain_};
  for (const Line& l : folds_) {
    const int near_sign = l.side(anchor_) > 0.0 ? +1 : -1;
    std::vector<ConvexPolygon> kept;
    std::vector<ConvexPolygon> reflected;
    for (const ConvexPolygon& piece : pieces) {
      std::vector<Point> near_part = piece.clip(l, near_sign);
      if (near_part.size() >= 3) {
        ConvexPolygon poly{std::move(near_part)};
        if (poly.area() > kGeomTol) kept.push_back(std::move(poly));
      }
      std::vector<Point> far_part = piece.clip(l, -near_sign);
      if (far_part.size() >= 3) {
        for (Point& v : far_part) v = reflect(v, l);
        ConvexPolygon poly{std::move(far_part)};
        if (poly.area() > kGeomTol) reflected.push_back(std::move(poly));
      }
    }
    for (const ConvexPolygon& piece : reflected)
      for (const Point& p : probe_points(piece))
        if (!union_contains(kept, p))
          throw BadFold("fold sends part of the region outside itself");
    pieces = std::move(kept);
    for (ConvexPolygon& piece : reflected) pieces.push_back(std::move(piece));
  }

  for (const ConvexPolygon& piece : pieces)
    for (const Point& p : probe_points(piece)) {
      const Point q = anchor_ + linear_ * (p - anchor_);
      if (!domain_.contains(q, kSnapTol))
        throw ImageEscapesDomain("affine image leaves the domain");
    }
}

Point GenericEBM::eval(const Point& p) const {
  if (!domain_.contains(p)) throw OutOfDomain("point outside domain");
  Point q = p;
  for (const Line& l : folds_) q = fold(q, l, anchor_);
  q = anchor_ + linear_ * (q - anchor_);
  if (!domain_.contains(q, kSnapTol))
    throw ImageEscapesDomain("image left the domain");
  return q;
}

GenericEBM make_psi_ebm(const Params& prm) {
  if (!in_canonical_params(prm))
    throw OutOfRange("parameters outside the canonical set");
  Mat2 lin;
  lin << prm.a, 0, 0, prm.a;
  return GenericEBM(triangle_domain(),
                    {Line::normal_offset(1, 0, 1),
                     Line::normal_offset(1, 1, prm.b)},
                    Point{0.0, 0.0}, lin);
}

GenericEBM make_lambda_ebm(double t) {
  Mat2 lin;
  lin << t, t, t, -t;
  return GenericEBM(triangle_domain(), {Line::normal_offset(1, 0, 1)},
                    Point{0.0, 0.0}, lin);
}

}  // namespace ebm
