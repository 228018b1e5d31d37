#include "ebm/conjugacy.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ebm/errors.hpp"
#include "ebm/regions.hpp"
#include "ebm/renorm.hpp"

namespace ebm {

namespace {

constexpr double kDenTol = 1e-14;

void require_region(RegionTag tag, const Params& prm, const char* what) {
  if (!in_region({tag, 0}, prm.a, prm.b))
    throw RegionMismatch(std::string(what) + " requires parameters in " +
                         region_name({tag, 0}));
}

Point psi_pow(const Params& prm, Point p, int k) {
  for (int i = 0; i < k; ++i) p = psi_eval(prm, p);
  return p;
}

double checked_inv(double den, const char* what) {
  if (std::abs(den) < kDenTol)
    throw SingularChange(std::string("vanishing denominator: ") + what);
  return 1.0 / den;
}

// Distance from p to the boundary of a convex polygon, from inside.
double interior_margin(const ConvexPolygon& poly, const Point& p) {
  double margin = std::numeric_limits<double>::infinity();
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = v[(i + 1) % n] - v[i];
    const double len = e.norm();
    if (len < kGeomTol) continue;
    const double inward =
        (e.x() * (p.y() - v[i].y()) - e.y() * (p.x() - v[i].x())) / len;
    margin = std::min(margin, inward);
  }
  return margin;
}

}  // namespace

FixedPointData psi_fixed_point(const Params& prm) {
  if (!in_canonical_params(prm))
    throw OutOfRange("parameters outside the canonical set");
  const double a = prm.a, b = prm.b;
  FixedPointData f;
  f.p = Point{(a * b + 2.0 * a * a - a * a * b) / (1.0 + a * a),
              (a * b - 2.0 * a + a * a * b) / (1.0 + a * a)};
  if (in_region({RegionTag::P1, 0}, a, b)) {
    f.x2 = 2.0 * a / (1.0 + a);
    f.d = (2.0 * a + b - 2.0) / a;
  } else if (in_region({RegionTag::P2, 0}, a, b)) {
    f.x2 = a * b / (1.0 + a);
    f.d = (a * b - 1.0) / a;
  } else {
    f.x2 = f.d = std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

ChangeOfCoords make_chart(ChartKind kind, const Params& prm) {
  const double a = prm.a, b = prm.b;
  ChangeOfCoords c;
  c.kind = kind;
  switch (kind) {
    case ChartKind::OmegaP1: {
      const double x2 = 2.0 * a / (1.0 + a);
      const double d = (2.0 * a + b - 2.0) / a;
      const double ix = checked_inv(x2 - (2.0 - b), "x2 - (2 - b)");
      const double iy = checked_inv(d - x2, "d - x2");
      c.fwd_m << -ix, ix, iy, iy;
      c.fwd_o = Point{x2 * ix, -x2 * iy};
      break;
    }
    case ChartKind::TauP2: {
      const double x2 = a * b / (1.0 + a);
      const double d = (a * b - 1.0) / a;
      const double ix = checked_inv(1.0 - x2, "1 - x2");
      const double iy = checked_inv(x2 - d, "y2 - d");
      c.fwd_m << ix, 0.0, 0.0, -iy;
      c.fwd_o = Point{-x2 * ix, x2 * iy};
      break;
    }
    case ChartKind::PhiCentered:
    case ChartKind::PhiTildeDelta:
    case ChartKind::PhiHatPi: {
      const Point p = psi_fixed_point(prm).p;
      const double is = checked_inv(p.x() - 1.0, "x_fixed - 1");
      const double sx = kind == ChartKind::PhiCentered ? 1.0 : -1.0;
      const double sy = kind == ChartKind::PhiHatPi ? -1.0 : 1.0;
      c.fwd_m << sx * is, 0.0, 0.0, sy * is;
      c.fwd_o = Point{-sx * is * p.x(), -sy * is * p.y()};
      break;
    }
  }
  c.inv_m = c.fwd_m.inverse();
  c.inv_o = -c.inv_m * c.fwd_o;
  return c;
}

Point change_coords(const ChangeOfCoords& c, const Point& p, Direction dir) {
  return dir == Direction::Forward ? Point(c.fwd_m * p + c.fwd_o)
                                   : Point(c.inv_m * p + c.inv_o);
}

std::map<std::string, Point> named_points(const Params& prm) {
  if (!in_canonical_params(prm))
    throw OutOfRange("parameters outside the canonical set");
  const double a = prm.a, b = prm.b;
  const double a2 = a * a, a3 = a * a * a;
  std::map<std::string, Point> pts;
  pts["C"] = {2.0 - a - b + a * b, a * (b - 1.0)};
  pts["D"] = {1.0, a * (b - 1.0)};
  pts["E"] = {1.0, a * b - 1.0};
  pts["F"] = {0.5 * (2.0 - b + a * b), 0.5 * (-2.0 + b + a * b)};
  pts["K"] = {0.5 * (2.0 - 2.0 * a + 2.0 * a2 - b + 2.0 * a * b - a3 * b),
              0.5 * (-2.0 - 2.0 * a + b + 2.0 * a2 + 2.0 * a * b - a3 * b)};
  pts["N"] = {1.0, a * (-2.0 + a2 + b + a * b - a2 * b)};
  pts["G"] = {1.0, 1.0 - 2.0 * a + a2 * b};
  pts["C1"] = {a * (a + b - a * b), a2 * (b - 1.0)};
  pts["D1"] = {a * (a + b - a * b), a * (b - 1.0)};
  pts["E1"] = {a * (1.0 + b - a * b), a * (b - 1.0)};
  pts["F1"] = {0.5 * a * (2.0 + b - a * b), 0.5 * a * (-2.0 + b + a * b)};
  pts["F2"] = {0.5 * a * (2.0 * a + 2.0 * b - a * b - a2 * b),
               0.5 * a * (-4.0 + 2.0 * a + 2.0 * b + a * b - a2 * b)};
  pts["F3"] = {
      0.5 * a * (4.0 * a - 2.0 * a2 + 2.0 * b - 2.0 * a * b - a2 * b + a3 * b),
      0.5 * a * (-4.0 + 2.0 * a2 + 2.0 * b + 2.0 * a * b - a2 * b - a3 * b)};
  pts["K1"] = {0.5 * a * (2.0 + 2.0 * a - 2.0 * a2 + b - 2.0 * a * b + a3 * b),
               0.5 * a * (-2.0 - 2.0 * a + b + 2.0 * a2 + 2.0 * a * b - a3 * b)};
  pts["G1"] = {a * (-1.0 + 2.0 * a + b - a2 * b), a * (b - 1.0)};
  pts["D2"] = {a * (a + b - a * b), a * (-2.0 + a2 + b + a * b - a2 * b)};
  pts["D3"] = {a * (2.0 * a - a3 + b - a * b - a2 * b + a3 * b),
               a * (-2.0 + a2 + b + a * b - a2 * b)};
  pts["N1"] = {a * (2.0 * a + b - a * b - a2 * b - a3 + a3 * b), a * (b - 1.0)};
  pts["Fm1"] = {(4.0 * a - 2.0 + b - a * b) / (2.0 * a),
                (-2.0 + b + a * b) / (2.0 * a)};
  pts["Km1"] = {(2.0 * a + 2.0 * a2 - 2.0 + b - a3 * b) / (2.0 * a),
                (-2.0 + 2.0 * a - 2.0 * a2 + b + a3 * b) / (2.0 * a)};
  pts["Dm1"] = {1.0, (a * b - 1.0) / a};
  pts["Nm1"] = {a * (a + b - a * b), (a * b - 1.0) / a};
  return pts;
}

std::map<std::string, Point> named_points_centered(const Params& prm) {
  if (!in_canonical_params(prm))
    throw OutOfRange("parameters outside the canonical set");
  const double a = prm.a;
  const double g = gamma_coeff(prm.a, prm.b);
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2;
  std::map<std::string, Point> pts;
  pts["Pprime"] = {-2.0, 0.0};
  pts["Q"] = {-1.0, 1.0};
  pts["M"] = {-1.0, 0.0};
  pts["H1"] = {-1.0, -1.0};
  pts["H"] = {-1.0 / a, 1.0 / a};
  pts["K"] = {-1.0, 1.0 / a};
  pts["Ht"] = {-0.5 * g / a2, 0.5 * g / a2};
  pts["Kt"] = {-1.0, g / a2 - 1.0};
  pts["J"] = {-1.0, 1.0 - g / a};
  pts["Ht1"] = {-0.5 * g / a, -0.5 * g / a};
  pts["Ht2"] = {0.5 * g, -0.5 * g};
  pts["Ht3"] = {0.5 * a * g, 0.5 * a * g};
  pts["Ht4"] = {-0.5 * a2 * g, 0.5 * a2 * g};
  pts["Ht5"] = {-0.5 * a3 * g, -0.5 * a3 * g};
  pts["Kt2"] = {a2, a2 - g};
  pts["Kt3"] = {a * (g - a2), a3};
  pts["Kt4"] = {-a4, a2 * g - a4};
  pts["J1"] = {g - a, -a};
  pts["J2"] = {a2, a * (g - a)};
  pts["J3"] = {-a2 * (g - a), a3};
  pts["J4"] = {-a4, -a3 * (g - a)};
  pts["M1"] = {0.0, -a};
  pts["M2"] = {a2, 0.0};
  pts["M3"] = {0.0, a3};
  pts["M4"] = {-a4, 0.0};
  pts["Q1"] = {-a, -a};
  pts["H2"] = {a, -a};
  pts["K2"] = {a2, -a};
  return pts;
}

NamedDomain named_domain(DomainName name, const Params& prm, Frame frame) {
  std::vector<Point> verts;
  Frame natural = Frame::Original;
  switch (name) {
    case DomainName::R1: {
      if (!in_canonical_params(prm))
        throw RegionMismatch("base domain requires parameters in P");
      const auto pts = named_points(prm);
      verts = {pts.at("C1"), pts.at("D1"), pts.at("E1"), pts.at("F1")};
      break;
    }
    case DomainName::RectP1: {
      require_region(RegionTag::P1, prm, "first invariant rectangle");
      const auto pts = named_points(prm);
      verts = {pts.at("F1"), pts.at("F2"), pts.at("F3"), pts.at("K1")};
      break;
    }
    case DomainName::RectP2: {
      require_region(RegionTag::P2, prm, "second invariant rectangle");
      const auto pts = named_points(prm);
      verts = {pts.at("D1"), pts.at("D2"), pts.at("D3"), pts.at("N1")};
      break;
    }
    case DomainName::Delta:
      if (!in_canonical_params(prm))
        throw RegionMismatch("upper renormalization triangle requires P");
      natural = Frame::Centered;
      verts = {Point{0.0, 0.0}, Point{-2.0, 0.0}, Point{-1.0, 1.0}};
      break;
    case DomainName::Pi:
      if (!in_canonical_params(prm))
        throw RegionMismatch("lower renormalization triangle requires P");
      natural = Frame::Centered;
      verts = {Point{0.0, 0.0}, Point{-2.0, 0.0}, Point{-1.0, -1.0}};
      break;
    case DomainName::DeltaTilde: {
      require_region(RegionTag::P3, prm, "doubly renormalizable domain");
      natural = Frame::Centered;
      const auto pts = named_points_centered(prm);
      verts = {Point{0.0, 0.0}, pts.at("Ht4"), pts.at("Kt4"), pts.at("M4")};
      break;
    }
  }
  if (natural != frame) {
    const ChangeOfCoords phi = make_chart(ChartKind::PhiCentered, prm);
    const Direction dir =
        frame == Frame::Centered ? Direction::Forward : Direction::Inverse;
    for (Point& v : verts) v = change_coords(phi, v, dir);
  }
  return {name, ConvexPolygon{std::move(verts)}, frame};
}

Residual conjugacy_residual(ConjugacyKind kind, const Params& prm,
                            std::size_t n_samples, std::uint64_t rng_seed) {
  if (n_samples == 0) throw OutOfRange("need at least one sample");

  DomainName dom_name{};
  ChartKind chart_kind{};
  int power = 0;
  Params target{};
  switch (kind) {
    case ConjugacyKind::P1_square:
      require_region(RegionTag::P1, prm, "square conjugacy");
      dom_name = DomainName::RectP1;
      chart_kind = ChartKind::OmegaP1;
      power = 2;
      break;
    case ConjugacyKind::P2_square:
      require_region(RegionTag::P2, prm, "square conjugacy");
      dom_name = DomainName::RectP2;
      chart_kind = ChartKind::TauP2;
      power = 2;
      break;
    case ConjugacyKind::Delta_quad: {
      require_region(RegionTag::P3, prm, "quad conjugacy");
      dom_name = DomainName::DeltaTilde;
      chart_kind = ChartKind::PhiTildeDelta;
      power = 4;
      const auto [ta, tb] = apply(RenormOp::Delta, prm.a, prm.b);
      target = {ta, tb};
      break;
    }
    case ConjugacyKind::Pi_quad: {
      require_region(RegionTag::P3, prm, "quad conjugacy");
      dom_name = DomainName::Pi;
      chart_kind = ChartKind::PhiHatPi;
      power = 4;
      const auto [ta, tb] = apply(RenormOp::Pi, prm.a, prm.b);
      target = {ta, tb};
      break;
    }
  }

  const NamedDomain dom = named_domain(dom_name, prm, Frame::Original);
  const ChangeOfCoords chart = make_chart(chart_kind, prm);
  const double mu = prm.a * prm.a;

  // The upper quad conjugacy is stated only on the image of the target map's
  // domain; chart images of the sampled quad land there by construction, and
  // the polygon filter below just drops boundary-rounding strays.
  std::unique_ptr<ConvexPolygon> restriction;
  if (kind == ConjugacyKind::Delta_quad) {
    const double ta = target.a, tb = target.b;
    restriction = std::make_unique<ConvexPolygon>(std::vector<Point>{
        Point{0.0, 0.0}, Point{0.5 * ta * tb, 0.5 * ta * tb},
        Point{ta, ta * (tb - 1.0)}, Point{ta, 0.0}});
  }

  Residual res;
  double total = 0.0;
  std::size_t used = 0;
  for (const Point& p : sample(dom.polygon, n_samples, rng_seed)) {
    const Point q = change_coords(chart, p, Direction::Forward);
    if (restriction && !restriction->contains(q)) continue;
    const Point lhs =
        change_coords(chart, psi_pow(prm, p, power), Direction::Forward);
    const Point rhs =
        power == 2 ? tent_product_eval(mu, q) : psi_eval(target, q);
    const double err = (lhs - rhs).norm();
    res.sup = std::max(res.sup, err);
    total += err;
    ++used;
  }
  res.mean = used > 0 ? total / static_cast<double>(used) : 0.0;
  return res;
}

double invariance_check(const Params& prm, const NamedDomain& domain,
                        int power, std::size_t n_samples,
                        std::uint64_t rng_seed) {
  if (power < 1) throw OutOfRange("power must be >= 1");
  const bool centered = domain.frame == Frame::Centered;
  ChangeOfCoords phi;
  if (centered) phi = make_chart(ChartKind::PhiCentered, prm);

  const auto defect = [&](const Point& s) {
    Point p = centered ? change_coords(phi, s, Direction::Inverse) : s;
    p = psi_pow(prm, p, power);
    if (centered) p = change_coords(phi, p, Direction::Forward);
    return domain.polygon.outside_distance(p);
  };

  double worst = 0.0;
  // escape slivers can hug a corner and evade area sampling, but they always
  // reach the boundary, so walk the perimeter densely as well
  const auto& vs = domain.polygon.vertices();
  double perimeter = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i)
    perimeter += (vs[(i + 1) % vs.size()] - vs[i]).norm();
  const std::size_t on_boundary = std::max<std::size_t>(n_samples / 4, 16);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const Point& lo = vs[i];
    const Point& hi = vs[(i + 1) % vs.size()];
    const auto count = static_cast<std::size_t>(std::ceil(
        static_cast<double>(on_boundary) * (hi - lo).norm() / perimeter));
    for (std::size_t k = 0; k <= count; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(count);
      worst = std::max(worst, defect(lo + t * (hi - lo)));
    }
  }
  for (const Point& s : sample(domain.polygon, n_samples, rng_seed))
    worst = std::max(worst, defect(s));
  return worst;
}

double capture_check(const Params& prm, const NamedDomain& target,
                     std::size_t n_seeds, long max_iters,
                     std::uint64_t rng_seed) {
  const bool centered = target.frame == Frame::Centered;
  ChangeOfCoords phi;
  if (centered) phi = make_chart(ChartKind::PhiCentered, prm);

  std::size_t captured = 0, counted = 0;
  for (const Point& seed : sample(triangle_domain(), n_seeds, rng_seed)) {
    if (interior_margin(triangle_domain(), seed) < 1e-9) continue;
    ++counted;
    Point p = seed;
    for (long it = 0; it <= max_iters; ++it) {
      const Point q = centered ? change_coords(phi, p, Direction::Forward) : p;
      if (target.polygon.contains(q)) {
        ++captured;
        break;
      }
      if (it < max_iters) p = psi_eval(prm, p);
    }
  }
  return counted > 0 ? static_cast<double>(captured) /
                           static_cast<double>(counted)
                     : 0.0;
}

GenericEBM make_renormalized_delta_ebm(const Params& prm) {
  require_region(RegionTag::PDelta, prm, "renormalized map");
  const double g = gamma_coeff(prm.a, prm.b);
  const double a4 = prm.a * prm.a * prm.a * prm.a;
  Mat2 lin;
  lin << a4, 0.0, 0.0, a4;
  return GenericEBM(triangle_domain(),
                    {Line::normal_offset(1, 0, 1),
                     Line::normal_offset(0, 1, 1.0 / prm.a),
                     Line::normal_offset(1, 1, g / (prm.a * prm.a))},
                    Point{0.0, 0.0}, lin);
}

}  // namespace ebm
