#include "ebm/regions.hpp"

#include <cmath>
#include <limits>

#include "ebm/errors.hpp"

namespace ebm {

namespace {

const double kAmaxP3 = std::pow(2.0, 0.2);
const double kAmaxImage = std::pow(2.0, 0.8);

// gamma coefficient, NaN instead of throwing when the denominator vanishes.
double gamma_or_nan(double a, double b) {
  const double den = 1.0 + a - a * b;
  if (std::abs(den) <= kGeomTol) return std::numeric_limits<double>::quiet_NaN();
  return (a * b + b - 2.0) / den;
}

double p1_upper(double a) { return 2.0 * (1.0 + a) / (a * (2.0 + a)); }
double p2_lower(double a) { return (2.0 + a) / (1.0 + a); }
double pdelta_lower(double a) {
  return (2.0 + a * a + a * a * a) / (1.0 + a + a * a * a);
}
double pdelta_upper(double a) {
  return 2.0 * (1.0 + a + a * a) / (a * (2.0 + a + a * a));
}
// b-solutions of gamma = a^2 and a^3 gamma = 2 (gamma is increasing in b).
double p3_lower(double a) { return pdelta_lower(a); }
double p3_upper(double a) {
  const double a3 = a * a * a;
  return 2.0 * (1.0 + a + a3) / (a * (2.0 + a * a + a3));
}

bool in_base(double a, double b) {
  return a > 1.0 && a <= 2.0 && b >= 1.0 && b <= 2.0 && a * b <= 2.0;
}

constexpr std::pair<double, double> kEmptyFiber{1.0, 0.0};

}  // namespace

std::string region_name(const RegionId& r) {
  switch (r.tag) {
    case RegionTag::P:
      return "P";
    case RegionTag::P1:
      return "P1";
    case RegionTag::P2:
      return "P2";
    case RegionTag::PDelta:
      return "PDelta";
    case RegionTag::P3:
      return "P3";
    case RegionTag::P1n:
      return "P1," + std::to_string(r.n);
    case RegionTag::P2n:
      return "P2," + std::to_string(r.n);
    case RegionTag::HDeltaImageP3:
      return "HDelta(P3)";
    case RegionTag::HPiImageP3:
      return "HPi(P3)";
  }
  throw Unreachable("unknown region tag");
}

bool in_region(const RegionId& r, double a, double b) {
  switch (r.tag) {
    case RegionTag::P:
      return in_base(a, b);
    case RegionTag::P1:
      return in_base(a, b) && b <= p1_upper(a);
    case RegionTag::P2:
      return in_base(a, b) && b >= p2_lower(a);
    case RegionTag::PDelta:
      return in_base(a, b) && b >= pdelta_lower(a) && b <= pdelta_upper(a);
    case RegionTag::P3: {
      if (!(a > 1.0 && a <= kAmaxP3)) return false;
      const double g = gamma_or_nan(a, b);
      return std::isfinite(g) && g >= a * a && a * a * a * g <= 2.0;
    }
    case RegionTag::P1n:
      return in_region({RegionTag::P1, 0}, a, b) && window_index(a) == r.n;
    case RegionTag::P2n:
      return in_region({RegionTag::P2, 0}, a, b) && window_index(a) == r.n;
    case RegionTag::HDeltaImageP3:
      return a > 1.0 && a <= kAmaxImage && b >= 1.0 &&
             b <= 2.0 * std::pow(a, -1.25);
    case RegionTag::HPiImageP3:
      return a > 1.0 && a <= kAmaxImage && b >= std::pow(a, 0.25) &&
             a * b <= 2.0;
  }
  throw Unreachable("unknown region tag");
}

std::pair<double, double> region_bounds(const RegionId& r, double a) {
  if (!(a > 1.0 && a <= 2.0)) throw OutOfRange("a outside (1, 2]");
  const double cap = 2.0 / a;  // ab <= 2 (also implies b <= 2 here)
  switch (r.tag) {
    case RegionTag::P:
      return {1.0, cap};
    case RegionTag::P1:
      return {1.0, std::min(cap, p1_upper(a))};
    case RegionTag::P2:
      return {std::max(1.0, p2_lower(a)), cap};
    case RegionTag::PDelta:
      return {std::max(1.0, pdelta_lower(a)), std::min(cap, pdelta_upper(a))};
    case RegionTag::P3:
      if (a > kAmaxP3) return kEmptyFiber;
      return {std::max(1.0, p3_lower(a)), std::min(cap, p3_upper(a))};
    case RegionTag::P1n:
      if (window_index(a) != r.n) return kEmptyFiber;
      return region_bounds({RegionTag::P1, 0}, a);
    case RegionTag::P2n:
      if (window_index(a) != r.n) return kEmptyFiber;
      return region_bounds({RegionTag::P2, 0}, a);
    case RegionTag::HDeltaImageP3:
      if (a > kAmaxImage) return kEmptyFiber;
      return {1.0, std::min(cap, 2.0 * std::pow(a, -1.25))};
    case RegionTag::HPiImageP3:
      if (a > kAmaxImage) return kEmptyFiber;
      return {std::pow(a, 0.25), cap};
  }
  throw Unreachable("unknown region tag");
}

std::optional<int> window_index(double a) {
  if (!(a > 1.0 && a <= 2.0)) return std::nullopt;
  for (int m = 1; m <= 60; ++m) {
    const double hi = std::pow(2.0, 1.0 / std::pow(2.0, m));
    const double lo = std::pow(2.0, 1.0 / std::pow(2.0, m + 1));
    if (a > hi) return std::nullopt;  // windows shrink toward 1
    if (a > lo) return m;
  }
  return std::nullopt;
}

std::pair<double, double> gamma0(double t) {
  const double t_lo = 1.0 / std::sqrt(2.0);
  const double t_hi = std::pow(2.0, -0.4);
  if (t < t_lo - kGeomTol || t > t_hi + kGeomTol)
    throw OutOfRange("curve parameter outside [2^-1/2, 2^-2/5]");
  const double t2 = t * t;
  const double t4 = t2 * t2;
  return {16.0 * t4 * t4, 0.5 / (t2 * t)};
}

long attractor_count_prediction(const RegionId& r) {
  if ((r.tag != RegionTag::P1n && r.tag != RegionTag::P2n) || r.n < 1)
    throw UnsupportedRegion("prediction defined on indexed windows only");
  return 1L << (r.n - 1);
}

bool in_p3_closure(double a, double b) {
  if (a < 1.0 - kGeomTol || a > kAmaxP3 + kGeomTol) return false;
  const double den = 1.0 + a - a * b;
  if (den <= kGeomTol) return false;
  const double g = (a * b + b - 2.0) / den;
  return g >= a * a - kGeomTol && a * a * a * g <= 2.0 + kGeomTol;
}

RegionReport region_report(double a, double b) {
  RegionReport rep;
  rep.a = a;
  rep.b = b;
  const RegionTag plain[] = {RegionTag::P,      RegionTag::P1,
                             RegionTag::P2,     RegionTag::PDelta,
                             RegionTag::P3,     RegionTag::HDeltaImageP3,
                             RegionTag::HPiImageP3};
  for (RegionTag tag : plain) {
    const RegionId id{tag, 0};
    rep.memberships[region_name(id)] = in_region(id, a, b);
    if (a > 1.0 && a <= 2.0) {
      const auto [blo, bhi] = region_bounds(id, a);
      if (blo <= bhi) rep.boundary_b[region_name(id)] = {blo, bhi};
    }
  }
  const std::optional<int> w = window_index(a);
  if (w && rep.memberships["P1"]) rep.p1_window = w;
  if (w && rep.memberships["P2"]) rep.p2_window = w;
  const double g = gamma_or_nan(a, b);
  rep.p3_boundary_exact =
      std::isfinite(g) && std::abs(a * a * a * g - 2.0) <= kGeomTol;
  return rep;
}

}  // namespace ebm
