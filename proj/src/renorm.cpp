#include "ebm/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebm/errors.hpp"

namespace ebm {

namespace {

constexpr double kDenTol = 1e-14;
const double kSqrt2 = std::sqrt(2.0);

}  // namespace

double gamma_coeff(double a, double b) {
  const double den = 1.0 + a - a * b;
  if (std::abs(den) < kDenTol)
    throw SingularDenominator("gamma denominator 1 + a - ab vanishes");
  return (a * b + b - 2.0) / den;
}

std::pair<double, double> apply(RenormOp op, double a, double b) {
  const double g = gamma_coeff(a, b);
  const double a4 = a * a * a * a;
  return {a4, op == RenormOp::Delta ? g / (a * a) : g / a};
}

Mat2 jacobian(RenormOp op, double a, double b) {
  const double den = 1.0 + a - a * b;
  if (std::abs(den) < kDenTol)
    throw SingularDenominator("gamma denominator 1 + a - ab vanishes");
  const double g = (a * b + b - 2.0) / den;
  // dg/da = (b^2 - 2b + 2) / den^2, dg/db = (1 + a^2) / den^2.
  const double dg_da = (b * b - 2.0 * b + 2.0) / (den * den);
  const double dg_db = (1.0 + a * a) / (den * den);
  Mat2 m;
  if (op == RenormOp::Delta) {
    const double a2 = a * a;
    m << 4.0 * a * a2, 0.0,  //
        dg_da / a2 - 2.0 * g / (a * a2), dg_db / a2;
  } else {
    m << 4.0 * a * a * a, 0.0,  //
        dg_da / a - g / (a * a), dg_db / a;
  }
  return m;
}

SpectralData spectral(RenormOp op) {
  SpectralData s;
  s.fixed_point = Point{1.0, kSqrt2};
  s.lambda1 = 4.0;
  s.lambda2 = 3.0 + 2.0 * kSqrt2;
  s.v1 = op == RenormOp::Delta ? Point{1.0, (2.0 - 3.0 * kSqrt2) / 7.0}
                               : Point{1.0, -(2.0 + 4.0 * kSqrt2) / 7.0};
  s.v2 = Point{0.0, 1.0};
  return s;
}

std::pair<double, double> fiber_inverse(RenormOp op, double a_target,
                                        double b_target) {
  if (!(a_target >= 1.0 && a_target <= 16.0))
    throw OutOfRange("target first component outside [1, 16]");
  const double a = std::pow(a_target, 0.25);
  const double hi_b = 2.0 / a;
  // Second component along the fiber; +inf past the gamma pole (reached only
  // at the fiber end when a = 1).
  const auto val = [&](double b) {
    const double den = 1.0 + a - a * b;
    if (den < kDenTol) return std::numeric_limits<double>::infinity();
    const double g = (a * b + b - 2.0) / den;
    return op == RenormOp::Delta ? g / (a * a) : g / a;
  };
  const double v_lo = val(1.0);
  const double v_hi = val(hi_b);
  if (b_target < v_lo - 1e-12 || b_target > v_hi + 1e-12)
    throw Unreachable("second component not attained on the fiber");
  double lo = 1.0, hi = hi_b;
  for (int i = 0; i < 60 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (val(mid) < b_target ? lo : hi) = mid;
  }
  return {a, 0.5 * (lo + hi)};
}

int renorm_depth(double a, double b, RenormOp op, int max_n) {
  if (max_n < 0) throw OutOfRange("negative iteration cap");
  int n = 0;
  while (n < max_n && in_p3_closure(a, b)) {
    ++n;
    std::tie(a, b) = apply(op, a, b);
  }
  return n;
}

namespace {

// apply() that never throws: NaN params on overflow or a singular step.
std::pair<double, double> apply_guarded(RenormOp op, double a, double b) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(a) || !std::isfinite(b)) return {nan, nan};
  const double den = 1.0 + a - a * b;
  if (std::abs(den) < kDenTol) return {nan, nan};
  return apply(op, a, b);
}

}  // namespace

std::vector<RenormNode> renorm_tree(double a, double b, int depth) {
  if (depth < 0 || depth > 12) throw OutOfRange("tree depth outside [0, 12]");
  std::vector<RenormNode> nodes;
  nodes.reserve((std::size_t{2} << depth) - 1);
  nodes.push_back({"", a, b, true});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const RenormNode parent = nodes[i];
    if (static_cast<int>(parent.word.size()) >= depth) continue;
    const bool child_valid = parent.valid && in_p3_closure(parent.a, parent.b);
    for (RenormOp op : {RenormOp::Delta, RenormOp::Pi}) {
      const auto [ca, cb] = apply_guarded(op, parent.a, parent.b);
      nodes.push_back(
          {parent.word + (op == RenormOp::Delta ? 'D' : 'P'), ca, cb,
           child_valid});
    }
  }
  return nodes;
}

namespace {

struct CascadeProbe {
  bool ok = false;
  int k = 0;
  int m = 0;
};

// Iterates the operator on the curve point while inside the closed
// renormalizable region, then tests the escape iterate for landing in an
// indexed window with prediction >= 2^n.
CascadeProbe cascade_probe(double t, int n, RenormOp op) {
  auto [a, b] = gamma0(t);
  int k = 0;
  while (in_p3_closure(a, b)) {
    if (++k > 80) return {};  // fixed-point plateau, never escapes
    std::tie(a, b) = apply_guarded(op, a, b);
    if (!std::isfinite(a)) return {};
  }
  const RegionTag band = op == RenormOp::Delta ? RegionTag::P1 : RegionTag::P2;
  if (!in_region({band, 0}, a, b)) return {};
  const std::optional<int> m = window_index(a);
  if (!m || *m < n + 1) return {};  // prediction 2^(m-1) >= 2^n
  return {true, k, *m};
}

}  // namespace

CascadeResult cascade_search(int n, long t_grid, RenormOp op) {
  if (n < 1) throw OutOfRange("cascade index must be >= 1");
  if (t_grid < 1000) throw OutOfRange("grid too coarse (< 1000 points)");
  const double t_min = 1.0 / kSqrt2;
  const double t_max = std::pow(2.0, -0.4);
  const double h = (t_max - t_min) / static_cast<double>(t_grid);

  // Maximal runs of qualifying grid points; keep the widest (first on ties).
  long best_first = 0, best_len = 0;
  long run_first = 0, run_len = 0;
  for (long j = 1; j <= t_grid; ++j) {
    const double t = t_min + h * static_cast<double>(j);
    if (cascade_probe(t, n, op).ok) {
      if (run_len == 0) run_first = j;
      ++run_len;
      if (run_len > best_len) {
        best_first = run_first;
        best_len = run_len;
      }
    } else {
      run_len = 0;
    }
  }
  if (best_len == 0) throw NotFound("no qualifying grid point at this depth");

  // A qualifying grid point certifies its half-open grid cell; a run is the
  // union of its cells, clamped to the scanned interval.
  CascadeResult res;
  res.n = n;
  res.t_lo = t_min + h * (static_cast<double>(best_first) - 0.5);
  res.t_hi = std::min(t_max, t_min + h * (static_cast<double>(best_first) +
                                          static_cast<double>(best_len) - 0.5));
  CascadeProbe mid = cascade_probe(0.5 * (res.t_lo + res.t_hi), n, op);
  if (!mid.ok)  // midpoint fell on sub-grid structure; use a qualifying point
    mid = cascade_probe(t_min + h * static_cast<double>(best_first), n, op);
  res.k = mid.k;
  res.terminal =
      RegionId{op == RenormOp::Delta ? RegionTag::P1n : RegionTag::P2n, mid.m};
  return res;
}

}  // namespace ebm
