#pragma once

#include <Eigen/Dense>

namespace ebm {

using Point = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Geometric membership/degeneracy tolerance. All map formulas are low-degree
// polynomials on coordinates of magnitude <= 2, so binary64 keeps relative
// error far below this.
inline constexpr double kGeomTol = 1e-12;

// Orbit boundary drift allowance: points may be snapped back onto the domain
// by at most this much before an orbit is declared to have escaped.
inline constexpr double kSnapTol = 1e-9;

// Parameter pair (a, b) of the two-parameter triangle family. The canonical
// parameter set is 1 < a <= 2, 1 <= b <= 2, ab <= 2.
struct Params {
  double a = 1.0;
  double b = 1.0;
};

inline bool in_canonical_params(const Params& p) {
  return p.a > 1.0 && p.a <= 2.0 && p.b >= 1.0 && p.b <= 2.0 && p.a * p.b <= 2.0;
}

}  // namespace ebm
