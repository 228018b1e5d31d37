#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ebm/regions.hpp"
#include "ebm/types.hpp"

namespace ebm {

enum class RenormOp { Delta, Pi };

struct SpectralData {
  Point fixed_point;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Point v1;
  Point v2;
};

struct RenormNode {
  std::string word;  // over {'D', 'P'}; empty at the root
  double a = 0.0;
  double b = 0.0;
  bool valid = false;  // parent params were in the renormalizable region
};

struct CascadeResult {
  int n = 0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int k = 0;            // operator applications used at the interval midpoint
  RegionId terminal;    // P1n(m) (or P2n(m)) the escape iterate landed in
};

// gamma coefficient (ab + b - 2) / (-ab + a + 1).
// Throws SingularDenominator when |1 + a - ab| < 1e-14.
double gamma_coeff(double a, double b);

// (a^4, gamma/a^2) for Delta, (a^4, gamma/a) for Pi.
std::pair<double, double> apply(RenormOp op, double a, double b);

// Analytic Jacobian of apply at (a, b).
Mat2 jacobian(RenormOp op, double a, double b);

// Fixed point (1, sqrt 2), eigenvalues {4, 3 + 2 sqrt 2}, eigenvectors.
SpectralData spectral(RenormOp op);

// Inverse along the vertical fiber: returns (a, b) with a = a_target^(1/4)
// and apply(op, a, b) = (a_target, b_target) to 1e-12, by bisection in b over
// [1, 2/a]. Throws Unreachable when b_target is outside the fiber image.
std::pair<double, double> fiber_inverse(RenormOp op, double a_target,
                                        double b_target);

// Largest n <= max_n such that the first n iterates (including the start)
// stay in the closed renormalizable region.
int renorm_depth(double a, double b, RenormOp op, int max_n);

// Full binary tree of operator words up to the given depth (<= 12), breadth
// first; child params are apply(op, parent), valid iff the parent was valid
// and inside the closed renormalizable region.
std::vector<RenormNode> renorm_tree(double a, double b, int depth);

// Scans t over (1/sqrt 2, 2^(-2/5)] on a uniform grid of t_grid points; a
// point qualifies when the orbit of the curve point under the Delta operator,
// iterated while inside the closed renormalizable region, escapes into a
// window with predicted attractor count >= 2^n. Returns the widest maximal
// run of qualifying grid points as the union of their grid cells. Throws
// NotFound when no grid point qualifies.
CascadeResult cascade_search(int n, long t_grid, RenormOp op = RenormOp::Delta);

}  // namespace ebm
