#pragma once

#include <vector>

#include "ebm/geometry.hpp"
#include "ebm/types.hpp"

namespace ebm {

// Branch labels across all map families.
enum class Branch {
  T0minus,  // x <= 1, x + y <= b
  T0plus,   // x <= 1, x + y >  b
  T1minus,  // x >  1, x - y >= 2 - b
  T1plus,   // x >  1, x - y <  2 - b
  T0,       // x <= 1 (two-piece triangle map)
  T1,       // x >  1
  Left,     // x <= 1 (tent)
  Right,    // x >  1
};

// The invariant triangle with vertices (0,0), (2,0), (1,1).
const ConvexPolygon& triangle_domain();

// Square [mu(2-mu), mu]^2, the invariant box of the tent product.
ConvexPolygon tent_square(double mu);

// --- tent family ------------------------------------------------------------

// lambda_mu on [0,2]: mu*x for x <= 1, mu*(2-x) otherwise. mu in [0,2].
double tent_eval(double mu, double x);

// Componentwise tent map on [0,2]^2.
Point tent_product_eval(double mu, const Point& p);
Branch tent_branch(double x);

// --- two-piece triangle family ----------------------------------------------

// (t(x+y), t(x-y)) for x <= 1, (t(2-x+y), t(2-x-y)) for x > 1; p in the
// triangle domain (tolerance kGeomTol). Expanding iff t > 1/sqrt(2).
Point lambda_eval(double t, const Point& p);
Branch lambda_branch(const Point& p);
Mat2 lambda_differential(double t, Branch br);

// --- four-branch triangle family --------------------------------------------

Branch psi_branch(const Params& prm, const Point& p);
Point psi_eval(const Params& prm, const Point& p);
// Constant differential of the given branch; every branch is a times an
// orthogonal matrix.
Mat2 psi_differential(const Params& prm, Branch br);

// --- generic expanding fold-and-stretch map ----------------------------------

// Composition of good folds followed by an expanding affine map anchored at a
// point of the domain. Construction validates: |det(linear)| > 1, anchor
// inside the domain and off every fold line, each fold good for the region
// folded so far (vertex check on the clipped part plus sampled points), and
// the final affine image inside the domain.
class GenericEBM {
 public:
  GenericEBM(ConvexPolygon domain, std::vector<Line> fold_lines, Point anchor,
             Mat2 linear);

  // Folds in order, then applies anchor + linear * (q - anchor).
  // Throws OutOfDomain (input) or ImageEscapesDomain (output drifted out).
  Point eval(const Point& p) const;

  const ConvexPolygon& domain() const { return domain_; }
  const std::vector<Line>& fold_lines() const { return folds_; }
  const Point& anchor() const { return anchor_; }
  const Mat2& linear() const { return linear_; }

 private:
  ConvexPolygon domain_;
  std::vector<Line> folds_;
  Point anchor_;
  Mat2 linear_;
};

// The four-branch family as a two-fold EBM on the triangle: fold lines
// {x = 1} and {x + y = b}, anchor at the origin, matrix a * Id.
GenericEBM make_psi_ebm(const Params& prm);

// The two-piece family as a one-fold EBM: fold {x = 1}, matrix [[t,t],[t,-t]].
GenericEBM make_lambda_ebm(double t);

}  // namespace ebm
