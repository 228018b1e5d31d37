#include <doctest.h>

#include <cmath>

#include "ebm/errors.hpp"
#include "ebm/maps.hpp"
#include "ebm/rng.hpp"

using namespace ebm;

namespace {
Params sample_canonical(Rng& rng) {
  for (;;) {
    const Params p{rng.uniform(1.0 + 1e-9, 2.0), rng.uniform(1.0, 2.0)};
    if (in_canonical_params(p)) return p;
  }
}
}  // namespace

TEST_CASE("tent map peaks at one and folds the right half") {
  CHECK(tent_eval(1.3, 0.5) == doctest::Approx(0.65));
  CHECK(tent_eval(1.3, 1.0) == doctest::Approx(1.3));
  CHECK(tent_eval(1.3, 1.5) == doctest::Approx(0.65));
  CHECK(tent_eval(1.3, 2.0) == doctest::Approx(0.0));
  CHECK(tent_branch(0.3) == Branch::Left);
  CHECK(tent_branch(1.0) == Branch::Left);
  CHECK(tent_branch(1.0 + 1e-9) == Branch::Right);
  CHECK_THROWS_AS(tent_eval(2.5, 0.5), OutOfRange);
  CHECK_THROWS_AS(tent_eval(1.3, 2.5), OutOfDomain);
}

TEST_CASE("tent square is the invariant box of the product map") {
  const ConvexPolygon sq = tent_square(1.3);
  const Aabb box = sq.bounds();
  CHECK(box.lo.x() == doctest::Approx(1.3 * 0.7));
  CHECK(box.hi.x() == doctest::Approx(1.3));
  Rng rng(7);
  for (const Point& p : sample(sq, 500, 11)) {
    const Point q = tent_product_eval(1.3, p);
    CHECK(sq.contains(q, 1e-9));
  }
  CHECK_THROWS_AS(tent_square(1.0), OutOfRange);
  CHECK_THROWS_AS(tent_square(2.1), OutOfRange);
}

TEST_CASE("two-piece map is continuous across the ridge") {
  for (double t : {0.72, 0.75}) {
    for (double y : {0.0, 0.3, 0.9}) {
      const Point left = lambda_eval(t, {1.0, y});
      const Point right = lambda_eval(t, {1.0 + 1e-13, y});
      CHECK((left - right).norm() < 1e-11);
    }
  }
  CHECK(lambda_branch({0.5, 0.2}) == Branch::T0);
  CHECK(lambda_branch({1.5, 0.2}) == Branch::T1);
}

TEST_CASE("two-piece differentials square to a conformal expansion") {
  const double t = 0.8;
  for (Branch br : {Branch::T0, Branch::T1}) {
    const Mat2 d = lambda_differential(t, br);
    CHECK(std::abs(std::abs(d.determinant()) - 2.0 * t * t) < 1e-15);
    // d^T d = 2 t^2 I: each branch is sqrt(2) t times an orthogonal matrix
    const Mat2 dtd = d.transpose() * d;
    CHECK(dtd(0, 0) == doctest::Approx(2.0 * t * t));
    CHECK(dtd(1, 1) == doctest::Approx(2.0 * t * t));
    CHECK(std::abs(dtd(0, 1)) < 1e-15);
  }
  CHECK_THROWS_AS(lambda_differential(0.8, Branch::Left), OutOfRange);
}

TEST_CASE("four-branch map keeps the triangle invariant") {
  Rng rng(314);
  for (int trial = 0; trial < 40; ++trial) {
    const Params prm = sample_canonical(rng);
    for (const Point& p :
         sample(triangle_domain(), 250, 1000 + static_cast<unsigned>(trial))) {
      const Point q = psi_eval(prm, p);
      CHECK(triangle_domain().contains(q, 1e-9));
    }
  }
}

TEST_CASE("branch selector ties go to the minus branches") {
  const Params prm{1.2, 1.3};
  CHECK(psi_branch(prm, {1.0, 0.2}) == Branch::T0minus);
  CHECK(psi_branch(prm, {0.9, 0.4}) == Branch::T0minus);   // x + y = 1.3 = b
  CHECK(psi_branch(prm, {0.9, 0.5}) == Branch::T0plus);
  CHECK(psi_branch(prm, {1.2, 0.5}) == Branch::T1minus);   // x - y = 0.7 = 2-b
  CHECK(psi_branch(prm, {1.2, 0.6}) == Branch::T1plus);
}

TEST_CASE("four-branch formulas agree along both fold lines") {
  const Params prm{1.15, 1.10};
  const double a = prm.a, b = prm.b;
  // on x + y = b the identity and the fold produce the same image
  const double x = 0.62;  // (x, b - x) with x <= 1
  const Point on_fold{x, b - x};
  const Point img = psi_eval(prm, on_fold);
  CHECK(img.x() == doctest::Approx(a * x));
  CHECK(img.y() == doctest::Approx(a * (b - x)));
  const Point above = psi_eval(prm, {x, b - x + 1e-13});
  CHECK((img - above).norm() < 1e-11);
  // across the vertical critical line
  const Point l = psi_eval(prm, {1.0, 0.05});
  const Point r = psi_eval(prm, {1.0 + 1e-13, 0.05});
  CHECK((l - r).norm() < 1e-11);
}

TEST_CASE("four-branch differentials are the expansion times an orthogonal") {
  const Params prm{1.3, 1.2};
  for (Branch br :
       {Branch::T0minus, Branch::T0plus, Branch::T1minus, Branch::T1plus}) {
    const Mat2 d = psi_differential(prm, br);
    const Mat2 dtd = d.transpose() * d;
    CHECK(dtd(0, 0) == doctest::Approx(prm.a * prm.a));
    CHECK(dtd(1, 1) == doctest::Approx(prm.a * prm.a));
    CHECK(std::abs(dtd(0, 1)) < 1e-15);
  }
  CHECK_THROWS_AS(psi_differential(prm, Branch::T0), OutOfRange);
}

TEST_CASE("differential matches a finite difference inside each branch") {
  const Params prm{1.2, 1.25};
  const double h = 1e-7;
  for (const Point& p : {Point{0.5, 0.2}, Point{0.9, 0.8}, Point{1.5, 0.1},
                         Point{1.1, 0.85}}) {
    const Mat2 d = psi_differential(prm, psi_branch(prm, p));
    for (int col = 0; col < 2; ++col) {
      Point hi = p, lo = p;
      hi[col] += h;
      lo[col] -= h;
      const Point diff = (psi_eval(prm, hi) - psi_eval(prm, lo)) / (2.0 * h);
      CHECK(std::abs(diff.x() - d(0, col)) < 1e-8);
      CHECK(std::abs(diff.y() - d(1, col)) < 1e-8);
    }
  }
}

TEST_CASE("fold-and-stretch composition reproduces the four-branch map") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const Params prm = sample_canonical(rng);
    const GenericEBM ebm = make_psi_ebm(prm);
    for (const Point& p :
         sample(triangle_domain(), 400, 5000 + static_cast<unsigned>(trial))) {
      CHECK((ebm.eval(p) - psi_eval(prm, p)).norm() < 1e-12);
    }
  }
}

TEST_CASE("fold-and-stretch composition reproduces the two-piece map") {
  for (double t : {0.72, 0.9, 1.0}) {
    const GenericEBM ebm = make_lambda_ebm(t);
    for (const Point& p : sample(triangle_domain(), 400, 77)) {
      CHECK((ebm.eval(p) - lambda_eval(t, p)).norm() < 1e-12);
    }
  }
}

TEST_CASE("construction rejects non-expanding linear parts") {
  Mat2 small;
  small << 0.9, 0.0, 0.0, 1.1;  // |det| = 0.99
  CHECK_THROWS_AS(GenericEBM(triangle_domain(), {}, {0.5, 0.2}, small),
                  OutOfRange);
}

TEST_CASE("construction rejects anchors outside or on a fold line") {
  Mat2 lin;
  lin << 1.1, 0.0, 0.0, 1.1;
  CHECK_THROWS_AS(
      GenericEBM(triangle_domain(), {}, Point{3.0, 0.0}, lin), OutOfDomain);
  CHECK_THROWS_AS(GenericEBM(triangle_domain(),
                             {Line::normal_offset(1, 0, 1)}, Point{1.0, 0.3},
                             lin),
                  AnchorOnLine);
}

TEST_CASE("a fold that does not land inside the kept part is rejected") {
  Mat2 lin;
  lin << 1.1, 0.0, 0.0, 1.1;
  // folding across x + y = 0.5 reflects most of the triangle far outside the
  // kept corner
  CHECK_THROWS_AS(GenericEBM(triangle_domain(),
                             {Line::normal_offset(1, 1, 0.5)},
                             Point{0.1, 0.05}, lin),
                  BadFold);
}

TEST_CASE("an affine image leaving the domain is rejected") {
  Mat2 lin;
  lin << 3.0, 0.0, 0.0, 3.0;
  CHECK_THROWS_AS(GenericEBM(triangle_domain(), {}, Point{0.0, 0.0}, lin),
                  ImageEscapesDomain);
}

TEST_CASE("canonical parameter set boundaries") {
  CHECK(in_canonical_params({1.5, 1.0}));
  CHECK(in_canonical_params({2.0, 1.0}));
  CHECK(!in_canonical_params({1.0, 1.5}));   // a must exceed 1
  CHECK(!in_canonical_params({1.5, 1.5}));   // ab > 2
  CHECK(!in_canonical_params({1.2, 0.99}));  // b below 1
  CHECK_THROWS_AS(make_psi_ebm({1.0, 1.5}), OutOfRange);
}
