#include <doctest.h>

#include <cmath>

#include "ebm/errors.hpp"
#include "ebm/regions.hpp"
#include "ebm/renorm.hpp"
#include "ebm/rng.hpp"

using namespace ebm;

TEST_CASE("rescaled distance coefficient matches frozen values") {
  CHECK(gamma_coeff(1.05, 1.38) ==
        doctest::Approx(1.3793677204658902).epsilon(1e-15));
  // the operator fixed point maps gamma to sqrt 2 exactly
  CHECK(gamma_coeff(1.0, std::sqrt(2.0)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(gamma_coeff(1.5, 5.0 / 3.0), SingularDenominator);
}

TEST_CASE("operators rescale the parameters as (a^4, gamma/a^2) and"
          " (a^4, gamma/a)") {
  const auto [da, db] = apply(RenormOp::Delta, 1.05, 1.38);
  CHECK(da == doctest::Approx(1.21550625).epsilon(1e-15));
  CHECK(db == doctest::Approx(1.2511271840960455).epsilon(1e-15));
  const auto [pa, pb] = apply(RenormOp::Pi, 1.05, 1.38);
  CHECK(pa == doctest::Approx(1.21550625).epsilon(1e-15));
  CHECK(pb == doctest::Approx(1.3136835433008478).epsilon(1e-15));
}

TEST_CASE("the corner point (1, sqrt 2) is fixed by both operators") {
  for (RenormOp op : {RenormOp::Delta, RenormOp::Pi}) {
    const auto [a, b] = apply(op, 1.0, std::sqrt(2.0));
    CHECK(a == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("analytic Jacobian matches central differences") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const double a = rng.uniform(1.01, 1.14);
    const double b = rng.uniform(1.3, 1.44);
    if (std::abs(1.0 + a - a * b) < 1e-3) continue;
    for (RenormOp op : {RenormOp::Delta, RenormOp::Pi}) {
      const Mat2 closed = jacobian(op, a, b);
      const double h = 1e-6;
      for (int col = 0; col < 2; ++col) {
        double ah = a, bh = b, al = a, bl = b;
        (col == 0 ? ah : bh) += h;
        (col == 0 ? al : bl) -= h;
        const auto hi = apply(op, ah, bh);
        const auto lo = apply(op, al, bl);
        CHECK(std::abs((hi.first - lo.first) / (2 * h) - closed(0, col)) <
              1e-6);
        CHECK(std::abs((hi.second - lo.second) / (2 * h) - closed(1, col)) <
              1e-6);
      }
    }
  }
}

TEST_CASE("spectral data pins the eigenstructure at the fixed point") {
  for (RenormOp op : {RenormOp::Delta, RenormOp::Pi}) {
    const SpectralData sp = spectral(op);
    CHECK(sp.fixed_point.x() == 1.0);
    CHECK(sp.fixed_point.y() == doctest::Approx(std::sqrt(2.0)));
    CHECK(sp.lambda1 == doctest::Approx(4.0));
    CHECK(sp.lambda2 == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)));
    // eigenvector residual |J v - lambda v|
    const Mat2 j = jacobian(op, 1.0, std::sqrt(2.0));
    CHECK((j * sp.v1 - sp.lambda1 * sp.v1).norm() < 1e-12);
    CHECK((j * sp.v2 - sp.lambda2 * sp.v2).norm() < 1e-12);
  }
  // second row of the Jacobian differs between the operators
  const Mat2 jd = jacobian(RenormOp::Delta, 1.0, std::sqrt(2.0));
  CHECK(jd(0, 0) == doctest::Approx(4.0));
  CHECK(jd(0, 1) == doctest::Approx(0.0));
  CHECK(jd(1, 0) == doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK(jd(1, 1) == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)));
  const Mat2 jp = jacobian(RenormOp::Pi, 1.0, std::sqrt(2.0));
  CHECK(jp(1, 0) == doctest::Approx(2.0));
  CHECK(jp(1, 1) == doctest::Approx(3.0 + 2.0 * std::sqrt(2.0)));
}

TEST_CASE("fiber inversion round-trips through the operators") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const double a = rng.uniform(1.01, 1.14);
    const auto [blo, bhi] = region_bounds({RegionTag::P3, 0}, a);
    if (blo > bhi) continue;
    const double b = blo + (bhi - blo) * rng.uniform();
    for (RenormOp op : {RenormOp::Delta, RenormOp::Pi}) {
      const auto [ta, tb] = apply(op, a, b);
      const auto [ra, rb] = fiber_inverse(op, ta, tb);
      CHECK(std::abs(ra - a) < 1e-12);
      CHECK(std::abs(rb - b) < 1e-10);
      const auto [fa, fb] = apply(op, ra, rb);
      CHECK(std::abs(fa - ta) < 1e-12);
      CHECK(std::abs(fb - tb) < 1e-10);
    }
  }
}

TEST_CASE("fiber inversion rejects targets outside the fiber image") {
  CHECK_THROWS_AS(fiber_inverse(RenormOp::Delta, 16.0, 3.0), Unreachable);
  CHECK_THROWS_AS(fiber_inverse(RenormOp::Delta, 0.5, 1.2), OutOfRange);
}

TEST_CASE("renormalization depth counts iterates inside the closed band") {
  CHECK(renorm_depth(1.0, std::sqrt(2.0), RenormOp::Delta, 9) == 9);
  CHECK(renorm_depth(1.3, 1.05, RenormOp::Delta, 9) == 0);
  // one application of the operator leaves the band at these parameters
  const int d = renorm_depth(1.05, 1.38, RenormOp::Delta, 9);
  CHECK(d >= 1);
  CHECK(d < 9);
  CHECK_THROWS_AS(renorm_depth(1.05, 1.38, RenormOp::Delta, -1), OutOfRange);
}

TEST_CASE("operator tree is breadth-first over words") {
  const auto nodes = renorm_tree(1.05, 1.38, 2);
  REQUIRE(nodes.size() == 7);
  CHECK(nodes[0].word == "");
  CHECK(nodes[1].word == "D");
  CHECK(nodes[2].word == "P");
  CHECK(nodes[3].word == "DD");
  CHECK(nodes[4].word == "DP");
  CHECK(nodes[5].word == "PD");
  CHECK(nodes[6].word == "PP");
  CHECK(nodes[0].valid);
  CHECK(nodes[1].valid);
  CHECK(nodes[2].valid);
  CHECK(nodes[1].a == doctest::Approx(1.21550625));
  CHECK(nodes[1].b == doctest::Approx(1.2511271840960455));
  CHECK(nodes[2].b == doctest::Approx(1.3136835433008478));
  // grandchildren: (1.2155..) is far outside the band, so the third level
  // carries valid = false
  CHECK(!nodes[3].valid);
  CHECK_THROWS_AS(renorm_tree(1.05, 1.38, 13), OutOfRange);
}

TEST_CASE("tree nodes at the fixed point never leave it") {
  for (const RenormNode& n : renorm_tree(1.0, std::sqrt(2.0), 3)) {
    CHECK(n.valid);
    CHECK(n.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n.b == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("cascade search finds the level-one window near the curve start") {
  const CascadeResult res = cascade_search(1, 20000);
  const double t_min = 1.0 / std::sqrt(2.0);
  const double t_max = std::pow(2.0, -0.4);
  const double h = (t_max - t_min) / 20000.0;
  CHECK(res.n == 1);
  CHECK(res.t_lo > t_min);
  CHECK(res.t_hi <= t_max);
  CHECK(res.t_lo < res.t_hi);
  // the window hugs the lower end of the curve
  CHECK(res.t_hi < t_min + 10.0 * h);
  CHECK(res.k >= 1);
  CHECK(res.terminal.tag == RegionTag::P1n);
  CHECK(res.terminal.n >= 2);
  CHECK(attractor_count_prediction(res.terminal) >= 2);
}

TEST_CASE("cascade search reports absence at coarse resolution") {
  CHECK_THROWS_AS(cascade_search(1, 2000), NotFound);
  CHECK_THROWS_AS(cascade_search(6, 20000), NotFound);
  CHECK_THROWS_AS(cascade_search(0, 20000), OutOfRange);
  CHECK_THROWS_AS(cascade_search(1, 100), OutOfRange);
}
