#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "ebm/geometry.hpp"
#include "ebm/maps.hpp"
#include "ebm/types.hpp"

namespace ebm {

struct FixedPointData {
  Point p;
  // Auxiliary constants of the conjugacy active at the parameters: for the
  // first rectangle region x2 = 2a/(1+a), d = (2a+b-2)/a; for the second
  // x2 = ab/(1+a), d = (ab-1)/a. NaN when neither applies.
  double x2 = 0.0;
  double d = 0.0;
};

// Fixed point ((ab+2a^2-a^2 b)/(1+a^2), (ab-2a+a^2 b)/(1+a^2)).
FixedPointData psi_fixed_point(const Params& prm);

enum class ChartKind { OmegaP1, TauP2, PhiCentered, PhiTildeDelta, PhiHatPi };

// Affine chart stored as explicit forward/inverse pairs.
struct ChangeOfCoords {
  ChartKind kind;
  Mat2 fwd_m;
  Point fwd_o;
  Mat2 inv_m;
  Point inv_o;
};

enum class Direction { Forward, Inverse };

// Builds the chart for the given parameters.
// Throws SingularChange when a chart denominator vanishes (within 1e-14).
ChangeOfCoords make_chart(ChartKind kind, const Params& prm);

Point change_coords(const ChangeOfCoords& c, const Point& p, Direction dir);

enum class DomainName { R1, RectP1, RectP2, Delta, Pi, DeltaTilde };
enum class Frame { Original, Centered };

struct NamedDomain {
  DomainName name;
  ConvexPolygon polygon;  // in the requested frame
  Frame frame;
};

// Polygonal domain from the closed-form vertices. RectP1 requires the first
// coexistence region, RectP2 the second, DeltaTilde the doubly-renormalizable
// region; the rest need only the base parameter set. Centered-frame requests
// return the polygon in fixed-point-centered coordinates.
// Throws RegionMismatch naming the violated predicate.
NamedDomain named_domain(DomainName name, const Params& prm,
                         Frame frame = Frame::Original);

// Labeled construction points (original frame): the critical-line chain
// C, D, E, F, K, N, G, their forward images C1, D1, E1, F1, F2, F3, K1, G1,
// D2, D3, N1, and the preimages Fm1, Km1, Dm1, Nm1.
std::map<std::string, Point> named_points(const Params& prm);

// Labeled points of the centered-frame constructions (P is the origin):
// Pprime, Q, M, H1, H, K, Ht, Kt, J, Ht1..Ht5, Kt2..Kt4, J1..J4, M1..M4,
// Q1, H2, K2.
std::map<std::string, Point> named_points_centered(const Params& prm);

enum class ConjugacyKind { P1_square, P2_square, Delta_quad, Pi_quad };

struct Residual {
  double sup = 0.0;
  double mean = 0.0;
};

// Samples the matching domain and measures the conjugacy defect:
//   square kinds: |chart(Psi^2 p) - Gamma_{a^2}(chart p)| on the rectangle,
//   quad kinds:   |chart(Psi^4 p) - Psi_{H(a,b)}(chart p)| on DeltaTilde/Pi.
// Throws RegionMismatch when prm violates the kind's region.
Residual conjugacy_residual(ConjugacyKind kind, const Params& prm,
                            std::size_t n_samples, std::uint64_t rng_seed);

// Max over samples of the distance Psi^power(p) ends up outside the domain
// polygon, measured in the domain's own frame (centered for Delta/Pi/
// DeltaTilde, where the domain has unit scale). Probes interior samples plus
// a dense perimeter walk, since escape slivers concentrate at corners.
double invariance_check(const Params& prm, const NamedDomain& domain,
                        int power, std::size_t n_samples,
                        std::uint64_t rng_seed = 20240901ull);

// Fraction of interior seeds whose orbit enters the target within max_iters.
// Seeds within 1e-9 of the triangle boundary are skipped.
double capture_check(const Params& prm, const NamedDomain& target,
                     std::size_t n_seeds, long max_iters,
                     std::uint64_t rng_seed = 20240902ull);

// Three-fold expanding map on the triangle (folds {x=1}, {y=1/a},
// {x+y=b'}, matrix a^4 Id with b' = gamma/a^2): the centered-chart conjugate
// of the fourth power on the Delta domain.
GenericEBM make_renormalized_delta_ebm(const Params& prm);

}  // namespace ebm
