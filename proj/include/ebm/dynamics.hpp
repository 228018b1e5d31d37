#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ebm/geometry.hpp"
#include "ebm/maps.hpp"
#include "ebm/types.hpp"

namespace ebm {

// Type-erased piecewise-affine map with a polygonal domain and per-point
// branch differential.
struct PiecewiseMap {
  std::string name;
  ConvexPolygon domain;
  std::function<Point(const Point&)> eval;
  std::function<Mat2(const Point&)> diff;
  // True when p lies on a branch boundary (used for deterministic nudging).
  std::function<bool(const Point&)> on_critical_line;
};

PiecewiseMap map_psi(const Params& prm);
PiecewiseMap map_gamma(double mu);
PiecewiseMap map_lambda(double t);

struct OrbitSpec {
  PiecewiseMap map;
  Point x0;
  long burn_in = 0;
  long length = 1;
};

// Runs the orbit, snapping small boundary drift back onto the domain.
// Visits the post-burn-in points in order (length of them). Critical-line
// hits are nudged toward the domain centroid by 1e-13 and counted.
// Throws OutOfDomain when a point drifts further than the snap tolerance.
long orbit_visit(const OrbitSpec& spec,
                 const std::function<void(const Point&)>& visit);

std::vector<Point> run_orbit(const OrbitSpec& spec);

struct LyapunovEstimate {
  double lambda1 = 0.0;  // larger
  double lambda2 = 0.0;
};

// QR-accumulated exponents along the orbit (natural log, per iterate).
LyapunovEstimate lyapunov(const OrbitSpec& spec);

struct OccupancyGrid {
  Aabb bounds;
  int resolution = 0;  // cells per axis
  std::vector<std::uint64_t> cells;  // row-major bitset, resolution^2 bits

  bool get(int cx, int cy) const;
  void set(int cx, int cy);
  std::size_t popcount() const;
  bool intersects(const OccupancyGrid& other) const;
  OccupancyGrid dilated() const;  // by one cell, 8-neighborhood
  void unite(const OccupancyGrid& other);
};

struct AttractorInfo {
  OccupancyGrid occupancy;
  int pieces = 0;
  int seed_count = 0;
};

struct AttractorCensus {
  std::vector<AttractorInfo> attractors;
  int distinct_count = 0;
  long critical_hits = 0;
};

// Occupancy-clustering census: per-seed post-burn-in occupancy grids over the
// common visited bounding box; seeds sharing a cell after one-cell dilation
// are merged; pieces are 8-neighbor components. Deterministic in rng_seed;
// seeds run in parallel, merge order is by seed index.
AttractorCensus attractor_census(const PiecewiseMap& map, int n_seeds,
                                 long orbit_len, long burn_in, int resolution,
                                 std::uint64_t rng_seed);

// Default census parameters (desk scale, resolves up to 8 attractors).
inline constexpr int kCensusSeeds = 64;
inline constexpr long kCensusOrbitLen = 1000000;
inline constexpr long kCensusBurnIn = 10000;
inline constexpr int kCensusResolution = 512;
inline constexpr std::uint64_t kCensusDefaultSeed = 1;

// Fraction of the attractor's occupied cells hit by the forward images of
// 10^3 disc samples, cumulatively over 0..steps iterations.
// Throws EmptyAttractor when the grid has no occupied cells.
double mixing_probe(const PiecewiseMap& map, const OccupancyGrid& attractor,
                    const Point& disc_center, double disc_radius, int steps);

struct DomainResidual {
  std::string domain;
  double sup = 0.0;
  double mean = 0.0;
};

// Compares the eighth power of the two-piece map against the four-branch map
// at (16 t^8, 1/(2 t^3)) on each candidate domain that exists at those
// parameters (always the full triangle; the invariant rectangles and the
// Delta/Pi triangles when defined). Purely exploratory measurement.
std::vector<DomainResidual> lambda_psi_residual(double t,
                                                std::size_t n_samples,
                                                std::uint64_t rng_seed);

}  // namespace ebm
