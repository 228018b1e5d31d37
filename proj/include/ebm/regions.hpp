#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "ebm/types.hpp"

namespace ebm {

// Parameter-plane regions. P1n/P2n carry a window index n >= 1.
enum class RegionTag {
  P,
  P1,
  P2,
  PDelta,
  P3,
  P1n,
  P2n,
  HDeltaImageP3,
  HPiImageP3,
};

struct RegionId {
  RegionTag tag = RegionTag::P;
  int n = 0;  // window index, only for P1n/P2n
};

std::string region_name(const RegionId& r);

// Membership with the inequalities exactly as the region definitions state
// them (strict a > 1 in P; inclusive elsewhere).
bool in_region(const RegionId& r, double a, double b);

// The b-interval of the region's vertical fiber at a, clamped to the base
// parameter constraints (b >= 1, ab <= 2). May be empty (lower > upper).
// Throws OutOfRange when a is outside (1, 2].
std::pair<double, double> region_bounds(const RegionId& r, double a);

// Window index m >= 1 with a in (2^(1/2^(m+1)), 2^(1/2^m)], if any.
std::optional<int> window_index(double a);

// Curve t -> (16 t^8, 1/(2 t^3)) on [1/sqrt(2), 2^(-2/5)].
std::pair<double, double> gamma0(double t);

// Predicted coexisting-attractor count 2^(n-1) for P1n/P2n.
// Throws UnsupportedRegion otherwise.
long attractor_count_prediction(const RegionId& r);

// Closure-inclusive membership in P3 (a >= 1 etc., tolerance kGeomTol); used
// by renormalization-depth semantics so the fixed parameter point (1, sqrt 2)
// counts as never leaving.
bool in_p3_closure(double a, double b);

struct RegionReport {
  double a = 0.0;
  double b = 0.0;
  std::map<std::string, bool> memberships;
  std::optional<int> p1_window;  // P1n index when inside P1 and a windowed
  std::optional<int> p2_window;
  std::map<std::string, std::pair<double, double>> boundary_b;
  bool p3_boundary_exact = false;  // |a^3 gamma - 2| <= tolerance
};

RegionReport region_report(double a, double b);

}  // namespace ebm
