#pragma once

#include <stdexcept>
#include <string>

namespace ebm {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A point lies outside the relevant domain (beyond snap tolerance).
struct OutOfDomain : Error {
  using Error::Error;
};

// A scalar argument lies outside its admissible interval.
struct OutOfRange : Error {
  using Error::Error;
};

// Fold anchor lies on the fold line.
struct AnchorOnLine : Error {
  using Error::Error;
};

// Polygon has no interior.
struct DegenerateDomain : Error {
  using Error::Error;
};

// An expanding-map image left its declared domain by more than tolerance.
struct ImageEscapesDomain : Error {
  using Error::Error;
};

// A fold in an expanding-map construction is not a good fold.
struct BadFold : Error {
  using Error::Error;
};

// Rational expression denominator vanished.
struct SingularDenominator : Error {
  using Error::Error;
};

// A coordinate change is singular at the given parameters.
struct SingularChange : Error {
  using Error::Error;
};

// Monotone fiber inversion target is outside the attained interval.
struct Unreachable : Error {
  using Error::Error;
};

// A search legitimately found nothing (reported, not fatal).
struct NotFound : Error {
  using Error::Error;
};

// Parameters violate the region premise of the requested construction.
struct RegionMismatch : Error {
  using Error::Error;
};

// Region id not supported by the requested operation.
struct UnsupportedRegion : Error {
  using Error::Error;
};

// An orbit degenerated (repeated exact critical-line hits).
struct DegenerateOrbit : Error {
  using Error::Error;
};

// A census/probe was asked to work on an empty occupancy set.
struct EmptyAttractor : Error {
  using Error::Error;
};

}  // namespace ebm
