#include "ebm/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

#include "ebm/conjugacy.hpp"
#include "ebm/errors.hpp"
#include "ebm/regions.hpp"
#include "ebm/rng.hpp"

namespace ebm {

namespace {

constexpr double kNudge = 1e-13;

int thread_count() {
  if (const char* env = std::getenv("EBM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(0..n-1) on a small worker pool; rethrows the first failure.
void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      int i;
      while (!failed.load(std::memory_order_relaxed) &&
             (i = next.fetch_add(1)) < n) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

Point snap_into(const ConvexPolygon& dom, const Point& p, const char* what) {
  const double od = dom.outside_distance(p);
  if (od > kSnapTol) throw OutOfDomain(what);
  return od > 0.0 ? dom.project(p) : p;
}

void check_orbit_spec(const OrbitSpec& spec) {
  if (spec.burn_in < 0) throw OutOfRange("burn-in must be >= 0");
  if (spec.length < 1) throw OutOfRange("orbit length must be >= 1");
}

int cell_of(double v, double lo, double hi, int res) {
  const int c = static_cast<int>((v - lo) / (hi - lo) * res);
  return std::clamp(c, 0, res - 1);
}

std::size_t bit_words(int resolution) {
  const std::size_t bits =
      static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  return (bits + 63) / 64;
}

}  // namespace

PiecewiseMap map_psi(const Params& prm) {
  if (!in_canonical_params(prm))
    throw OutOfRange("parameters outside the canonical set");
  return PiecewiseMap{
      "psi", triangle_domain(),
      [prm](const Point& p) { return psi_eval(prm, p); },
      [prm](const Point& p) {
        return psi_differential(prm, psi_branch(prm, p));
      },
      [b = prm.b](const Point& p) {
        return std::abs(p.x() - 1.0) < kGeomTol ||
               std::abs(p.x() + p.y() - b) < kGeomTol;
      }};
}

PiecewiseMap map_gamma(double mu) {
  return PiecewiseMap{
      "gamma", tent_square(mu),
      [mu](const Point& p) { return tent_product_eval(mu, p); },
      [mu](const Point& p) {
        Mat2 d;
        d << (p.x() <= 1.0 ? mu : -mu), 0.0, 0.0, (p.y() <= 1.0 ? mu : -mu);
        return d;
      },
      [](const Point& p) {
        return std::abs(p.x() - 1.0) < kGeomTol ||
               std::abs(p.y() - 1.0) < kGeomTol;
      }};
}

PiecewiseMap map_lambda(double t) {
  if (!(t > 1.0 / std::sqrt(2.0)) || t > 1.0)
    throw OutOfRange(
        "two-piece slope must lie in (1/sqrt(2), 1] to expand and keep the "
        "triangle");
  return PiecewiseMap{
      "lambda", triangle_domain(),
      [t](const Point& p) { return lambda_eval(t, p); },
      [t](const Point& p) { return lambda_differential(t, lambda_branch(p)); },
      [](const Point& p) { return std::abs(p.x() - 1.0) < kGeomTol; }};
}

long orbit_visit(const OrbitSpec& spec,
                 const std::function<void(const Point&)>& visit) {
  check_orbit_spec(spec);
  const ConvexPolygon& dom = spec.map.domain;
  const Point center = dom.centroid();
  Point p = snap_into(dom, spec.x0, "orbit start outside the domain");
  long hits = 0;
  const long total = spec.burn_in + spec.length;
  for (long i = 0; i < total; ++i) {
    if (spec.map.on_critical_line(p)) {
      ++hits;
      p = (1.0 - kNudge) * p + kNudge * center;
    }
    p = snap_into(dom, spec.map.eval(p), "orbit left the domain");
    if (i >= spec.burn_in) visit(p);
  }
  return hits;
}

std::vector<Point> run_orbit(const OrbitSpec& spec) {
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(spec.length));
  orbit_visit(spec, [&pts](const Point& p) { pts.push_back(p); });
  return pts;
}

LyapunovEstimate lyapunov(const OrbitSpec& spec) {
  check_orbit_spec(spec);
  const ConvexPolygon& dom = spec.map.domain;
  const Point center = dom.centroid();
  Point p = snap_into(dom, spec.x0, "orbit start outside the domain");
  Mat2 q = Mat2::Identity();
  double s1 = 0.0, s2 = 0.0;
  const long total = spec.burn_in + spec.length;
  for (long i = 0; i < total; ++i) {
    if (spec.map.on_critical_line(p))
      p = (1.0 - kNudge) * p + kNudge * center;
    if (i >= spec.burn_in) {
      // One Gram-Schmidt sweep per step keeps the frame orthonormal and
      // accumulates the diagonal stretches.
      const Mat2 m = spec.map.diff(p) * q;
      const double n0 = m.col(0).norm();
      const Eigen::Vector2d u0 = m.col(0) / n0;
      const Eigen::Vector2d c1 = m.col(1) - u0.dot(m.col(1)) * u0;
      const double n1 = c1.norm();
      if (n0 < kGeomTol || n1 < kGeomTol)
        throw DegenerateOrbit("branch differential collapsed a direction");
      q.col(0) = u0;
      q.col(1) = c1 / n1;
      s1 += std::log(n0);
      s2 += std::log(n1);
    }
    p = snap_into(dom, spec.map.eval(p), "orbit left the domain");
  }
  const double len = static_cast<double>(spec.length);
  LyapunovEstimate est{s1 / len, s2 / len};
  if (est.lambda1 < est.lambda2) std::swap(est.lambda1, est.lambda2);
  return est;
}

bool OccupancyGrid::get(int cx, int cy) const {
  const std::size_t bit = static_cast<std::size_t>(cy) * resolution + cx;
  return (cells[bit >> 6] >> (bit & 63)) & 1u;
}

void OccupancyGrid::set(int cx, int cy) {
  const std::size_t bit = static_cast<std::size_t>(cy) * resolution + cx;
  cells[bit >> 6] |= std::uint64_t{1} << (bit & 63);
}

std::size_t OccupancyGrid::popcount() const {
  std::size_t total = 0;
  for (std::uint64_t w : cells) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

bool OccupancyGrid::intersects(const OccupancyGrid& other) const {
  if (resolution != other.resolution)
    throw OutOfRange("occupancy grids have different resolutions");
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i] & other.cells[i]) return true;
  return false;
}

OccupancyGrid OccupancyGrid::dilated() const {
  OccupancyGrid out{bounds, resolution,
                    std::vector<std::uint64_t>(cells.size(), 0)};
  for (int cy = 0; cy < resolution; ++cy)
    for (int cx = 0; cx < resolution; ++cx) {
      if (!get(cx, cy)) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = cx + dx, ny = cy + dy;
          if (nx >= 0 && nx < resolution && ny >= 0 && ny < resolution)
            out.set(nx, ny);
        }
    }
  return out;
}

void OccupancyGrid::unite(const OccupancyGrid& other) {
  if (resolution != other.resolution)
    throw OutOfRange("occupancy grids have different resolutions");
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] |= other.cells[i];
}

namespace {

// 8-neighbor connected components of the set cells.
int count_pieces(const OccupancyGrid& g) {
  const int res = g.resolution;
  std::vector<char> seen(static_cast<std::size_t>(res) * res, 0);
  std::vector<std::pair<int, int>> stack;
  int pieces = 0;
  for (int cy = 0; cy < res; ++cy)
    for (int cx = 0; cx < res; ++cx) {
      const std::size_t idx = static_cast<std::size_t>(cy) * res + cx;
      if (seen[idx] || !g.get(cx, cy)) continue;
      ++pieces;
      stack.push_back({cx, cy});
      seen[idx] = 1;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || nx >= res || ny < 0 || ny >= res) continue;
            const std::size_t nidx = static_cast<std::size_t>(ny) * res + nx;
            if (seen[nidx] || !g.get(nx, ny)) continue;
            seen[nidx] = 1;
            stack.push_back({nx, ny});
          }
      }
    }
  return pieces;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

AttractorCensus attractor_census(const PiecewiseMap& map, int n_seeds,
                                 long orbit_len, long burn_in, int resolution,
                                 std::uint64_t rng_seed) {
  if (n_seeds < 1) throw OutOfRange("need at least one census seed");
  if (resolution < 8 || resolution > 4096)
    throw OutOfRange("census resolution must lie in [8, 4096]");
  const std::vector<Point> seeds =
      sample(map.domain, static_cast<std::size_t>(n_seeds), rng_seed);

  // Pass 1: common bounding box of every post-burn-in point.
  std::vector<Aabb> boxes(
      seeds.size(),
      Aabb{Point{std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()},
           Point{-std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()}});
  parallel_for(n_seeds, [&](int i) {
    Aabb& box = boxes[static_cast<std::size_t>(i)];
    orbit_visit({map, seeds[static_cast<std::size_t>(i)], burn_in, orbit_len},
                [&box](const Point& p) {
                  box.lo = box.lo.cwiseMin(p);
                  box.hi = box.hi.cwiseMax(p);
                });
  });
  Aabb common = boxes.front();
  for (const Aabb& box : boxes) {
    common.lo = common.lo.cwiseMin(box.lo);
    common.hi = common.hi.cwiseMax(box.hi);
  }
  // Tiny pad keeps the cell mapping finite for point-like attractors.
  common.lo.array() -= 1e-9;
  common.hi.array() += 1e-9;

  // Pass 2: identical orbits again, now binned into per-seed grids.
  std::vector<OccupancyGrid> grids(
      seeds.size(),
      OccupancyGrid{common, resolution,
                    std::vector<std::uint64_t>(bit_words(resolution), 0)});
  std::vector<long> hits(seeds.size(), 0);
  parallel_for(n_seeds, [&](int i) {
    OccupancyGrid& g = grids[static_cast<std::size_t>(i)];
    hits[static_cast<std::size_t>(i)] = orbit_visit(
        {map, seeds[static_cast<std::size_t>(i)], burn_in, orbit_len},
        [&](const Point& p) {
          g.set(cell_of(p.x(), common.lo.x(), common.hi.x(), resolution),
                cell_of(p.y(), common.lo.y(), common.hi.y(), resolution));
        });
  });

  // Seeds whose occupancies touch (within one cell) see the same attractor.
  std::vector<OccupancyGrid> fat;
  fat.reserve(grids.size());
  for (const OccupancyGrid& g : grids) fat.push_back(g.dilated());
  std::vector<int> parent(seeds.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < grids.size(); ++i)
    for (std::size_t j = i + 1; j < grids.size(); ++j) {
      if (!fat[i].intersects(grids[j])) continue;
      const int ri = find_root(parent, static_cast<int>(i));
      const int rj = find_root(parent, static_cast<int>(j));
      if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
    }

  AttractorCensus census;
  std::vector<int> root_slot(seeds.size(), -1);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const int r = find_root(parent, static_cast<int>(i));
    if (root_slot[static_cast<std::size_t>(r)] < 0) {
      root_slot[static_cast<std::size_t>(r)] =
          static_cast<int>(census.attractors.size());
      census.attractors.push_back(AttractorInfo{
          OccupancyGrid{common, resolution,
                        std::vector<std::uint64_t>(bit_words(resolution), 0)},
          0, 0});
    }
    AttractorInfo& info =
        census.attractors[static_cast<std::size_t>(root_slot[static_cast<std::size_t>(r)])];
    info.occupancy.unite(grids[i]);
    ++info.seed_count;
  }
  for (AttractorInfo& info : census.attractors)
    info.pieces = count_pieces(info.occupancy);
  census.distinct_count = static_cast<int>(census.attractors.size());
  census.critical_hits = std::accumulate(hits.begin(), hits.end(), 0L);
  return census;
}

double mixing_probe(const PiecewiseMap& map, const OccupancyGrid& attractor,
                    const Point& disc_center, double disc_radius, int steps) {
  if (steps < 0) throw OutOfRange("steps must be >= 0");
  if (disc_radius <= 0.0) throw OutOfRange("disc radius must be positive");
  const std::size_t denom = attractor.popcount();
  if (denom == 0) throw EmptyAttractor("attractor grid has no occupied cells");

  constexpr std::size_t kProbeSamples = 1000;
  Rng rng(20240903ull);
  std::vector<Point> pts;
  pts.reserve(kProbeSamples);
  for (std::size_t i = 0; i < kProbeSamples; ++i) {
    const double r = disc_radius * std::sqrt(rng.uniform());
    const double th = 2.0 * M_PI * rng.uniform();
    const Point p = disc_center + r * Point{std::cos(th), std::sin(th)};
    if (map.domain.outside_distance(p) <= kSnapTol)
      pts.push_back(map.domain.project(p));
  }

  OccupancyGrid hit{attractor.bounds, attractor.resolution,
                    std::vector<std::uint64_t>(attractor.cells.size(), 0)};
  const Aabb& bb = attractor.bounds;
  const int res = attractor.resolution;
  const Point center = map.domain.centroid();
  auto mark = [&](const Point& p) {
    if (p.x() < bb.lo.x() || p.x() > bb.hi.x() || p.y() < bb.lo.y() ||
        p.y() > bb.hi.y())
      return;
    hit.set(cell_of(p.x(), bb.lo.x(), bb.hi.x(), res),
            cell_of(p.y(), bb.lo.y(), bb.hi.y(), res));
  };
  for (Point p : pts) {
    mark(p);
    for (int it = 0; it < steps; ++it) {
      if (map.on_critical_line(p)) p = (1.0 - kNudge) * p + kNudge * center;
      p = snap_into(map.domain, map.eval(p), "probe orbit left the domain");
      mark(p);
    }
  }

  std::size_t both = 0;
  for (std::size_t i = 0; i < hit.cells.size(); ++i)
    both += static_cast<std::size_t>(
        std::popcount(hit.cells[i] & attractor.cells[i]));
  return static_cast<double>(both) / static_cast<double>(denom);
}

std::vector<DomainResidual> lambda_psi_residual(double t,
                                                std::size_t n_samples,
                                                std::uint64_t rng_seed) {
  if (n_samples == 0) throw OutOfRange("need at least one sample");
  const auto [a, b] = gamma0(t);
  const Params prm{a, b};

  std::vector<std::pair<std::string, ConvexPolygon>> domains;
  domains.emplace_back("triangle", triangle_domain());
  if (in_region({RegionTag::P1, 0}, a, b))
    domains.emplace_back("rect_p1",
                         named_domain(DomainName::RectP1, prm).polygon);
  if (in_region({RegionTag::P2, 0}, a, b))
    domains.emplace_back("rect_p2",
                         named_domain(DomainName::RectP2, prm).polygon);
  if (in_canonical_params(prm)) {
    domains.emplace_back(
        "delta",
        named_domain(DomainName::Delta, prm, Frame::Original).polygon);
    domains.emplace_back(
        "pi", named_domain(DomainName::Pi, prm, Frame::Original).polygon);
  }

  const ConvexPolygon& tri = triangle_domain();
  std::vector<DomainResidual> out;
  for (const auto& [name, poly] : domains) {
    DomainResidual dr;
    dr.domain = name;
    double total = 0.0;
    const std::vector<Point> pts = sample(poly, n_samples, rng_seed);
    for (const Point& p : pts) {
      Point q = p;
      for (int k = 0; k < 8; ++k)
        q = snap_into(tri, lambda_eval(t, q), "eighth power left the triangle");
      const double err = (q - psi_eval(prm, p)).norm();
      dr.sup = std::max(dr.sup, err);
      total += err;
    }
    dr.mean = total / static_cast<double>(pts.size());
    out.push_back(std::move(dr));
  }
  return out;
}

}  // namespace ebm
