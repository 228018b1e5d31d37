// ebmlab: scriptable front end for the map library. Single-point queries
// (region, attractors, renorm, cascade, verify) emit JSON on stdout; sweeps
// emit CSV. Deterministic given flags + --seed; see README for the schema.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ebm/conjugacy.hpp"
#include "ebm/dynamics.hpp"
#include "ebm/errors.hpp"
#include "ebm/geometry.hpp"
#include "ebm/maps.hpp"
#include "ebm/regions.hpp"
#include "ebm/renorm.hpp"
#include "ebm/rng.hpp"
#include "ebm/types.hpp"

namespace {

using ebm::Params;
using ebm::Point;
using json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNotFound = 3;
constexpr int kExitNumeric = 4;

// ---------------------------------------------------------------------------
// Output plumbing. Floats are serialized with 17 significant digits so every
// binary64 value round-trips exactly and re-runs are byte-identical.

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void dump_json(const json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string pad1(static_cast<std::size_t>(depth + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::null:
      out += "null";
      break;
    case json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt17(v) : "null";
      break;
    }
    case json::value_t::string:
      out += nlohmann::json(j.get<std::string>()).dump();
      break;
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad1;
        dump_json(j[i], out, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "]";
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad1 + nlohmann::json(it.key()).dump() + ": ";
        dump_json(it.value(), out, depth + 1);
        if (i + 1 < j.size()) out += ",";
        out += "\n";
      }
      out += pad + "}";
      break;
    }
    default:
      out += "null";
      break;
  }
}

std::string render(const json& j) {
  std::string out;
  dump_json(j, out, 0);
  out += "\n";
  return out;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ebm::Error("cannot open output file: " + path);
  f << text;
}

double json_num(const json& j) {
  if (j.is_number()) return j.get<double>();
  throw ebm::Error("expected a number");
}

json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

// ---------------------------------------------------------------------------
// Worker pool for sweeps (rows are written by index, so completion order
// never shows in the output).

int thread_count() {
  if (const char* env = std::getenv("EBM_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

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
  pool.reserve(static_cast<std::size_t>(workers));
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

// ---------------------------------------------------------------------------
// Shared option bags.

struct CommonOpts {
  std::string out_path;
  std::string format;  // "" means the command default
};

struct CensusOpts {
  std::string map = "psi";
  double a = 0.0, b = 0.0, mu = 0.0, t = 0.0;
  bool has_a = false, has_b = false, has_mu = false, has_t = false;
  int seeds = ebm::kCensusSeeds;
  long len = ebm::kCensusOrbitLen;
  long burn = ebm::kCensusBurnIn;
  int grid = ebm::kCensusResolution;
  std::uint64_t seed = 0;
  std::string cells_out;
};

ebm::PiecewiseMap build_map(const CensusOpts& o) {
  if (o.map == "psi") {
    if (!o.has_a || !o.has_b)
      throw CLI::ValidationError("attractors", "--map psi needs --a and --b");
    return ebm::map_psi({o.a, o.b});
  }
  if (o.map == "gamma") {
    if (!o.has_mu)
      throw CLI::ValidationError("attractors", "--map gamma needs --mu");
    return ebm::map_gamma(o.mu);
  }
  if (o.map == "lambda") {
    if (!o.has_t)
      throw CLI::ValidationError("attractors", "--map lambda needs --t");
    return ebm::map_lambda(o.t);
  }
  throw CLI::ValidationError("attractors", "unknown --map " + o.map);
}

json map_params_json(const CensusOpts& o) {
  json p = json::object();
  if (o.map == "psi") {
    p["a"] = o.a;
    p["b"] = o.b;
  } else if (o.map == "gamma") {
    p["mu"] = o.mu;
  } else {
    p["t"] = o.t;
  }
  return p;
}

// ---------------------------------------------------------------------------
// region

int cmd_region(double a, double b, const CommonOpts& common) {
  const ebm::RegionReport rep = ebm::region_report(a, b);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "region";
  out["a"] = rep.a;
  out["b"] = rep.b;
  json mem = json::object();
  for (const auto& [name, val] : rep.memberships) mem[name] = val;
  out["memberships"] = mem;
  out["P1n"] = rep.p1_window ? json(*rep.p1_window) : json(nullptr);
  out["P2n"] = rep.p2_window ? json(*rep.p2_window) : json(nullptr);
  json fib = json::object();
  for (const auto& [name, iv] : rep.boundary_b)
    fib[name] = json::array({iv.first, iv.second});
  out["boundary_b"] = fib;
  out["p3_boundary_exact"] = rep.p3_boundary_exact;
  write_output(render(out), common.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// attractors

int cmd_attractors(const CensusOpts& o, const CommonOpts& common) {
  const ebm::PiecewiseMap map = build_map(o);
  const ebm::AttractorCensus census =
      ebm::attractor_census(map, o.seeds, o.len, o.burn, o.grid, o.seed);

  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "attractors";
  out["map"] = o.map;
  out["params"] = map_params_json(o);
  out["seeds"] = o.seeds;
  out["orbit_len"] = o.len;
  out["burn_in"] = o.burn;
  out["resolution"] = o.grid;
  out["rng_seed"] = o.seed;
  out["distinct_count"] = census.distinct_count;
  out["critical_hits"] = census.critical_hits;
  json arr = json::array();
  for (const ebm::AttractorInfo& info : census.attractors) {
    json e;
    e["seed_count"] = info.seed_count;
    e["pieces"] = info.pieces;
    e["occupied_cells"] = static_cast<std::uint64_t>(info.occupancy.popcount());
    e["bbox_lo"] = point_json(info.occupancy.bounds.lo);
    e["bbox_hi"] = point_json(info.occupancy.bounds.hi);
    arr.push_back(e);
  }
  out["attractors"] = arr;
  write_output(render(out), common.out_path);

  if (!o.cells_out.empty()) {
    std::string csv = "attractor,cell_x,cell_y,x,y\n";
    for (std::size_t k = 0; k < census.attractors.size(); ++k) {
      const ebm::OccupancyGrid& g = census.attractors[k].occupancy;
      const double wx = (g.bounds.hi.x() - g.bounds.lo.x()) / g.resolution;
      const double wy = (g.bounds.hi.y() - g.bounds.lo.y()) / g.resolution;
      for (int cy = 0; cy < g.resolution; ++cy)
        for (int cx = 0; cx < g.resolution; ++cx) {
          if (!g.get(cx, cy)) continue;
          csv += std::to_string(k) + "," + std::to_string(cx) + "," +
                 std::to_string(cy) + "," +
                 fmt17(g.bounds.lo.x() + (cx + 0.5) * wx) + "," +
                 fmt17(g.bounds.lo.y() + (cy + 0.5) * wy) + "\n";
        }
    }
    write_output(csv, o.cells_out);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// renorm

json node_json(const ebm::RenormNode& n) {
  json e;
  e["word"] = n.word;
  e["a"] = std::isfinite(n.a) ? json(n.a) : json(nullptr);
  e["b"] = std::isfinite(n.b) ? json(n.b) : json(nullptr);
  e["valid"] = n.valid;
  return e;
}

int cmd_renorm(double a, double b, const std::string& op, int depth,
               const CommonOpts& common) {
  std::vector<ebm::RenormNode> nodes;
  if (op == "both") {
    nodes = ebm::renorm_tree(a, b, depth);
  } else {
    const ebm::RenormOp ro =
        op == "delta" ? ebm::RenormOp::Delta : ebm::RenormOp::Pi;
    const char letter = op == "delta" ? 'D' : 'P';
    nodes.push_back({"", a, b, true});
    for (int i = 0; i < depth; ++i) {
      const ebm::RenormNode& parent = nodes.back();
      ebm::RenormNode child{parent.word + letter,
                            std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::quiet_NaN(), false};
      if (std::isfinite(parent.a) && std::isfinite(parent.b)) {
        child.valid = parent.valid && ebm::in_p3_closure(parent.a, parent.b);
        try {
          std::tie(child.a, child.b) = ebm::apply(ro, parent.a, parent.b);
        } catch (const ebm::SingularDenominator&) {
          child.valid = false;
        }
      }
      nodes.push_back(std::move(child));
    }
  }
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "renorm";
  out["a"] = a;
  out["b"] = b;
  out["op"] = op;
  out["depth"] = depth;
  json arr = json::array();
  for (const ebm::RenormNode& n : nodes) arr.push_back(node_json(n));
  out["nodes"] = arr;
  write_output(render(out), common.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// cascade

int cmd_cascade(int n, long tsteps, const std::string& op,
                const CommonOpts& common) {
  const ebm::RenormOp ro =
      op == "pi" ? ebm::RenormOp::Pi : ebm::RenormOp::Delta;
  const ebm::CascadeResult res = ebm::cascade_search(n, tsteps, ro);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "cascade";
  out["n"] = res.n;
  out["tsteps"] = tsteps;
  out["op"] = op;
  out["t_lo"] = res.t_lo;
  out["t_hi"] = res.t_hi;
  out["t_mid"] = 0.5 * (res.t_lo + res.t_hi);
  out["k"] = res.k;
  out["terminal"] = ebm::region_name(res.terminal);
  out["window"] = res.terminal.n;
  out["predicted_attractors"] =
      static_cast<std::int64_t>(ebm::attractor_count_prediction(res.terminal));
  write_output(render(out), common.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOpts {
  std::string suite;
  std::size_t samples = 0;  // 0: per-suite default
  std::uint64_t seed = 0;
};

// Rejection-samples parameter pairs from a region's bounding box.
std::vector<Params> sample_params(ebm::RegionTag tag, std::size_t n,
                                  std::uint64_t seed) {
  double a_hi = 2.0;
  if (tag == ebm::RegionTag::P1 || tag == ebm::RegionTag::P2)
    a_hi = std::sqrt(2.0);
  if (tag == ebm::RegionTag::P3 || tag == ebm::RegionTag::PDelta)
    a_hi = std::pow(2.0, 0.2);
  ebm::Rng rng(seed);
  std::vector<Params> out;
  std::size_t guard = 0;
  while (out.size() < n) {
    if (++guard > 1000000)
      throw ebm::Error("parameter sampling failed to converge");
    const double a = rng.uniform(1.0 + 1e-9, a_hi);
    const double b = rng.uniform(1.0, 2.0);
    if (ebm::in_region({tag, 0}, a, b)) out.push_back({a, b});
  }
  return out;
}

json verify_spectral(bool& pass) {
  const Point star{1.0, std::sqrt(2.0)};
  const double h = 1e-6;
  json suites = json::object();
  double worst = 0.0;
  for (const ebm::RenormOp op : {ebm::RenormOp::Delta, ebm::RenormOp::Pi}) {
    ebm::Mat2 numeric;
    for (int col = 0; col < 2; ++col) {
      Point lo = star, hi = star;
      lo[col] -= h;
      hi[col] += h;
      const auto [fa1, fb1] = ebm::apply(op, hi.x(), hi.y());
      const auto [fa0, fb0] = ebm::apply(op, lo.x(), lo.y());
      numeric(0, col) = (fa1 - fa0) / (2.0 * h);
      numeric(1, col) = (fb1 - fb0) / (2.0 * h);
    }
    const ebm::Mat2 closed = ebm::jacobian(op, star.x(), star.y());
    const double entry_err = (numeric - closed).cwiseAbs().maxCoeff();
    const Eigen::EigenSolver<ebm::Mat2> es(numeric);
    std::vector<double> eigs{es.eigenvalues()(0).real(),
                             es.eigenvalues()(1).real()};
    std::sort(eigs.begin(), eigs.end());
    const ebm::SpectralData sp = ebm::spectral(op);
    const double eig_err =
        std::max(std::abs(eigs[0] - sp.lambda1), std::abs(eigs[1] - sp.lambda2));
    worst = std::max(worst, std::max(entry_err, eig_err));
    json s;
    s["jacobian"] = json::array(
        {json::array({closed(0, 0), closed(0, 1)}),
         json::array({closed(1, 0), closed(1, 1)})});
    s["numeric_jacobian"] = json::array(
        {json::array({numeric(0, 0), numeric(0, 1)}),
         json::array({numeric(1, 0), numeric(1, 1)})});
    s["max_entry_error"] = entry_err;
    s["eigenvalues"] = json::array({eigs[0], eigs[1]});
    s["eigenvalue_error"] = eig_err;
    s["fixed_point"] = point_json(sp.fixed_point);
    suites[op == ebm::RenormOp::Delta ? "delta" : "pi"] = s;
  }
  pass = worst < 1e-6;
  suites["max_error"] = worst;
  return suites;
}

json verify_conjugacy(std::size_t samples, std::uint64_t seed, bool& pass) {
  if (samples == 0) samples = 10000;
  constexpr std::size_t kParams = 20;
  struct Case {
    const char* name;
    ebm::ConjugacyKind kind;
    ebm::RegionTag region;
  };
  const Case cases[] = {
      {"P1_square", ebm::ConjugacyKind::P1_square, ebm::RegionTag::P1},
      {"P2_square", ebm::ConjugacyKind::P2_square, ebm::RegionTag::P2},
      {"Delta_quad", ebm::ConjugacyKind::Delta_quad, ebm::RegionTag::P3},
      {"Pi_quad", ebm::ConjugacyKind::Pi_quad, ebm::RegionTag::P3},
  };
  json out = json::object();
  double worst = 0.0;
  for (const Case& c : cases) {
    const std::vector<Params> prms =
        sample_params(c.region, kParams, seed ^ 0x9e3779b97f4a7c15ull);
    double sup = 0.0, mean_total = 0.0;
    for (const Params& prm : prms) {
      const ebm::Residual r =
          ebm::conjugacy_residual(c.kind, prm, samples, seed);
      sup = std::max(sup, r.sup);
      mean_total += r.mean;
    }
    json e;
    e["params"] = kParams;
    e["points_per_param"] = samples;
    e["sup"] = sup;
    e["mean"] = mean_total / static_cast<double>(kParams);
    out[c.name] = e;
    worst = std::max(worst, sup);
  }
  out["max_sup"] = worst;
  pass = worst < 1e-9;
  return out;
}

json verify_invariance(std::size_t samples, std::uint64_t seed, bool& pass) {
  if (samples == 0) samples = 2000;
  constexpr std::size_t kParams = 20;
  const std::vector<Params> inside =
      sample_params(ebm::RegionTag::PDelta, kParams, seed ^ 0xabcdull);
  double worst_inside = 0.0;
  for (const Params& prm : inside) {
    const ebm::NamedDomain dom =
        ebm::named_domain(ebm::DomainName::Delta, prm, ebm::Frame::Centered);
    worst_inside = std::max(
        worst_inside, ebm::invariance_check(prm, dom, 4, samples, seed));
  }
  double least_outside = std::numeric_limits<double>::infinity();
  for (const Params& prm : inside) {
    const auto [blo, bhi] =
        ebm::region_bounds({ebm::RegionTag::PDelta, 0}, prm.a);
    const Params out_prm{prm.a, bhi + 0.01};
    if (!ebm::in_canonical_params(out_prm)) continue;
    const ebm::NamedDomain dom = ebm::named_domain(ebm::DomainName::Delta,
                                                   out_prm, ebm::Frame::Centered);
    least_outside = std::min(
        least_outside, ebm::invariance_check(out_prm, dom, 4, samples, seed));
  }
  json out;
  out["params"] = kParams;
  out["samples_per_param"] = samples;
  out["max_violation_inside"] = worst_inside;
  out["min_violation_outside"] = least_outside;
  pass = worst_inside < 1e-10 && least_outside > 1e-3;
  return out;
}

json verify_continuity(std::size_t samples, std::uint64_t seed, bool& pass) {
  if (samples == 0) samples = 10000;
  constexpr std::size_t kParams = 100;
  const std::vector<Params> prms =
      sample_params(ebm::RegionTag::P, kParams, seed ^ 0x5151ull);
  const std::size_t per_line = std::max<std::size_t>(1, samples / 3);
  double worst = 0.0;
  for (const Params& prm : prms) {
    const double a = prm.a, b = prm.b;
    const auto t0m = [&](double x, double y) { return Point{a * x, a * y}; };
    const auto t0p = [&](double x, double y) {
      return Point{a * (b - y), a * (b - x)};
    };
    const auto t1m = [&](double x, double y) {
      return Point{a * (2.0 - x), a * y};
    };
    const auto t1p = [&](double x, double y) {
      return Point{a * (b - y), a * (b - 2.0 + x)};
    };
    for (std::size_t i = 0; i < per_line; ++i) {
      const double u =
          static_cast<double>(i) / static_cast<double>(per_line - 1 + (per_line == 1));
      // vertical critical line x = 1: the two left formulas must match the
      // two right formulas, split at y = b - 1
      const double y = u;
      const Point dv = y <= b - 1.0 ? t0m(1.0, y) - t1m(1.0, y)
                                    : t0p(1.0, y) - t1p(1.0, y);
      worst = std::max(worst, dv.cwiseAbs().maxCoeff());
      // left fold line x + y = b, x in [b/2, 1]
      const double xl = 0.5 * b + (1.0 - 0.5 * b) * u;
      const Point dl = t0m(xl, b - xl) - t0p(xl, b - xl);
      worst = std::max(worst, dl.cwiseAbs().maxCoeff());
      // right fold line x - y = 2 - b, x in [max(1, 2-b), 2 - b/2]
      const double xr_lo = std::max(1.0, 2.0 - b);
      const double xr = xr_lo + (2.0 - 0.5 * b - xr_lo) * u;
      const Point dr = t1m(xr, xr - 2.0 + b) - t1p(xr, xr - 2.0 + b);
      worst = std::max(worst, dr.cwiseAbs().maxCoeff());
    }
  }
  (void)seed;
  json out;
  out["params"] = kParams;
  out["points_per_line"] = per_line;
  out["max_disagreement"] = worst;
  pass = worst < 1e-12;
  return out;
}

json verify_lyapunov(std::size_t samples, std::uint64_t seed, bool& pass) {
  if (samples == 0) samples = 100000;
  json out = json::object();
  double worst = 0.0;
  {
    const ebm::PiecewiseMap m = ebm::map_psi({1.2, 1.1});
    const Point x0 = ebm::sample(m.domain, 1, seed ^ 0x77ull)[0];
    const ebm::LyapunovEstimate est =
        ebm::lyapunov({m, x0, 1000, static_cast<long>(samples)});
    const double expected = std::log(1.2);
    const double err = std::max(std::abs(est.lambda1 - expected),
                                std::abs(est.lambda2 - expected));
    worst = std::max(worst, err);
    json e;
    e["lambda1"] = est.lambda1;
    e["lambda2"] = est.lambda2;
    e["expected"] = expected;
    e["max_error"] = err;
    out["psi_1.2_1.1"] = e;
  }
  {
    const ebm::PiecewiseMap m = ebm::map_lambda(0.8);
    const Point x0 = ebm::sample(m.domain, 1, seed ^ 0x78ull)[0];
    const ebm::LyapunovEstimate est =
        ebm::lyapunov({m, x0, 1000, static_cast<long>(samples)});
    const double expected = std::log(0.8 * std::sqrt(2.0));
    const double err = std::max(std::abs(est.lambda1 - expected),
                                std::abs(est.lambda2 - expected));
    worst = std::max(worst, err);
    json e;
    e["lambda1"] = est.lambda1;
    e["lambda2"] = est.lambda2;
    e["expected"] = expected;
    e["max_error"] = err;
    out["lambda_0.8"] = e;
  }
  out["max_error"] = worst;
  pass = worst < 1e-9;
  return out;
}

int cmd_verify(const VerifyOpts& o, const CommonOpts& common) {
  bool pass = false;
  json body;
  if (o.suite == "spectral")
    body = verify_spectral(pass);
  else if (o.suite == "conjugacy")
    body = verify_conjugacy(o.samples, o.seed, pass);
  else if (o.suite == "invariance")
    body = verify_invariance(o.samples, o.seed, pass);
  else if (o.suite == "continuity")
    body = verify_continuity(o.samples, o.seed, pass);
  else if (o.suite == "lyapunov")
    body = verify_lyapunov(o.samples, o.seed, pass);
  else
    throw CLI::ValidationError("verify", "unknown --suite " + o.suite);

  json out;
  out["schema_version"] = kSchemaVersion;
  out["command"] = "verify";
  out["suite"] = o.suite;
  out["rng_seed"] = o.seed;
  out["pass"] = pass;
  out["results"] = body;
  write_output(render(out), common.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOpts {
  std::string job;
  std::string curve;  // "" or "gamma0"
  double a_lo = 0.0, a_hi = 0.0;
  int a_steps = 0;
  double b_lo = 0.0, b_hi = 0.0;
  int b_steps = 0;
  double t_lo = 0.0, t_hi = 0.0;
  int t_steps = 0;
  std::string op = "delta";
  int max_depth = 12;
  int seeds = 16;
  long len = 100000;
  long burn = 10000;
  int grid = 256;
  std::uint64_t seed = 0;
};

int cmd_sweep(const SweepOpts& o, const CommonOpts& common) {
  struct Site {
    double t = std::numeric_limits<double>::quiet_NaN();
    Params prm;
  };
  std::vector<Site> sites;
  const bool on_curve = !o.curve.empty();
  if (on_curve) {
    if (o.curve != "gamma0")
      throw CLI::ValidationError("sweep", "unknown --curve " + o.curve);
    if (o.t_steps < 2)
      throw CLI::ValidationError("sweep", "--t-steps must be >= 2");
    for (int i = 0; i < o.t_steps; ++i) {
      const double t =
          o.t_lo + (o.t_hi - o.t_lo) * i / static_cast<double>(o.t_steps - 1);
      const auto [a, b] = ebm::gamma0(t);  // validates [1/sqrt2, 2^(-2/5)]
      sites.push_back({t, {a, b}});
    }
  } else {
    if (o.a_steps < 2 || o.b_steps < 2)
      throw CLI::ValidationError("sweep", "--a-steps/--b-steps must be >= 2");
    if (!(o.a_lo > 1.0) || o.a_hi > 2.0 || o.a_lo > o.a_hi)
      throw CLI::ValidationError("sweep", "a range must lie in (1, 2]");
    if (o.b_lo < 1.0 || o.b_hi > 2.0 || o.b_lo > o.b_hi)
      throw CLI::ValidationError("sweep", "b range must lie in [1, 2]");
    for (int i = 0; i < o.a_steps; ++i)
      for (int j = 0; j < o.b_steps; ++j) {
        const double a = o.a_lo + (o.a_hi - o.a_lo) * i /
                                      static_cast<double>(o.a_steps - 1);
        const double b = o.b_lo + (o.b_hi - o.b_lo) * j /
                                      static_cast<double>(o.b_steps - 1);
        sites.push_back({std::numeric_limits<double>::quiet_NaN(), {a, b}});
      }
  }

  std::string header = on_curve ? "t,a,b" : "a,b";
  std::function<std::string(const Site&)> row_body;
  if (o.job == "census") {
    header += ",distinct_count,pieces_total,critical_hits";
    row_body = [&](const Site& s) -> std::string {
      const ebm::AttractorCensus c = ebm::attractor_census(
          ebm::map_psi(s.prm), o.seeds, o.len, o.burn, o.grid, o.seed);
      int pieces = 0;
      for (const auto& info : c.attractors) pieces += info.pieces;
      return std::to_string(c.distinct_count) + "," + std::to_string(pieces) +
             "," + std::to_string(c.critical_hits);
    };
  } else if (o.job == "lyapunov") {
    header += ",lambda1,lambda2";
    row_body = [&](const Site& s) -> std::string {
      const ebm::PiecewiseMap m = ebm::map_psi(s.prm);
      const Point x0 = ebm::sample(m.domain, 1, o.seed)[0];
      const ebm::LyapunovEstimate est = ebm::lyapunov({m, x0, 1000, o.len});
      return fmt17(est.lambda1) + "," + fmt17(est.lambda2);
    };
  } else if (o.job == "region") {
    header += ",P,P1,P2,PDelta,P3,P1n,P2n";
    row_body = [&](const Site& s) -> std::string {
      const ebm::RegionReport rep = ebm::region_report(s.prm.a, s.prm.b);
      const auto flag = [&](const char* name) {
        return rep.memberships.at(name) ? "1" : "0";
      };
      return std::string(flag("P")) + "," + flag("P1") + "," + flag("P2") +
             "," + flag("PDelta") + "," + flag("P3") + "," +
             std::to_string(rep.p1_window.value_or(0)) + "," +
             std::to_string(rep.p2_window.value_or(0));
    };
  } else if (o.job == "renorm_depth") {
    header += ",depth";
    const ebm::RenormOp ro =
        o.op == "pi" ? ebm::RenormOp::Pi : ebm::RenormOp::Delta;
    row_body = [&, ro](const Site& s) -> std::string {
      return std::to_string(
          ebm::renorm_depth(s.prm.a, s.prm.b, ro, o.max_depth));
    };
  } else {
    throw CLI::ValidationError("sweep", "unknown --job " + o.job);
  }

  std::vector<std::string> rows(sites.size());
  parallel_for(static_cast<int>(sites.size()), [&](int i) {
    const Site& s = sites[static_cast<std::size_t>(i)];
    std::string prefix =
        on_curve ? fmt17(s.t) + "," + fmt17(s.prm.a) + "," + fmt17(s.prm.b)
                 : fmt17(s.prm.a) + "," + fmt17(s.prm.b);
    std::string body;
    try {
      body = row_body(s);
    } catch (const ebm::Error&) {
      // point not admissible for this job (e.g. outside the parameter set):
      // keep the row, mark the payload columns
      const auto commas = std::count(header.begin(), header.end(), ',');
      const auto fixed = on_curve ? 2 : 1;
      for (long k = 0; k < commas - fixed; ++k) body += k ? ",nan" : "nan";
    }
    rows[static_cast<std::size_t>(i)] = prefix + "," + body;
  });

  std::string csv = header + "\n";
  for (const std::string& r : rows) csv += r + "\n";
  write_output(csv, common.out_path);
  return 0;
}

// ---------------------------------------------------------------------------
// CLI wiring

int run_cli(const std::vector<std::string>& args);

// Reads a job-config JSON and replays it through the flag parser, so both
// entry points stay in lockstep.
int run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    return kExitUsage;
  }
  nlohmann::json cfg;
  try {
    f >> cfg;
  } catch (const std::exception& e) {
    std::cerr << "error: bad config JSON: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!cfg.contains("command") || !cfg["command"].is_string()) {
    std::cerr << "error: config needs a \"command\" string\n";
    return kExitUsage;
  }
  std::vector<std::string> args{cfg["command"].get<std::string>()};
  if (cfg.contains("parameters")) {
    for (const auto& [key, val] : cfg["parameters"].items()) {
      if (val.is_boolean()) {
        if (val.get<bool>()) args.push_back("--" + key);
      } else if (val.is_string()) {
        args.push_back("--" + key);
        args.push_back(val.get<std::string>());
      } else if (val.is_number_integer() || val.is_number_unsigned()) {
        args.push_back("--" + key);
        args.push_back(std::to_string(val.get<std::int64_t>()));
      } else if (val.is_number()) {
        args.push_back("--" + key);
        args.push_back(fmt17(json_num(val)));
      } else {
        std::cerr << "error: config parameter " << key << " must be scalar\n";
        return kExitUsage;
      }
    }
  }
  if (cfg.contains("rng_seed")) {
    args.push_back("--seed");
    args.push_back(std::to_string(cfg["rng_seed"].get<std::uint64_t>()));
  }
  if (cfg.contains("output_path") &&
      !cfg["output_path"].get<std::string>().empty()) {
    args.push_back("--out");
    args.push_back(cfg["output_path"].get<std::string>());
  }
  if (cfg.contains("format")) {
    args.push_back("--format");
    args.push_back(cfg["format"].get<std::string>());
  }
  return run_cli(args);
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"parameter-plane toolkit for piecewise-affine triangle maps"};
  app.require_subcommand(0, 1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "run a job described by a JSON config file");

  CommonOpts common;
  double a = 0.0, b = 0.0;

  auto add_common = [&common](CLI::App* sub, const char* fmt_default) {
    sub->add_option("--out", common.out_path, "write output to a file");
    sub->add_option("--format", common.format,
                    std::string("output format (default ") + fmt_default + ")")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* region = app.add_subcommand("region", "parameter-region report");
  region->add_option("--a", a, "first parameter")->required();
  region->add_option("--b", b, "second parameter")->required();
  add_common(region, "json");

  CensusOpts census;
  CLI::App* attract =
      app.add_subcommand("attractors", "attractor census at one point");
  attract->add_option("--map", census.map, "map family (psi, gamma, lambda)")
      ->check(CLI::IsMember({"psi", "gamma", "lambda"}));
  auto* oa = attract->add_option("--a", census.a, "first parameter (psi)");
  auto* ob = attract->add_option("--b", census.b, "second parameter (psi)");
  auto* omu = attract->add_option("--mu", census.mu, "tent slope (gamma)");
  auto* ot = attract->add_option("--t", census.t, "two-piece slope (lambda)");
  attract->add_option("--seeds", census.seeds, "number of seeds");
  attract->add_option("--len", census.len, "post-burn-in orbit length");
  attract->add_option("--burn", census.burn, "burn-in iterations");
  attract->add_option("--grid", census.grid, "occupancy resolution");
  attract->add_option("--seed", census.seed, "rng seed");
  attract->add_option("--cells-out", census.cells_out,
                      "also write occupied cells as CSV to this path");
  add_common(attract, "json");

  std::string renorm_op = "both";
  int depth = 3;
  CLI::App* renorm =
      app.add_subcommand("renorm", "parameter-renormalization tree");
  renorm->add_option("--a", a, "first parameter")->required();
  renorm->add_option("--b", b, "second parameter")->required();
  renorm->add_option("--op", renorm_op, "operator (both, delta, pi)")
      ->check(CLI::IsMember({"both", "delta", "pi"}));
  renorm->add_option("--depth", depth, "tree depth")
      ->check(CLI::Range(0, 12));
  add_common(renorm, "json");

  int cascade_n = 1;
  long tsteps = 20000;
  std::string cascade_op = "delta";
  CLI::App* cascade =
      app.add_subcommand("cascade", "search the curve for a cascade window");
  cascade->add_option("--n", cascade_n, "required renormalization level")
      ->required();
  cascade->add_option("--tsteps", tsteps, "grid points along the curve");
  cascade->add_option("--op", cascade_op, "operator (delta, pi)")
      ->check(CLI::IsMember({"delta", "pi"}));
  add_common(cascade, "json");

  VerifyOpts verify_opts;
  CLI::App* verify = app.add_subcommand("verify", "numeric verification suite");
  verify
      ->add_option("--suite", verify_opts.suite,
                   "suite (conjugacy, invariance, spectral, continuity, "
                   "lyapunov)")
      ->required()
      ->check(CLI::IsMember(
          {"conjugacy", "invariance", "spectral", "continuity", "lyapunov"}));
  verify->add_option("--samples", verify_opts.samples,
                     "sample count (0 picks the suite default)");
  verify->add_option("--seed", verify_opts.seed, "rng seed");
  add_common(verify, "json");

  SweepOpts sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
  sweep
      ->add_option("--job", sweep_opts.job,
                   "per-point job (census, lyapunov, region, renorm_depth)")
      ->required()
      ->check(
          CLI::IsMember({"census", "lyapunov", "region", "renorm_depth"}));
  sweep->add_option("--a-lo", sweep_opts.a_lo, "a range start");
  sweep->add_option("--a-hi", sweep_opts.a_hi, "a range end");
  sweep->add_option("--a-steps", sweep_opts.a_steps, "a grid points");
  sweep->add_option("--b-lo", sweep_opts.b_lo, "b range start");
  sweep->add_option("--b-hi", sweep_opts.b_hi, "b range end");
  sweep->add_option("--b-steps", sweep_opts.b_steps, "b grid points");
  sweep->add_option("--curve", sweep_opts.curve,
                    "sweep along a named curve instead of a grid (gamma0)");
  sweep->add_option("--t-lo", sweep_opts.t_lo, "curve parameter start");
  sweep->add_option("--t-hi", sweep_opts.t_hi, "curve parameter end");
  sweep->add_option("--t-steps", sweep_opts.t_steps, "curve grid points");
  sweep->add_option("--op", sweep_opts.op, "operator for renorm_depth")
      ->check(CLI::IsMember({"delta", "pi"}));
  sweep->add_option("--max-depth", sweep_opts.max_depth,
                    "depth cap for renorm_depth");
  sweep->add_option("--seeds", sweep_opts.seeds, "census seeds per point");
  sweep->add_option("--len", sweep_opts.len, "orbit length per point");
  sweep->add_option("--burn", sweep_opts.burn, "burn-in per point");
  sweep->add_option("--grid", sweep_opts.grid, "census resolution per point");
  sweep->add_option("--seed", sweep_opts.seed, "rng seed");
  add_common(sweep, "csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (!config_path.empty()) {
    if (app.get_subcommands().empty()) return run_config(config_path);
    std::cerr << "error: --config replaces the command line; give one or the "
                 "other\n";
    return kExitUsage;
  }

  try {
    if (region->parsed()) return cmd_region(a, b, common);
    if (attract->parsed()) {
      census.has_a = oa->count() > 0;
      census.has_b = ob->count() > 0;
      census.has_mu = omu->count() > 0;
      census.has_t = ot->count() > 0;
      return cmd_attractors(census, common);
    }
    if (renorm->parsed()) return cmd_renorm(a, b, renorm_op, depth, common);
    if (cascade->parsed())
      return cmd_cascade(cascade_n, tsteps, cascade_op, common);
    if (verify->parsed()) return cmd_verify(verify_opts, common);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, common);
    std::cerr << "error: no command given (see --help)\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ebm::NotFound& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const ebm::RegionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotFound;
  } catch (const ebm::OutOfRange& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ebm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}
