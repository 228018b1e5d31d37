#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_file(const std::string& stem) {
  static int counter = 0;
  return fs::temp_directory_path() /
         (stem + "_" + std::to_string(::getpid()) + "_" +
          std::to_string(++counter));
}

RunResult run_tool(const std::string& args) {
  const fs::path out = scratch_file("ebmlab_out");
  const fs::path err = scratch_file("ebmlab_err");
  const std::string cmd = std::string("\"") + EBMLAB_BIN_PATH + "\" " + args +
                          " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("region reports memberships as json") {
  const RunResult r = run_tool("region --a 1.05 --b 1.38");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == 1);
  CHECK(j["command"] == "region");
  CHECK(j["a"] == 1.05);
  CHECK(j["memberships"]["P"] == true);
  CHECK(j["memberships"]["P3"] == true);
  CHECK(j["memberships"]["PDelta"] == true);
  CHECK(j["memberships"]["P1"] == false);
  CHECK(j["boundary_b"].is_object());
}

TEST_CASE("region outside the parameter set still exits cleanly") {
  const RunResult r = run_tool("region --a 1.0 --b 1.5");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["memberships"]["P"] == false);
  CHECK(j["P1n"].is_null());
}

TEST_CASE("region reports the coexistence window index") {
  const json j = json::parse(run_tool("region --a 1.15 --b 1.10").out);
  CHECK(j["P1n"] == 2);
  CHECK(j["memberships"]["P1"] == true);
}

TEST_CASE("attractor census command is deterministic") {
  const std::string args =
      "attractors --map gamma --mu 1.3 --seeds 16 --len 50000 --burn 5000 "
      "--grid 256 --seed 1";
  const RunResult r1 = run_tool(args);
  REQUIRE(r1.code == 0);
  const json j = json::parse(r1.out);
  CHECK(j["command"] == "attractors");
  CHECK(j["distinct_count"] == 2);
  CHECK(j["attractors"].size() == 2);
  const RunResult r2 = run_tool(args);
  CHECK(r1.out == r2.out);
}

TEST_CASE("census cell dump has the documented header") {
  const fs::path csv = scratch_file("cells");
  const RunResult r = run_tool(
      "attractors --map gamma --mu 1.3 --seeds 4 --len 20000 --burn 2000 "
      "--grid 64 --seed 1 --cells-out " +
      csv.string());
  REQUIRE(r.code == 0);
  const std::string text = slurp(csv);
  fs::remove(csv);
  CHECK(text.rfind("attractor,cell_x,cell_y,x,y\n", 0) == 0);
  CHECK(count_lines(text) > 10);
}

TEST_CASE("attractors requires the parameters of the chosen family") {
  CHECK(run_tool("attractors --map gamma --a 1.2 --b 1.1").code == 2);
  CHECK(run_tool("attractors --map psi --a 1.2").code == 2);
  CHECK(run_tool("attractors --map nosuch --mu 1.3").code == 2);
}

TEST_CASE("renorm tree at the spectral fixed point stays valid") {
  const RunResult r =
      run_tool("renorm --a 1 --b 1.4142135623730951 --depth 2");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["nodes"].size() == 7);
  for (const auto& node : j["nodes"]) {
    CHECK(node["valid"] == true);
    CHECK(double(node["a"]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(double(node["b"]) ==
          doctest::Approx(1.4142135623730951).epsilon(1e-12));
  }
}

TEST_CASE("renorm children outside the admissible closure are flagged") {
  const json j = json::parse(run_tool("renorm --a 1.9 --b 1.05 --depth 1").out);
  REQUIRE(j["nodes"].size() == 3);
  CHECK(j["nodes"][0]["valid"] == true);
  CHECK(j["nodes"][1]["valid"] == false);
  CHECK(j["nodes"][2]["valid"] == false);
}

TEST_CASE("cascade search reports the window or a clean miss") {
  CHECK(run_tool("cascade --n 1 --tsteps 2000").code == 3);
  const RunResult hit = run_tool("cascade --n 1 --tsteps 20000");
  REQUIRE(hit.code == 0);
  const json j = json::parse(hit.out);
  CHECK(j["n"] == 1);
  CHECK(j["window"] >= 2);
  CHECK(j["predicted_attractors"] >= 2);
  CHECK(double(j["t_lo"]) < double(j["t_mid"]));
  CHECK(double(j["t_mid"]) < double(j["t_hi"]));
}

TEST_CASE("verification suites pass") {
  const json spectral = json::parse(run_tool("verify --suite spectral").out);
  CHECK(spectral["pass"] == true);
  const json continuity =
      json::parse(run_tool("verify --suite continuity --samples 300").out);
  CHECK(continuity["pass"] == true);
}

TEST_CASE("region sweep emits one csv row per grid point") {
  const RunResult r = run_tool(
      "sweep --job region --a-lo 1.05 --a-hi 1.15 --a-steps 3 "
      "--b-lo 1.0 --b-hi 1.2 --b-steps 3");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("a,b,P,P1,P2,PDelta,P3,P1n,P2n\n", 0) == 0);
  CHECK(count_lines(r.out) == 10);  // header + 9 points
}

TEST_CASE("curve sweep prepends the curve parameter column") {
  const RunResult r = run_tool(
      "sweep --job renorm_depth --curve gamma0 --t-lo 0.708 --t-hi 0.72 "
      "--t-steps 4");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,a,b,depth\n", 0) == 0);
  CHECK(count_lines(r.out) == 5);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_tool("").code == 2);
  CHECK(run_tool("region --a 1.05").code == 2);       // missing --b
  CHECK(run_tool("region --a 1.05 --b 1.2 --bogus").code == 2);
  CHECK(run_tool("nosuchcommand").code == 2);
}

TEST_CASE("config file replays identically to flags") {
  const fs::path cfg = scratch_file("job");
  {
    std::ofstream out(cfg);
    out << R"({"command": "region", "parameters": {"a": 1.05, "b": 1.38}})";
  }
  const RunResult from_cfg = run_tool("--config " + cfg.string());
  fs::remove(cfg);
  const RunResult from_flags = run_tool("region --a 1.05 --b 1.38");
  REQUIRE(from_cfg.code == 0);
  CHECK(from_cfg.out == from_flags.out);
  // config and a direct command are mutually exclusive
  CHECK(run_tool("--config " + cfg.string() + " region --a 1 --b 1").code ==
        2);
}

TEST_CASE("output lands in the file given by --out") {
  const fs::path out = scratch_file("region_json");
  const RunResult r =
      run_tool("region --a 1.05 --b 1.38 --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const json j = json::parse(slurp(out));
  fs::remove(out);
  CHECK(j["command"] == "region");
}
