#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "tunnel/io.hpp"
#include "tunnel/quantum.hpp"

namespace fs = std::filesystem;
using tunnel::cli::run;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tunnel_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> lines(const fs::path& f) {
  std::ifstream in(f);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

nlohmann::json manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  return nlohmann::json::parse(in);
}

const std::string quartic = R"({"kind": "quartic", "parameters": {"a": 1}})";
const std::string pendulum = R"({"kind": "pendulum", "parameters": {"gamma": 1}})";
const std::string triple = R"({"kind": "triple_well", "parameters": {"a": 1.75, "b": 0.5}})";

}  // namespace

TEST_CASE("golden CSV headers") {
  CHECK(tunnel::csv::preamble("scan") == "# tunnel.scan schema 1");
  CHECK(tunnel::csv::spectrum_header == "n,E_plus,E_minus,splitting,flags");
  CHECK(tunnel::csv::levels_header == "n,parity,energy");
  CHECK(tunnel::csv::scan_header == "hbar_inverse,level,method,ln_exact,ln_semiclassical,ln_ratio,lambda,flags");
  CHECK(tunnel::csv::trace_grid_header == "re_T,im_T,re_delta0,im_delta0");
  CHECK(tunnel::csv::trajectory_header == "s,re_q,im_q,re_p,im_p,re_t,im_t");
  CHECK(tunnel::csv::staircase_header == "segment,direction,duration");
}

TEST_CASE("spectrum of the quartic at hbar = 1/12") {
  auto dir = scratch("spectrum");
  REQUIRE(run({"spectrum", "--potential", quartic, "--hbar-inverse", "12", "--levels", "3", "--out", dir.string()}) == 0);
  auto l = lines(dir / "spectrum.csv");
  REQUIRE(l.size() == 5);
  CHECK(l[0] == "# tunnel.spectrum schema 1");
  CHECK(l[1] == tunnel::csv::spectrum_header);
  std::stringstream row(l[2]);
  std::string n, ep, em, gap;
  std::getline(row, n, ',');
  std::getline(row, ep, ',');
  std::getline(row, em, ',');
  std::getline(row, gap, ',');
  CHECK(std::stod(gap) == Catch::Approx(4.4e-10).epsilon(0.15));
  auto m = manifest(dir);
  CHECK(m["command"] == "spectrum");
  CHECK(m["potential"]["kind"] == "quartic");
  CHECK(m["basis"]["kind"] == "fourier_grid");
}

TEST_CASE("pendulum spectrum follows the Mathieu values") {
  auto dir = scratch("pendulum");
  REQUIRE(run({"spectrum", "--potential", pendulum, "--hbar-inverse", "2", "--levels", "3", "--out", dir.string()}) == 0);
  auto l = lines(dir / "levels.csv");
  REQUIRE(l.size() >= 3);
  std::stringstream row(l[2]);
  std::string n, parity, energy;
  std::getline(row, n, ',');
  std::getline(row, parity, ',');
  std::getline(row, energy, ',');
  auto m = tunnel::mathieu_characteristics(tunnel::mathieu_parameter(1, 0.5), 1);
  CHECK(parity == "even");
  CHECK(std::stod(energy) == Catch::Approx(0.25 * 0.25 / 2 * m.a(0)).epsilon(1e-10));
}

TEST_CASE("trace grid writes every grid point") {
  auto dir = scratch("trace");
  REQUIRE(run({"trace-grid", "--potential", quartic, "--T-grid", "0:10:3,-4:-4:1", "--out", dir.string()}) == 0);
  auto l = lines(dir / "trace_grid.csv");
  CHECK(l.size() == 5);
  CHECK(manifest(dir)["plateau_flatness"].get<double>() < 1e-2);
}

TEST_CASE("usage and configuration errors exit with 2") {
  auto dir = scratch("errors");
  CHECK(run({"trace-grid", "--potential", quartic, "--T-grid", "0:10:0,-4:-4:1", "--out", dir.string()}) == 2);
  CHECK(run({"trace-grid", "--potential", quartic, "--out", dir.string()}) == 2);
  CHECK(run({"spectrum", "--potential", R"({"kind": "banana"})", "--out", dir.string()}) == 2);
  CHECK(run({"spectrum", "--potential", (dir / "missing.json").string(), "--out", dir.string()}) == 2);
  CHECK(run({"scan", "--potential", quartic, "--hbar-inverse", "8:6:3", "--out", dir.string()}) == 2);
  CHECK(run({"scan", "--potential", quartic, "--methods", "nonsense", "--out", dir.string()}) == 2);
  CHECK(run({"bogus"}) == 2);
}

TEST_CASE("malformed topology surfaces as an error") {
  auto dir = scratch("topology");
  CHECK(run({"orbit", "--potential", quartic, "--energy", "0.3", "--family", "sequence", "--sequence", "0.1,0.2",
             "--eta", "1", "--out", dir.string()}) == 2);
  CHECK(run({"orbit", "--potential", pendulum, "--energy", "0.5", "--family", "pendulum", "--out", dir.string()}) == 2);
}

TEST_CASE("orbit command writes trajectory and staircase") {
  auto dir = scratch("orbit");
  REQUIRE(run({"orbit", "--potential", quartic, "--energy", "1e-3", "--wr", "1", "--eta", "-1", "--out",
               dir.string()}) == 0);
  auto t = lines(dir / "trajectory.csv");
  CHECK(t[1] == tunnel::csv::trajectory_header);
  CHECK(t.size() > 100);
  auto s = lines(dir / "staircase.csv");
  REQUIRE(s.size() == 4);
  CHECK(s[2].find("real") != std::string::npos);
  CHECK(s[3].find("imaginary") != std::string::npos);
  auto m = manifest(dir);
  CHECK(m["residuals"]["closure"].get<double>() < 1e-8);
}

TEST_CASE("scan over 1/hbar in grid order") {
  auto dir = scratch("scan");
  REQUIRE(run({"scan", "--potential", pendulum, "--hbar-inverse", "2:3:3", "--level", "3", "--methods",
               "exact,excited,pendulum_asymptotic", "--threads", "2", "--out", dir.string()}) == 0);
  auto l = lines(dir / "scan.csv");
  REQUIRE(l.size() == 2 + 9);
  CHECK(l[2].rfind("2,3,exact,", 0) == 0);
  CHECK(l[5].rfind("2.5,3,exact,", 0) == 0);
  CHECK(l[8].rfind("3,3,exact,", 0) == 0);
  auto m = manifest(dir);
  CHECK(m["methods"].size() == 3);
}

TEST_CASE("config file overrides flags") {
  auto dir = scratch("config");
  auto cfg = dir / "run.json";
  std::ofstream(cfg) << R"({"potential": )" << triple << R"(, "hbar_inverse": 6.5, "methods": ["resonant_limit"],
    "out": ")" << (dir / "out").string() << R"("})";
  REQUIRE(run({"scan", "--potential", quartic, "--hbar-inverse", "3", "--config", cfg.string(), "--out",
               dir.string()}) == 0);
  CHECK(fs::exists(dir / "out" / "scan.csv"));
  CHECK(manifest(dir / "out")["potential"]["kind"] == "triple_well");
}

TEST_CASE("strict mode promotes precondition warnings") {
  auto dir = scratch("strict");
  CHECK(run({"trace-grid", "--potential", quartic, "--T", "1,-0.1", "--out", dir.string()}) == 0);
  CHECK(run({"trace-grid", "--potential", quartic, "--T", "1,-0.1", "--strict", "--out", dir.string()}) == 4);
}

TEST_CASE("numerical failures exit with 3") {
  auto dir = scratch("numerical");
  CHECK(run({"spectrum", "--potential", quartic, "--hbar-inverse", "12", "--tolerances",
             R"({"initial_points": 6, "max_points": 6})", "--out", dir.string()}) == 3);
}
