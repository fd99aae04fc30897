#include "doctest.h"

#include "holo/cli.hpp"
#include "holo/config.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = holo::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string cfg(const char* name) { return std::string(HOLO_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("holo_cli_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) { return holo::config::read_file(p.string()); }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("alpha table") {
  const auto r = run({"alpha", "--rule", "quad", "--n-max", "6"});
  CHECK(r.code == 0);
  CHECK(r.out.find(",6,30240,7/22,") != std::string::npos);
  CHECK(lines(r.out) == 7);
  const auto f = run({"alpha", "--rule", "factorial", "--n-max", "5"});
  CHECK(f.out.find(",5,120,1/1,1\n") != std::string::npos);
}

TEST_CASE("usage and config errors exit 2") {
  auto r = run({"alpha", "--n-max", "3", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.err.find("usage error") != std::string::npos);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"solve", "--config", "/nonexistent.toml"}).code == 2);
  CHECK(run({"solve", "--config", cfg("fourier_linear.toml"), "--y", "0.1,abc"}).code == 2);
  CHECK(run({"solve", "--config", cfg("fourier_linear.toml"), "--problem", "semilinear"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("assumption violation exits 3") {
  const auto r = run({"solve", "--config", cfg("violating.toml"), "--y", "0.1"});
  CHECK(r.code == 3);
  CHECK(r.err.find("assumption error") != std::string::npos);
  CHECK(r.err.find("lower-bound") != std::string::npos);
}

TEST_CASE("solve and dump") {
  const auto dir = scratch("solve");
  const auto r = run({"solve", "--config", cfg("affine.toml"), "--y", "0.2", "--dump-u", (dir / "u.csv").string(),
                      "--out", (dir / "pair.csv").string()});
  REQUIRE(r.code == 0);
  const std::string pair = slurp(dir / "pair.csv");
  CHECK(pair.rfind("config_hash,kind,y,lambda", 0) == 0);
  const std::string hash = holo::config::load_config(cfg("affine.toml")).hash;
  CHECK(pair.find(hash + ",linear,0.20000000000000001,") != std::string::npos);
  CHECK(lines(slurp(dir / "u.csv")) == 1 + 65);
  CHECK(fs::exists(dir / "pair.csv.manifest.json"));
  const auto m = nlohmann::json::parse(slurp(dir / "pair.csv.manifest.json"));
  CHECK(m["config_hash"] == hash);
  CHECK(m["command"] == "solve");
  CHECK(m["versions"].contains("boost"));
  fs::remove_all(dir);
}

TEST_CASE("derivative methods through the CLI") {
  for (const char* m : {"contour", "fd", "cheb"}) {
    const auto r = run({"derivs", "--config", cfg("affine.toml"), "--j", "2", "--n-max", "2", "--method", m, "--y",
                        "0.1,0.1"});
    REQUIRE(r.code == 0);
    // d lambda / d y_2 = c_2 = 0.5 / 4 for constant B modes.
    std::istringstream ss(r.out);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream rs(row);
    while (std::getline(rs, cell, ',')) cells.push_back(cell);
    CHECK(std::stod(cells[5]) == doctest::Approx(0.125).epsilon(1e-6));
  }
  CHECK(run({"derivs", "--config", cfg("affine.toml"), "--j", "9"}).code == 2);
}

TEST_CASE("qmc studies are byte-identical on rerun and merge in report") {
  const auto a = scratch("qa"), b = scratch("qb");
  const std::vector<std::string> base{"qmc", "--integrand", "product", "--N", "101,211,401,809", "--R", "8", "--mc"};
  auto args = base;
  args.insert(args.end(), {"--s", "6", "--out", (a / "study.csv").string()});
  REQUIRE(run(args).code == 0);
  const std::string first = slurp(a / "study.csv");
  REQUIRE(run(args).code == 0);
  CHECK(slurp(a / "study.csv") == first);
  CHECK(lines(first) == 9);

  args = base;
  args.insert(args.end(), {"--s", "3", "--out", (b / "study.csv").string()});
  REQUIRE(run(args).code == 0);

  std::ofstream(b / "junk.manifest.json") << "{not json";
  const auto rep = run({"report", a.string(), b.string(), (a / "missing").string()});
  CHECK(rep.code == 0);
  CHECK(rep.err.find("corrupted manifest") != std::string::npos);
  CHECK(rep.err.find("not a directory") != std::string::npos);
  CHECK(lines(rep.out) == 1 + 16);

  // Sorted by (s, N): the s = 3 block comes first and N increases within it.
  std::istringstream ss(rep.out);
  std::string line;
  std::getline(ss, line);
  CHECK(line.rfind("kind,config_hash,method,N,s,", 0) == 0);
  double last_s = 0, last_N = 0;
  while (std::getline(ss, line)) {
    std::vector<std::string> c;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) c.push_back(cell);
    const double N = std::stod(c[3]), s = std::stod(c[4]);
    CHECK((s > last_s || (s == last_s && N >= last_N)));
    last_s = s;
    last_N = N;
  }

  // Idempotent: merging the same directory twice changes nothing.
  const auto once = run({"report", a.string()});
  const auto twice = run({"report", a.string(), a.string()});
  CHECK(once.out == twice.out);
  CHECK(run({"report", (a / "missing").string()}).code == 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("geometry check") {
  const auto r = run({"geometry", "check", "--profile", cfg("profile.toml")});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("config_hash,j,b_j,rho_j,R_minor,R_major,radius,included\n", 0) == 0);
  CHECK(r.out.find(",false\n") == std::string::npos);
  CHECK(r.err.find("admissible=true") != std::string::npos);
}

TEST_CASE("certify and validate round trip") {
  const auto dir = scratch("cert");
  const std::string cert = (dir / "cert.json").string(), rep = (dir / "report.csv").string();
  REQUIRE(run({"certify", "--config", cfg("affine_tight.toml"), "--out", cert}).code == 0);
  const auto j = nlohmann::json::parse(slurp(cert));
  CHECK(j.contains("beta"));
  CHECK(j.contains("M_gamma"));
  CHECK(j["config_hash"] == holo::config::load_config(cfg("affine_tight.toml")).hash);
  REQUIRE(run({"validate", "--cert", cert, "--nu", "2,1", "--points", "2", "--out", rep}).code == 0);
  REQUIRE(run({"validate", "--cert", cert, "--nu", "1", "--points", "2", "--out", rep}).code == 0);
  const std::string csv = slurp(rep);
  CHECK(lines(csv) == 3);
  CHECK(csv.find("\"2,1\"") != std::string::npos);
  CHECK(csv.find(",false,") == std::string::npos);
  CHECK(run({"validate", "--cert", cert, "--config", cfg("affine.toml")}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("out creates missing directories") {
  const fs::path dir = scratch("mkdir");
  const fs::path out = dir / "a" / "b" / "alpha.csv";
  CHECK(run({"alpha", "--rule", "quad", "--n-max", "3", "--out", out.string()}).code == 0);
  CHECK(lines(slurp(out)) == 4);
  CHECK(fs::exists(out.string() + ".manifest.json"));
  fs::remove_all(dir);
}
