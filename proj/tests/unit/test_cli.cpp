#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "samplesize/cli.hpp"

namespace fs = std::filesystem;
using samplesize::run_cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "samplesize");
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("samplesize-cli-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_CASE("usage errors exit 2") {
  auto r = cli({"fit", "--input", "x.csv", "--bogus"});
  CHECK(r.code == 2);
  CHECK(r.out.empty());
  CHECK(r.err.find("Usage") != std::string::npos);

  CHECK(cli({}).code == 2);
  CHECK(cli({"saturate"}).code == 2);
  CHECK(cli({"fit", "--input", "x.csv", "--optimizer", "sgd"}).code == 2);
  CHECK(cli({"saturate", "--input", "r.json", "--alpha", "-1"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("missing input is a runtime error") {
  auto r = cli({"fit", "--input", "/nonexistent/points.csv"});
  CHECK(r.code == 1);
  CHECK(r.err.find("samplesize:") == 0);
}

TEST_CASE("synth, fit, saturate, required-size") {
  TempDir tmp;
  const auto pts = tmp / "pts.csv";
  const auto rep = tmp / "rep.json";
  REQUIRE(cli({"synth", "--model", "inverse", "--params", "0.1,0.5,-0.5",
               "--total", "10000", "--out", pts})
              .code == 0);
  REQUIRE(cli({"fit", "--input", pts, "--model", "inverse", "--out", rep})
              .code == 0);

  auto sat = cli({"saturate", "--input", rep, "--alpha", "0.2", "--reference",
                  "0.90"});
  REQUIRE(sat.code == 0);
  CHECK(sat.out.find("saturation count: 600\n") != std::string::npos);
  CHECK(sat.out.find("predicted accuracy: 0.8796\n") != std::string::npos);
  CHECK(sat.out.find("L1 distance: 2.04\n") != std::string::npos);

  auto req = cli({"required-size", "--input", rep, "--target", "0.95"});
  CHECK(req.code == 0);
  CHECK(req.out.find("unreachable (asymptote 0.9000)") != std::string::npos);

  auto ev = cli({"evaluate", "--input", rep, "--points", pts});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("mae\t") != std::string::npos);

  auto pred = cli({"predict", "--input", rep, "--fractions", "0.04,1"});
  CHECK(pred.code == 0);
  CHECK(pred.out.find("0.04\t400\t0.875") != std::string::npos);
}

TEST_CASE("repeated runs are byte-identical") {
  TempDir tmp;
  const auto pts = tmp / "pts.jsonl";
  REQUIRE(cli({"synth", "--model", "pow4", "--params", "0.9,0.01,1.5,0.8",
               "--total", "25000", "--sigma", "0.005", "--size-decay",
               "--seed", "4", "--out", pts})
              .code == 0);
  for (const std::string model : {"ensemble", "exp"}) {
    std::vector<std::string> args = {"fit",       "--input",     pts,
                                     "--model",   model,         "--weighting",
                                     "size",      "--seed",      "9"};
    auto a = cli(args);
    auto b = cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
  }
  auto p1 = cli({"plot", "--input", pts, "--models", "exp,inverse,pow4,ensemble"});
  auto p2 = cli({"plot", "--input", pts, "--models", "exp,inverse,pow4,ensemble"});
  CHECK(p1.code == 0);
  CHECK(p1.out == p2.out);

  auto s2 = tmp / "again.jsonl";
  cli({"synth", "--model", "pow4", "--params", "0.9,0.01,1.5,0.8", "--total",
       "25000", "--sigma", "0.005", "--size-decay", "--seed", "4", "--out",
       s2});
  CHECK(slurp(pts) == slurp(s2));
}

TEST_CASE("plot table shape") {
  TempDir tmp;
  const auto pts = tmp / "pts.csv";
  REQUIRE(cli({"synth", "--model", "exp", "--params", "0.4,0.06", "--total",
               "25000", "--out", pts})
              .code == 0);
  auto r = cli({"plot", "--input", pts, "--models", "exp,inverse"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "fraction\tcount\tobserved\texp\tinverse\trole");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == 5);
  }
  CHECK(rows == 28);
}

TEST_CASE("seed from the environment") {
  TempDir tmp;
  const auto a = tmp / "a.csv";
  const auto b = tmp / "b.csv";
  ::setenv("SAMPLESIZE_SEED", "77", 1);
  cli({"synth", "--model", "exp", "--params", "0.4,0.06", "--total", "1000",
       "--sigma", "0.01", "--out", a});
  ::unsetenv("SAMPLESIZE_SEED");
  cli({"synth", "--model", "exp", "--params", "0.4,0.06", "--total", "1000",
       "--sigma", "0.01", "--seed", "77", "--out", b});
  CHECK(slurp(a) == slurp(b));
}
