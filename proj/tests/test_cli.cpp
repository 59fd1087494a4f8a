#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bcq/cli.hpp"

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bcq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = bcq::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("stability") {
  const Run ok = run({"stability", "--lambda", "3", "--mu1", "6", "--mu2", "2", "--b", "80"});
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "bound=120 stable=true margin=117"));
  const Run bad = run({"stability", "--lambda", "3", "--mu1", "2", "--mu2", "2", "--b", "1"});
  CHECK(contains(bad.out, "stable=false"));
}

TEST_CASE("solve") {
  const Run r = run({"solve", "--lambda", "1.5", "--mu1", "2", "--mu2", "2", "--b", "10"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "1.5,2,2,10,64,0.75,1.02257447542"));

  CHECK(run({"solve", "--lambda", "3", "--mu1", "2", "--mu2", "2", "--b", "1"}).code == 1);
  CHECK(run({"solve", "--lambda", "-1", "--mu1", "2", "--mu2", "2", "--b", "1"}).code == 1);
  CHECK(run({"solve", "--lambda", "1.99", "--mu1", "2", "--mu2", "2", "--b", "2", "--jmax-cap", "256"}).code == 2);

  const Run j = run({"solve", "--json", "--lambda", "1.5", "--mu1", "2", "--mu2", "2", "--b", "10"});
  CHECK(j.code == 0);
  CHECK(j.out.front() == '{');
}

TEST_CASE("maxent") {
  const Run r = run({"maxent", "--I", "0.5", "--J", "3", "--b", "2"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "0.434258545911"));
  CHECK(contains(r.out, "0.75"));
  CHECK(run({"maxent", "--I", "5", "--J", "3", "--b", "2"}).code == 1);
  CHECK(run({"maxent", "--I", "1", "--J", "-3", "--b", "2"}).code == 1);
}

TEST_CASE("simulate") {
  const Run r = run({"simulate", "--lambda", "1.5", "--mu1", "2", "--mu2", "2", "--b", "10", "--horizon", "1e4"});
  CHECK(r.code == 0);
  CHECK(run({"simulate", "--lambda", "1.5", "--mu1", "2", "--mu2", "2", "--b", "10", "--horizon", "1e4"}).out == r.out);
  CHECK(run({"simulate", "--lambda", "1", "--mu1", "2", "--mu2", "2", "--b", "10", "--batches", "3"}).code == 1);
}

TEST_CASE("compare") {
  const Run r = run({"compare", "--lambda", "1.5", "--mu1", "2", "--mu2", "2", "--b", "10", "--horizon", "2e4",
                     "--seeds", "1,2"});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "within_3se"));
  CHECK(contains(r.err, "agreeing runs"));
  CHECK(run({"compare", "--lambda", "3", "--mu1", "2", "--mu2", "2", "--b", "1"}).code == 1);
}

TEST_CASE("sweep writes one row per point") {
  const std::string path = "test_cli_sweep.csv";
  const Run r = run({"sweep", "--example", "1", "--out", path});
  CHECK(r.code == 0);
  std::ifstream in(path);
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == 61);
  std::remove(path.c_str());

  CHECK(run({"sweep"}).code == 1);
  CHECK(run({"sweep", "--example", "9"}).code == 1);
  CHECK(run({"sweep", "--spec", "/nonexistent.json"}).code == 1);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"solve", "--lambda", "abc"}).code == 1);
}
