#include <doctest.h>

#include "runner.hpp"

using namespace symcap;

namespace {

const ReportFile& file(const RunResult& r, const std::string& name) {
  for (const auto& f : r.files) {
    if (f.name == name) return f;
  }
  FAIL("missing report file " << name);
  throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("config sections fall back to the global section") {
  const RunConfig c = RunConfig::parse(
      "# comment\n"
      "seed = 11\n"
      "samples = 500\n"
      "[meanwidth]\n"
      "  body = cube(1)   # trailing comment\n"
      "samples = 1000\n"
      "[global]\n"
      "workers = 3\n");
  CHECK(c.seed() == 11);
  CHECK(c.workers() == 3);
  CHECK(c.text("meanwidth", "body", "") == "cube(1)");
  CHECK(c.budget("meanwidth", "samples", 1) == 1000);
  CHECK(c.budget("green", "samples", 1) == 500);
  CHECK(c.text("green", "body", "none") == "none");
  CHECK(c.find("meanwidth", "body")->line == 5);
  CHECK(c.find("meanwidth", "body")->column == 10);
}

TEST_CASE("reopened sections override, duplicates in one block do not") {
  const RunConfig c = RunConfig::parse("[squash]\narea = 4\n[squash]\narea = 5\n");
  CHECK(c.number("squash", "area", 0) == doctest::Approx(5.0));
  try {
    RunConfig::parse("[squash]\narea = 4\narea = 5\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("config errors carry line and column") {
  const auto where = [](const std::string& text) {
    try {
      RunConfig::parse(text);
    } catch (const ParseError& e) {
      return std::make_pair(e.line(), e.column());
    }
    return std::make_pair(0, 0);
  };
  CHECK(where("seed = 1\n[broken\n") == std::make_pair(2, 1));
  CHECK(where("seed 1\n") == std::make_pair(1, 1));
  CHECK(where("a = 1\n  = 2\n") == std::make_pair(2, 3));
  CHECK(where("x = \n") == std::make_pair(1, 4));
  CHECK(where("bad key = 1\n") == std::make_pair(1, 4));

  const RunConfig c = RunConfig::parse("[squash]\np_grid = 4, x, 2\nsamples = -3\n");
  try {
    c.numbers("squash", "p_grid", {});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 13);
  }
  CHECK_THROWS_AS(c.budget("squash", "samples", 1), ParseError);
}

TEST_CASE("body errors point into the config text") {
  const RunConfig c = RunConfig::parse("[meanwidth]\nbody = sum(ball(1), blob(2))\n");
  try {
    run("meanwidth", c);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("blob") != std::string::npos);
    CHECK(e.line() == 2);
    CHECK(e.column() == 21);
  }
  const RunConfig l = RunConfig::parse("[green]\nbodies = ball(1); cube(1) ;frob\n");
  try {
    run("green", l);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.column() == 28);
  }
  CHECK_THROWS_AS(run("nope", c), ValidationError);
}

TEST_CASE("CSV fields round trip") {
  const std::vector<ReportRecord> rows{
      {"green", "ellipsoid(2,1)", "|(I_cos, I_sin)|", 1.5, 0.0, "NOT_MINIMAL", 7, 0},
      {"x", "say \"hi\"", "p", -0.25, 1e-3, "PASS", 1, 100},
  };
  const auto parsed = parse_csv(records_csv(rows));
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0][0] == "experiment");
  CHECK(parsed[1][1] == "ellipsoid(2,1)");
  CHECK(parsed[1][2] == "|(I_cos, I_sin)|");
  CHECK(parsed[2][1] == "say \"hi\"");
  CHECK(std::stod(parsed[2][3]) == -0.25);
  CHECK(parsed[2][7] == "100");
}

TEST_CASE("reports are bit-identical across runs and worker counts") {
  const std::string text = "seed = 5\n[meanwidth]\nbody = ellipsoid(1.5,1,0.8,1.2)\nsamples = 20000\n";
  const RunResult a = run("meanwidth", RunConfig::parse(text));
  const RunResult b = run("meanwidth", RunConfig::parse(text));
  const RunResult c = run("meanwidth", RunConfig::parse(text + "[global]\nworkers = 3\n"));
  CHECK(file(a, "meanwidth.csv").content == file(b, "meanwidth.csv").content);
  CHECK(file(a, "meanwidth.csv").content == file(c, "meanwidth.csv").content);
  CHECK(file(a, "meanwidth.csv").content.find(",5,20000") != std::string::npos);
  CHECK(file(a, "config.txt").content.find("seed: 5") != std::string::npos);
  CHECK(a.exit_code == 0);
}

TEST_CASE("squash run emits a (p, M) series") {
  const RunResult r = run("squash", RunConfig::parse("[squash]\np_grid = 8, 2\n"));
  CHECK(r.exit_code == 0);
  const auto series = parse_csv(file(r, "squash_series.csv").content);
  REQUIRE(series.size() == 3);
  CHECK(series[0] == std::vector<std::string>{"p", "M"});
  CHECK(series[2][0] == "2");
  CHECK(std::stod(series[2][1]) == doctest::Approx(4 / std::sqrt(kPi)));
}

TEST_CASE("plot series from F and search reports") {
  const auto ff = emit_plotdata({"ffunctions.csv", "t,F,F_err,Ftilde,Ftilde_err\n0.5,1.0,0.1,0.9,0.1\n"});
  REQUIRE(ff.size() == 2);
  CHECK(ff[0].content == "t,F\n0.5,1.0\n");
  CHECK(ff[1].content == "t,Ftilde\n0.5,0.9\n");
  const auto s = emit_plotdata({"search.csv", "step,M,M_err\n0,3,0\n1,2.9,0\n"});
  CHECK(s[0].content == "step,M\n0,3\n1,2.9\n");
  CHECK_THROWS_AS(emit_plotdata({"green.csv", "experiment\n"}), ValidationError);
  CHECK_THROWS_AS(emit_plotdata({"search.csv", ""}), ValidationError);
}

TEST_CASE("verdict words set the exit code") {
  const RunResult g = run("green", RunConfig::parse(""));
  CHECK(g.exit_code == 0);  // NOT_MINIMAL is an outcome
  const RunResult bad = run(
      "localmin", RunConfig::parse("[localmin]\nbody = ballproduct(rho=[1,2], I=[[1],[]], J=[[],[1]])\n"
                                   "directions = 2\nsamples = 20000\n"));
  CHECK(bad.exit_code == 1);
  CHECK(file(bad, "localmin.json").content.find("\"verdict\": \"FAIL\"") != std::string::npos);
  CHECK_THROWS_AS(run("localmin", RunConfig::parse("[localmin]\nbody = ellipsoid(2,1)\n")), ValidationError);
}

TEST_CASE("every command is listed") {
  const auto& c = run_commands();
  CHECK(c.size() == 13);
  CHECK(std::find(c.begin(), c.end(), "verify-all") != c.end());
}
