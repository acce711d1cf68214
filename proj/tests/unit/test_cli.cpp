#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string(SYMCAP_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) o.out += buf;
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("symcap_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("CLI: mean width of the ball") {
  const Outcome o = cli("meanwidth --body 'ball(2)' --samples 100000");
  CHECK(o.code == 0);
  CHECK(o.out.find("meanwidth,ball(2),M (Monte Carlo),2,") != std::string::npos);
}

TEST_CASE("CLI: report files and seeds") {
  const fs::path d = scratch("files");
  const Outcome o = cli("squash --p-grid 64,2 --seed 3 --out " + d.string());
  CHECK(o.code == 0);
  CHECK(fs::exists(d / "squash.csv"));
  CHECK(fs::exists(d / "squash_series.csv"));
  CHECK(fs::exists(d / "timing.csv"));
  CHECK(slurp(d / "squash.csv").find(",3,0\n") != std::string::npos);

  const Outcome p = cli("plotdata --report " + (d / "squash.csv").string() + " --out " + (d / "again").string());
  CHECK(p.code == 0);
  CHECK(slurp(d / "again" / "squash_series.csv") == slurp(d / "squash_series.csv"));
  fs::remove_all(d);
}

TEST_CASE("CLI: identical runs give identical bytes") {
  const fs::path a = scratch("a"), b = scratch("b");
  CHECK(cli("capacity --body 'cube(1)' --modes 4 --starts 2 --out " + a.string()).code == 0);
  CHECK(cli("capacity --body 'cube(1)' --modes 4 --starts 2 --workers 2 --out " + b.string()).code == 0);
  CHECK(slurp(a / "capacity.json") == slurp(b / "capacity.json"));
  CHECK(slurp(a / "capacity.json").find("\"normalized\"") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("CLI: exit codes") {
  const Outcome bad = cli("meanwidth --body 'bal(2)'");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("'bal'") != std::string::npos);
  CHECK(cli("meanwidth --samples 0").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("localmin --body 'ballproduct(rho=[1,2], I=[[1],[]], J=[[],[1]])' --directions 2 --samples 20000").code == 1);
  CHECK(cli("green").code == 0);
  CHECK(cli("meanwidth --config /nonexistent/config.txt").code == 2);
}

TEST_CASE("CLI: config file with flag overrides") {
  const fs::path d = scratch("cfg");
  fs::create_directories(d);
  std::ofstream(d / "run.cfg") << "seed = 4\n[meanwidth]\nbody = cube(1)\nsamples = 1000\n";
  const Outcome o = cli("meanwidth --config " + (d / "run.cfg").string() + " --samples 2000");
  CHECK(o.code == 0);
  CHECK(o.out.find("cube(1)") != std::string::npos);
  CHECK(o.out.find(",4,2000") != std::string::npos);

  std::ofstream(d / "bad.cfg") << "[meanwidth]\nbody = cube(1)\nbody = ball(1)\n";
  const Outcome e = cli("meanwidth --config " + (d / "bad.cfg").string());
  CHECK(e.code == 2);
  CHECK(e.out.find("line 3") != std::string::npos);
  fs::remove_all(d);
}
