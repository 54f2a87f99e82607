#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Scratch directory for one test case, removed afterwards.
class Scratch {
 public:
  explicit Scratch(const std::string& tag)
      : dir_(fs::temp_directory_path() / ("interpband_cli_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  fs::path operator/(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

Result run(const std::string& args) {
  static int counter = 0;
  const fs::path base = fs::temp_directory_path() / ("interpband_cli_io_" + std::to_string(::getpid()) + "_" +
                                                     std::to_string(counter++));
  const std::string cmd = std::string(INTERPBAND_CLI) + " " + args + " >" + base.string() + ".out 2>" +
                          base.string() + ".err";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base.string() + ".out");
  r.err = slurp(base.string() + ".err");
  fs::remove(base.string() + ".out");
  fs::remove(base.string() + ".err");
  return r;
}

const std::string kData = INTERPBAND_TEST_DATA;

}  // namespace

TEST_CASE("bound calculator", "[cli]") {
  auto r = run("bound --r-n 10000 --d 1 --C 25 --L 10");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("bound: 96.45061728") != std::string::npos);

  r = run("bound --r-n 10000 --d 1 --C 1 --L 10 --tol 0.01");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("minimal L for bound <= 0.01: 37") != std::string::npos);

  r = run("bound --r-n 100 --C 4 --L 5 --holder-alpha 0.5 --C-tilde 2");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("bound: 14.14213562") != std::string::npos);
  CHECK(r.out.find("L_n = omega(r_n^(1/(2*alpha)))") != std::string::npos);

  CHECK(run("bound --r-n 1 --C 1 --L 1").code == 2);
  CHECK(run("bound --r-n 1 --C 1 --L 3 --holder-alpha 1.5").code == 2);
}

TEST_CASE("interp-error reproduces the reference panel", "[cli]") {
  const auto r = run("interp-error --L 4,8,10");
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "L,a.x,m.x");
  const double want[3][3] = {{4, 3.444, 1.542}, {8, 2.608, 1.215}, {10, 1.720, 0.820}};
  for (const auto& w : want) {
    REQUIRE(std::getline(is, line));
    double L = 0, ax = 0, mx = 0;
    char c1 = 0, c2 = 0;
    std::istringstream(line) >> L >> c1 >> ax >> c2 >> mx;
    CHECK(L == w[0]);
    CHECK(std::abs(ax - w[1]) <= 0.01);
    CHECK(std::abs(mx - w[2]) <= 0.01);
  }
  CHECK(run("interp-error --function nope").code == 2);
}

TEST_CASE("band output matches the frozen golden files", "[cli]") {
  Scratch tmp("golden");
  const auto r = run("band --data " + kData + "/did_d1.csv --target dtt --a 1 --b 0.3 --B 199 --seed 2024 --out " +
                     (tmp / "band_d1").string() + " --out-points 41");
  REQUIRE(r.code == 0);
  for (const char* name : {"band_d1.json", "band_d1.alpha0.1.csv", "band_d1.alpha0.05.csv", "band_d1.alpha0.01.csv"}) {
    INFO(name);
    CHECK(slurp(tmp / name) == slurp(fs::path(kData) / "golden" / name));
  }
}

TEST_CASE("band artifacts do not depend on the thread count", "[cli]") {
  Scratch tmp("threads");
  const std::string common = "band --data " + kData + "/did_d2.csv --target cf --L 9 --B 99 --seed 5 --dump-draws";
  REQUIRE(run(common + " --threads 1 --out " + (tmp / "one").string()).code == 0);
  REQUIRE(run(common + " --threads 4 --out " + (tmp / "four").string()).code == 0);
  for (const char* suffix : {".alpha0.1.csv", ".alpha0.05.csv", ".alpha0.01.csv", ".draws.csv"}) {
    INFO(suffix);
    CHECK(slurp(tmp / (std::string("one") + suffix)) == slurp(tmp / (std::string("four") + suffix)));
  }
  // metadata differs only in the file names it records
  std::string a = slurp(tmp / "one.json"), b = slurp(tmp / "four.json");
  for (std::size_t p; (p = a.find("\"one.")) != std::string::npos;) a.replace(p, 5, "\"X.");
  for (std::size_t p; (p = b.find("\"four.")) != std::string::npos;) b.replace(p, 6, "\"X.");
  CHECK(a == b);
}

TEST_CASE("band with doubled r_n keeps the same half-widths", "[cli]") {
  // sigma scales with sqrt(r_n) and t is scale free, so sigma t / sqrt(r_n)
  // is unchanged.
  Scratch tmp("rn");
  const std::string common = "band --data " + kData + "/did_d1.csv --target cf --L 15 --B 99 --seed 3 --alpha 0.05";
  REQUIRE(run(common + " --out " + (tmp / "base").string()).code == 0);
  REQUIRE(run(common + " --r-n 800 --out " + (tmp / "double").string()).code == 0);
  std::istringstream a(slurp(tmp / "base.alpha0.05.csv")), b(slurp(tmp / "double.alpha0.05.csv"));
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  int rows = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    double xa, loa, ca, ua, xb, lob, cb, ub;
    char c;
    std::istringstream(la) >> xa >> c >> loa >> c >> ca >> c >> ua;
    std::istringstream(lb) >> xb >> c >> lob >> c >> cb >> c >> ub;
    CHECK(xa == xb);
    CHECK(ca == cb);
    CHECK(std::abs((ua - ca) - (ub - cb)) <= 1e-12);
    CHECK(std::abs((ca - loa) - (cb - lob)) <= 1e-12);
    ++rows;
  }
  CHECK(rows == 201);
}

TEST_CASE("exit codes", "[cli]") {
  Scratch tmp("codes");
  // usage
  CHECK(run("").code == 2);
  CHECK(run("band --data " + kData + "/did_d1.csv --L 5 --out " + (tmp / "x").string()).code == 2);  // no seed
  CHECK(run("simulate --n 100").code == 2);
  CHECK(run("mc --preset nope --seed 1").code == 2);
  CHECK(run("band --data " + kData + "/did_d1.csv --L 5 --a 1 --b 0.3 --seed 1 --out " + (tmp / "x").string()).code == 2);

  // data
  {
    std::ofstream bad(tmp / "bad.csv");
    bad << "y1,d,t\n0.5,1,0\n0.1,,1\n";
  }
  auto r = run("band --data " + (tmp / "bad.csv").string() + " --L 5 --seed 1 --out " + (tmp / "x").string());
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
  {
    std::ofstream empty_group(tmp / "eg.csv");
    empty_group << "y1,d,t\n0.5,1,0\n0.1,0,1\n0.2,0,0\n";
  }
  r = run("band --data " + (tmp / "eg.csv").string() + " --L 5 --lo 0 --hi 1 --seed 1 --B 9 --out " +
          (tmp / "x").string());
  CHECK(r.code == 3);
  CHECK(r.err.find("treated=1, period=1") != std::string::npos);
  CHECK(run("band --data " + (tmp / "missing.csv").string() + " --L 5 --seed 1 --out " + (tmp / "x").string()).code == 3);

  // numeric: the period-1 groups sit so far right that no symmetric square
  // holds 90% of the mixture, so the region root has no bracket
  {
    std::ofstream cfg(tmp / "far.json");
    cfg << R"({"d": 2, "n": 100, "a": 1, "b": 0.3, "R": 2, "B": 9, "dgp": {"gamma": 100}})";
  }
  r = run("mc --config " + (tmp / "far.json").string() + " --seed 1");
  CHECK(r.code == 4);
  CHECK(r.err.find("replication 0") != std::string::npos);
}

TEST_CASE("mc guardrail and config validation", "[cli]") {
  Scratch tmp("mc");
  auto r = run("mc --preset uni-full --seed 1");
  CHECK(r.code == 2);
  CHECK(r.err.find("--long") != std::string::npos);
  CHECK(run("mc --preset biv-full --seed 1").code == 2);
  {
    std::ofstream cfg(tmp / "big.json");
    cfg << R"({"n": [250, 500], "a": 1, "b": 0.3, "R": 5000, "B": 999})";
  }
  r = run("mc --config " + (tmp / "big.json").string() + " --seed 1");
  CHECK(r.code == 2);
  CHECK(r.err.find("--long") != std::string::npos);

  auto config_error = [&](const std::string& body) {
    {
      std::ofstream cfg(tmp / "c.json");
      cfg << body;
    }
    const auto res = run("mc --config " + (tmp / "c.json").string() + " --seed 1 --R 1 --B 9");
    CHECK(res.code == 2);
    return res.err;
  };
  CHECK(config_error(R"({"n": 100, "a": 1, "b": 0.3, "colour": 1})").find("design.colour") != std::string::npos);
  CHECK(config_error(R"({"a": 1, "b": 0.3})").find("design.n") != std::string::npos);
  CHECK(config_error(R"({"n": 100, "a": 1, "b": 0.3, "alphas": [0.1, 2]})").find("design.alphas[1]") != std::string::npos);
  CHECK(config_error(R"({"n": 100, "a": 1, "b": 0.3, "dgp": {"rho": 1.5}})").find("design.dgp.rho") != std::string::npos);
  CHECK(config_error(R"({"n": 100, "a": 1, "b": 0.3, "d": 3})").find("design.d") != std::string::npos);
  CHECK(config_error(R"({"n": "many", "a": 1, "b": 0.3})").find("design.n") != std::string::npos);
  CHECK(config_error("{not json").find("design") != std::string::npos);
}

TEST_CASE("mc runs are repeatable and thread invariant", "[cli]") {
  Scratch tmp("mcdet");
  {
    std::ofstream cfg(tmp / "small.json");
    cfg << R"({"d": 1, "n": [120, 200], "a": 1, "b": 0.3, "R": 6, "B": 19})";
  }
  const std::string base = "mc --config " + (tmp / "small.json").string() + " --seed 11";
  REQUIRE(run(base + " --threads 1 --out " + (tmp / "a.csv").string() + " --audit " + (tmp / "a.log").string()).code == 0);
  REQUIRE(run(base + " --threads 3 --out " + (tmp / "b.csv").string() + " --audit " + (tmp / "b.log").string()).code == 0);
  REQUIRE(run(base + " --threads 1 --out " + (tmp / "c.csv").string()).code == 0);
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));
  CHECK(slurp(tmp / "a.csv") == slurp(tmp / "c.csv"));
  CHECK(slurp(tmp / "a.log") == slurp(tmp / "b.log"));
  const std::string table = slurp(tmp / "a.csv");
  CHECK(table.rfind("n,a,b,L_DTT,L2_DTT,cov90,cov95,cov99,L_CF,L2_CF,cov90,cov95,cov99\n", 0) == 0);
  CHECK(std::count(table.begin(), table.end(), '\n') == 3);

  const auto md = run(base + " --format markdown");
  REQUIRE(md.code == 0);
  CHECK(md.out.rfind("| n | a | b |", 0) == 0);
}

TEST_CASE("simulate is seeded", "[cli]") {
  const auto a = run("simulate --d 2 --n 50 --seed 9");
  const auto b = run("simulate --d 2 --n 50 --seed 9");
  const auto c = run("simulate --d 2 --n 50 --seed 10");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(a.out.rfind("y1,y2,d,t\n", 0) == 0);
  CHECK(run("simulate --d 3 --n 50 --seed 9").code == 2);
}
