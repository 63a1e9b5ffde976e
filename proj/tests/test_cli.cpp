#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int code;
  std::string out;  // stdout and stderr interleaved
};

CmdResult run(const std::string& args) {
  std::string cmd = std::string(OKM_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, got);
  int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch() {
  fs::path dir = fs::temp_directory_path() / "okm_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

const char* kLine34 =
    "m 3\nn 4\nk 2\nweights 1 1 0 0\n"
    "costs 0 5 10 11 4 1 6 7 10 5 0 1\n";

}  // namespace

TEST_CASE("gen writes identical files for identical seeds", "[cli]") {
  fs::path dir = scratch();
  auto a = run("gen -m 4 -n 5 -k 2 --seed 7 -o " + (dir / "g1.okm").string());
  auto b = run("gen -m 4 -n 5 -k 2 --seed 7 -o " + (dir / "g2.okm").string());
  auto c = run("gen -m 4 -n 5 -k 2 --seed 8 -o " + (dir / "g3.okm").string());
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(c.code == 0);
  REQUIRE(a.out.find("wrote") != std::string::npos);
  REQUIRE(slurp(dir / "g1.okm") == slurp(dir / "g2.okm"));
  REQUIRE(slurp(dir / "g1.okm") != slurp(dir / "g3.okm"));
}

TEST_CASE("generated instances of both kinds validate as metric", "[cli]") {
  fs::path dir = scratch();
  for (std::string kind : {"euclidean", "random-metric"}) {
    fs::path f = dir / ("v_" + kind + ".okm");
    REQUIRE(run("gen --kind " + kind + " -m 5 -n 6 -k 2 --seed 3 -o " + f.string()).code == 0);
    auto v = run("validate " + f.string());
    REQUIRE(v.code == 0);
    REQUIRE(v.out.find("ok: metric instance") != std::string::npos);
  }
}

TEST_CASE("weight shapes: geometric and custom files", "[cli]") {
  fs::path dir = scratch();
  fs::path g = dir / "geo.okm";
  REQUIRE(run("gen -m 4 -n 5 -k 2 --weights geometric --ratio 0.5 --seed 1 -o " +
              g.string()).code == 0);
  REQUIRE(slurp(g).find("0.25") != std::string::npos);  // 0.5^2

  fs::path wf = dir / "w.txt";
  spit(wf, "1 0.5 0.25 0 0\n");
  fs::path c = dir / "custom.okm";
  REQUIRE(run("gen -m 4 -n 5 -k 2 --weights custom --weights-file " + wf.string() +
              " --seed 1 -o " + c.string()).code == 0);
  REQUIRE(run("validate " + c.string()).code == 0);

  spit(wf, "1 0.5\n");  // wrong count for n = 5
  auto bad = run("gen -m 4 -n 5 -k 2 --weights custom --weights-file " + wf.string() +
                 " --seed 1 -o " + (dir / "bad.okm").string());
  REQUIRE(bad.code == 2);
}

TEST_CASE("validate rejects a triangle violation with exit 3", "[cli]") {
  fs::path f = scratch() / "nonmetric.okm";
  spit(f, "m 2\nn 2\nk 1\nweights 1 1\ncosts 0 10 1 0\n");
  auto v = run("validate " + f.string());
  REQUIRE(v.code == 3);
  REQUIRE(v.out.find("not metric") != std::string::npos);
}

TEST_CASE("solve produces a stable JSON report", "[cli]") {
  fs::path dir = scratch();
  fs::path f = dir / "solve_me.okm";
  spit(f, kLine34);
  std::string base = "solve " + f.string() +
                     " --ell 2 --seeds-per-guess 4 --oracle --report ";
  auto r1 = run(base + (dir / "r1.json").string());
  auto r2 = run(base + (dir / "r2.json").string());
  REQUIRE(r1.code == 0);
  REQUIRE(r1.out.find("best ") != std::string::npos);
  REQUIRE(r1.out.find("oracle 5") != std::string::npos);
  REQUIRE(slurp(dir / "r1.json") == slurp(dir / "r2.json"));

  nlohmann::json j = nlohmann::json::parse(slurp(dir / "r1.json"));
  REQUIRE(j["counters"]["enumerated"] == 8);
  REQUIRE(j["oracle_cost"] == 5.0);
  REQUIRE(j["best_cost"].get<double>() >= 5.0);
  REQUIRE(j["best_cost"].get<double>() <= 75.0);
  REQUIRE(j["ratio"].get<double>() >= 1.0);
  REQUIRE(j["guesses"].size() == 8);
  REQUIRE(j["samples"].size() == 4);
}

TEST_CASE("solve supports every variant flag", "[cli]") {
  fs::path dir = scratch();
  fs::path f = dir / "variants.okm";
  spit(f, kLine34);
  REQUIRE(run("solve " + f.string() + " --variant rect --mode oblivious --ell 2"
              " --seeds-per-guess 2").code == 0);
  REQUIRE(run("solve " + f.string() + " --variant multi --seeds-per-guess 2").code == 0);
  REQUIRE(run("solve " + f.string() + " --variant bucketed --eps 1 --seeds-per-guess 2")
              .code == 0);
  auto v = run("solve " + f.string() + " --variant rect --ell 2 -v --seeds-per-guess 2");
  REQUIRE(v.code == 0);
  REQUIRE(v.out.find("guess T=0 cost") != std::string::npos);
}

TEST_CASE("trials switch reports statistics", "[cli]") {
  fs::path dir = scratch();
  fs::path f = dir / "stats.okm";
  spit(f, kLine34);
  auto r = run("solve " + f.string() + " --ell 2 --trials 3 --seeds-per-guess 2 --report " +
               (dir / "stats.json").string());
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("trials 3 mean") != std::string::npos);
  REQUIRE(r.out.find("oracle 5") != std::string::npos);
  nlohmann::json j = nlohmann::json::parse(slurp(dir / "stats.json"));
  REQUIRE(j["trials"] == 3);
  REQUIRE(j["samples"].size() == 3);
  REQUIRE(j["best"]["best_cost"].get<double>() == j["min"].get<double>());
}

TEST_CASE("dump-lp writes the first guess in LP text format", "[cli]") {
  fs::path dir = scratch();
  fs::path f = dir / "dump.okm";
  spit(f, kLine34);
  fs::path lp = dir / "first.lp";
  REQUIRE(run("solve " + f.string() + " --ell 2 --seeds-per-guess 1 --dump-lp " +
              lp.string()).code == 0);
  std::string text = slurp(lp);
  REQUIRE(text.find("Minimize") != std::string::npos);
  REQUIRE(text.find("budget:") != std::string::npos);
  REQUIRE(text.find("End") != std::string::npos);
}

TEST_CASE("oracle prints the exact optimum", "[cli]") {
  fs::path f = scratch() / "oracle.okm";
  spit(f, kLine34);
  auto r = run("oracle " + f.string());
  REQUIRE(r.code == 0);
  REQUIRE(r.out == "opt 5 solution 1 2\n");
}

TEST_CASE("exit codes separate usage, input and parse failures", "[cli]") {
  fs::path dir = scratch();
  REQUIRE(run("--help").code == 0);
  REQUIRE(run("solve --no-such-flag x.okm").code == 2);
  REQUIRE(run("gen -m 3 -n 4").code == 2);  // missing -k and -o
  REQUIRE(run("gen -m 2 -n 4 -k 3 --seed 1 -o " + (dir / "x.okm").string()).code == 2);

  fs::path bad = dir / "bad.okm";
  spit(bad, "m 3\nn 4\nk 2\nweights 1 1 0 0\ncosts 0 5 oops\n");
  auto p = run("solve " + bad.string());
  REQUIRE(p.code == 4);
  REQUIRE(p.out.find("line") != std::string::npos);
  REQUIRE(run("validate " + (dir / "missing.okm").string()).code == 4);

  fs::path nm = dir / "nm.okm";
  spit(nm, "m 2\nn 2\nk 1\nweights 1 1\ncosts 0 10 1 0\n");
  REQUIRE(run("solve " + nm.string() + " --ell 1").code == 3);

  fs::path cap = dir / "cap.okm";
  spit(cap, kLine34);
  REQUIRE(run("solve " + cap.string() + " --ell 2 --cap 4").code == 3);
}

TEST_CASE("bench tabulates ratios over a corpus directory", "[cli]") {
  fs::path dir = scratch() / "corpus";
  fs::create_directories(dir);
  REQUIRE(run("gen -m 4 -n 4 -k 2 --seed 5 -o " + (dir / "a.okm").string()).code == 0);
  REQUIRE(run("gen --kind random-metric -m 4 -n 4 -k 2 --seed 6 -o " +
              (dir / "b.okm").string()).code == 0);
  auto r = run("bench " + dir.string() + " --trials 2 --seeds-per-guess 2 --report " +
               (scratch() / "bench.json").string());
  REQUIRE(r.code == 0);
  REQUIRE(r.out.find("instance") != std::string::npos);
  REQUIRE(r.out.find("a.okm") != std::string::npos);
  REQUIRE(r.out.find("b.okm") != std::string::npos);
  REQUIRE(r.out.find("max ratio") != std::string::npos);
  nlohmann::json j = nlohmann::json::parse(slurp(scratch() / "bench.json"));
  REQUIRE(j["rows"].size() == 2);
  REQUIRE(j["max_ratio"].get<double>() >= 1.0 - 1e-9);

  REQUIRE(run("bench " + (scratch() / "nodir").string()).code == 4);
}
