#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "roughsde/kernel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch = ROUGHSDE_CLI_SCRATCH;

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// env is a prefix such as "RE_SEED=5 "; an empty prefix clears RE_SEED.
Run cli(const std::string& args, const std::string& env = "") {
  fs::create_directories(kScratch);
  const fs::path out = kScratch / "stdout.txt", err = kScratch / "stderr.txt";
  const std::string cmd = (env.empty() ? std::string("env -u RE_SEED ") : "env " + env + " ") + "'" +
                          ROUGHSDE_CLI_EXE + "' " + args + " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path fresh(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("sample is deterministic and writes a manifest") {
  const fs::path dir = fresh("sample");
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  REQUIRE(cli("sample --hurst 0.4 --n 8 --seed 7 --out " + a).code == 0);
  REQUIRE(cli("sample --hurst 0.4 --n 8 --seed 7 --out " + b).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(first_line(slurp(a)) == "# fbm H=0.4 T=1 n=8 seed=7 method=cholesky");
  const json m = json::parse(slurp(a + ".json"));
  CHECK(m["config"]["seed"] == 7);
  CHECK(m["config"]["n"] == 8);
  CHECK(m["config"]["method"] == "cholesky");

  REQUIRE(cli("sample --hurst 0.4 --n 8 --seed 8 --out " + b).code == 0);
  CHECK(slurp(a) != slurp(b));
}

TEST_CASE("sample to stdout matches the file output") {
  const fs::path dir = fresh("sample_stdout");
  REQUIRE(cli("sample --hurst 0.3 --n 16 --seed 2 --method circulant --out " + (dir / "p.csv").string()).code == 0);
  const Run r = cli("sample --hurst 0.3 --n 16 --seed 2 --method circulant");
  CHECK(r.code == 0);
  CHECK(r.out == slurp(dir / "p.csv"));
}

TEST_CASE("sample exit codes") {
  CHECK(cli("sample --hurst 1.2").code == 2);
  CHECK(cli("sample --hurst 0 --n 8").code == 2);
  CHECK(cli("sample --hurst 0.4 --n 0").code == 2);
  CHECK(cli("sample --hurst 0.4 --n -3").code == 2);
  CHECK(cli("sample --n 8").code == 2);
  CHECK(cli("sample --hurst 0.4 --method fancy").code == 2);
  CHECK(cli("sample --hurst 0.4 --T 0").code == 2);
  CHECK(cli("sample --hurst 0.4 --bogus 1").code == 2);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);

  const Run r = cli("sample --hurst 0.4 --n 5000 --method cholesky");
  CHECK(r.code == 1);
  CHECK(r.err.find("4096") != std::string::npos);

  CHECK(cli("--help").code == 0);
  CHECK(cli("sample --help").code == 0);
}

TEST_CASE("cov values agree with the library") {
  const roughsde::Kernel k(0.4);
  Run r = cli("cov --hurst 0.4 --s 0.3 --t 0.8");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["cov"].get<double>() == roughsde::cov(k, 0.3, 0.8));

  r = cli("cov --hurst 0.4 --rect 0,0.5,0.5,1");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  const double value = j["rect_increment"];
  CHECK(value < 0.0);
  CHECK(j["quadrature"].get<double>() == doctest::Approx(value).epsilon(1e-6));

  r = cli("cov --hurst 0.3 --grid 3 --T 2");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  REQUIRE(j["matrix"].size() == 3);
  CHECK(j["matrix"][2][2].get<double>() == doctest::Approx(std::pow(2.0, 0.6)));
  CHECK(j["matrix"][0][1] == j["matrix"][1][0]);

  CHECK(cli("cov --hurst 0.4").code == 2);
  CHECK(cli("cov --hurst 0.4 --s 0.3").code == 2);
  CHECK(cli("cov --hurst 0.4 --rect 1,0,0,1").code == 2);
  CHECK(cli("cov --hurst 0.4 --rect 0,1,2").code == 2);
}

TEST_CASE("converge summary line and outputs") {
  const fs::path dir = fresh("converge");
  const std::string common = " --paths 40 --ref 10 --levels 4-7 --seed 3 --bootstrap 5";
  Run r = cli("converge --example 2 --hurst 0.4" + common + " --out-dir " + (dir / "a").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("H=0.4 slope=", 0) == 0);
  CHECK(r.out.find("theory=0.90") != std::string::npos);
  CHECK(r.out.find("pass=") != std::string::npos);

  const json m = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(m["config"]["paths"] == 40);
  CHECK(m["config"]["ref"] == 10);
  CHECK(m["config"]["seed"] == 3);
  CHECK(m["config"]["sigma"] == 9.0);
  CHECK(m["config"]["A"] == 2.0);
  CHECK(m["resolved"]["example"] == 2);
  CHECK(m["theory"] == 0.9);
  CHECK_FALSE(m.contains("wall_seconds"));
  CHECK(fs::exists(dir / "a" / "timings.json"));

  REQUIRE(cli("converge --example 2 --hurst 0.4" + common + " --out-dir " + (dir / "b").string()).code == 0);
  CHECK(slurp(dir / "a" / "curve.csv") == slurp(dir / "b" / "curve.csv"));
  CHECK(slurp(dir / "a" / "manifest.json") != "");
  // Manifests differ only by the recorded out-dir.
  json ma = json::parse(slurp(dir / "a" / "manifest.json")), mb = json::parse(slurp(dir / "b" / "manifest.json"));
  ma["resolved"].erase("out_dir");
  mb["resolved"].erase("out_dir");
  CHECK(ma == mb);

  r = cli("converge --example 1 --hurst 0.35" + common + " --out-dir " + (dir / "c").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("theory=0.70") != std::string::npos);
}

TEST_CASE("converge with a custom drift and error codes") {
  const fs::path dir = fresh("converge_custom");
  Run r = cli("converge --drift linear --A 1 --sigma 2 --x0 0.5 --hurst 0.45 --paths 30 --ref 9 --levels 3-6 "
              "--reference exact-linear --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("theory=0.95") != std::string::npos);
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["config"]["reference"] == "exact-linear");
  CHECK(m["config"]["x0"] == 0.5);

  r = cli("converge --drift zero --hurst 0.4 --paths 10 --ref 8 --levels 3-5 --out-dir " + dir.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("slope=nan") != std::string::npos);

  CHECK(cli("converge --example 1").code == 2);
  CHECK(cli("converge --example 3 --hurst 0.4").code == 2);
  CHECK(cli("converge --example 1 --hurst 0.4 --levels 6-16 --ref 15").code == 2);
  CHECK(cli("converge --example 1 --hurst 0.4 --levels x").code == 2);
  CHECK(cli("converge --example 1 --hurst 0.4 --paths 1").code == 2);
  CHECK(cli("converge --drift cubic --hurst 0.4").code == 2);
  CHECK(cli("converge --drift example1 --hurst 0.4 --reference exact-linear").code == 2);
}

TEST_CASE("diagnose checks") {
  Run r = cli("diagnose --which cov-neg --hurst 0.45");
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["negative"] == j["samples"]);
  CHECK(j["config"]["which"] == "cov-neg");

  r = cli("diagnose --which eq31 --hurst 0.4");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["fitted_slope"].get<double>() >= 1.65);
  CHECK(j["config"]["sizes"].size() == 6);

  r = cli("diagnose --which young --hurst 0.45");
  REQUIRE(r.code == 0);
  j = json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["constant_ok"] == true);

  r = cli("diagnose --which lemma-rr --hurst 0.5 --sizes 0.5,0.25,0.125 --grid-points 9");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["pass"] == true);

  r = cli("diagnose --which eq32 --hurst 0.5 --sizes 8,16,32");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["pass"] == true);

  CHECK(cli("diagnose --which foo --hurst 0.4").code == 2);
  CHECK(cli("diagnose --hurst 0.4").code == 2);
  CHECK(cli("diagnose --which eq31 --hurst 0.3").code == 2);
  CHECK(cli("diagnose --which eq31 --hurst 0.4 --sizes 8,16").code == 2);
  CHECK(cli("diagnose --which eq31 --hurst 0.4 --sizes 8,16.5,32").code == 2);
  CHECK(cli("diagnose --which lemma-rr --hurst 0.7").code == 2);
  CHECK(cli("diagnose --which cov-neg --hurst 0.4 --sizes 1,2").code == 2);
}

TEST_CASE("diagnose output is reproducible") {
  const fs::path dir = fresh("diagnose");
  REQUIRE(cli("diagnose --which cov-neg --hurst 0.3 --seed 4 --out " + (dir / "a.json").string()).code == 0);
  REQUIRE(cli("diagnose --which cov-neg --hurst 0.3 --seed 4 --out " + (dir / "b.json").string()).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("config file and seed precedence") {
  const fs::path dir = fresh("config");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# sample settings\nhurst = 0.45\nseed=3   # trailing comment\n\nn=4\n";
  const std::string c = " --config " + cfg.string();

  CHECK(first_line(cli("sample" + c).out) == "# fbm H=0.45 T=1 n=4 seed=3 method=cholesky");
  CHECK(first_line(cli("sample" + c + " --seed 9").out) == "# fbm H=0.45 T=1 n=4 seed=9 method=cholesky");
  CHECK(first_line(cli("sample --seed 9 --hurst 0.2" + c).out) == "# fbm H=0.2 T=1 n=4 seed=9 method=cholesky");
  CHECK(first_line(cli("sample --config=" + cfg.string() + " --n 2").out) ==
        "# fbm H=0.45 T=1 n=2 seed=3 method=cholesky");
  CHECK(first_line(cli("sample" + c, "RE_SEED=11").out) == "# fbm H=0.45 T=1 n=4 seed=3 method=cholesky");

  CHECK(first_line(cli("sample --hurst 0.3 --n 4", "RE_SEED=11").out) ==
        "# fbm H=0.3 T=1 n=4 seed=11 method=cholesky");
  CHECK(first_line(cli("sample --hurst 0.3 --n 4 --seed 1", "RE_SEED=11").out) ==
        "# fbm H=0.3 T=1 n=4 seed=1 method=cholesky");
  CHECK(first_line(cli("sample --hurst 0.3 --n 4").out) == "# fbm H=0.3 T=1 n=4 seed=0 method=cholesky");
  CHECK(cli("sample --hurst 0.3 --n 4", "RE_SEED=abc").code == 2);

  // A config file can supply the required --hurst.
  const fs::path conv = dir / "conv.cfg";
  std::ofstream(conv) << "example=2\nhurst=0.45\npaths=20\nref=8\nlevels=3,4,5\nbootstrap=0\n";
  Run r = cli("converge --config " + conv.string() + " --out-dir " + (dir / "out").string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("theory=0.95") != std::string::npos);
  CHECK(json::parse(slurp(dir / "out" / "manifest.json"))["config"]["paths"] == 20);

  CHECK(cli("sample --config " + (dir / "missing.cfg").string()).code == 2);
  std::ofstream(dir / "bad.cfg") << "hurst 0.4\n";
  CHECK(cli("sample --config " + (dir / "bad.cfg").string()).code == 2);
  std::ofstream(dir / "unknown.cfg") << "hurst=0.4\ncolour=blue\n";
  CHECK(cli("sample --config " + (dir / "unknown.cfg").string()).code == 2);
  CHECK(cli("sample --hurst 0.4 --config").code == 2);
}

TEST_CASE("reproduce-paper writes six curves and a summary") {
  const fs::path a = fresh("reproduce_a"), b = fresh("reproduce_b");
  const std::string common = " --paths 30 --ref 10 --levels 4-7 --seed 12";
  Run r = cli("reproduce-paper" + common + " --workers 1 --out-dir " + a.string());
  REQUIRE(r.code == 0);
  REQUIRE(cli("reproduce-paper" + common + " --workers 3 --out-dir " + b.string()).code == 0);

  int curves = 0;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().extension() == ".csv") ++curves;
  CHECK(curves == 6);
  for (int e : {1, 2})
    for (const char* h : {"0.35", "0.4", "0.45"}) {
      const std::string name = "fig" + std::to_string(e) + "_H" + h + ".csv";
      REQUIRE(fs::exists(a / name));
      CHECK(slurp(a / name) == slurp(b / name));
    }

  const json s = json::parse(slurp(a / "summary.json"));
  REQUIRE(s["pairs"].size() == 6);
  for (const auto& p : s["pairs"]) {
    CHECK(p.contains("slope"));
    CHECK_FALSE(p.contains("error"));
  }
  CHECK(s["pairs"][0]["theory"].get<double>() == doctest::Approx(0.70));
  CHECK(s["pairs"][5]["theory"].get<double>() == doctest::Approx(0.95));
  CHECK(s["config"]["paths"] == 30);
  CHECK(fs::exists(a / "timings.json"));

  json sb = json::parse(slurp(b / "summary.json"));
  json sa = s;
  for (json* j : {&sa, &sb}) {
    (*j)["config"].erase("out_dir");
    (*j)["config"].erase("workers");
  }
  CHECK(sa == sb);
}

TEST_CASE("reproduce-paper reports failed pairs") {
  const fs::path dir = fresh("reproduce_fail");
  const Run r = cli("reproduce-paper --method cholesky --ref 13 --levels 4-6 --paths 4 --out-dir " + dir.string());
  CHECK(r.code == 1);
  const json s = json::parse(slurp(dir / "summary.json"));
  REQUIRE(s["pairs"].size() == 6);
  CHECK(s["pairs"][0].contains("error"));
  CHECK(s["all_pass"] == false);

  CHECK(cli("reproduce-paper --levels 9-12 --ref 12").code == 2);
  CHECK(cli("reproduce-paper --workers 0").code == 2);
}
