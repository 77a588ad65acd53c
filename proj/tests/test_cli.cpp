#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "projlab/csv.hpp"
#include "projlab/manifest.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

/// Runs the CLI with stderr merged into the captured output.
RunResult run(const std::string& args) {
  const std::string cmd = std::string(PROJLAB_CLI) + " " + args + " 2>&1";
  RunResult r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("projlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const std::string kSmallSweep =
    "seed = 7\n[theorem]\nfamily = \"product-uniform\"\nd_list = [8]\nn_betas = 3\n"
    "n_samples = 2000\nmc_reps = 1000\n";

}  // namespace

TEST_CASE("theorem happy path writes verdict and manifest with digests") {
  const auto dir = scratch("happy");
  write_text(dir / "cfg.toml", kSmallSweep);
  const auto r = run("theorem --config " + (dir / "cfg.toml").string() + " --seed 42 --quiet --out-dir " +
                     (dir / "out").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "out" / "verdict.csv"));
  const auto m = read_json(dir / "out" / "manifest.json");
  CHECK(m["seed"] == 42);
  CHECK(m["config"]["theorem"]["seed"] == 42);
  std::set<std::string> listed;
  for (const auto& o : m["outputs"]) {
    listed.insert(o["path"].get<std::string>());
    CHECK(o["sha256"] == projlab::sha256_file((dir / "out" / o["path"].get<std::string>()).string()));
  }
  for (const char* f : {"theorem_sweep.csv", "verdict.csv", "verdict_random.csv", "null_floor.csv"}) {
    CHECK(listed.count(f) == 1);
  }
  CHECK(fs::last_write_time(dir / "out" / "manifest.json") >=
        fs::last_write_time(dir / "out" / "verdict.csv"));
}

TEST_CASE("missing d_list exits 2 naming the key") {
  const auto dir = scratch("missing");
  write_text(dir / "cfg.toml", "[theorem]\nfamily = \"gaussian\"\n");
  const auto r = run("theorem --config " + (dir / "cfg.toml").string() + " --out-dir " + dir.string());
  CHECK(r.code == 2);
  CHECK(r.out.find("d_list") != std::string::npos);
  CHECK(!fs::exists(dir / "manifest.json"));
}

TEST_CASE("bad flags and malformed configs exit 2") {
  CHECK(run("theorem --no-such-flag").code == 2);
  CHECK(run("").code == 2);
  const auto dir = scratch("malformed");
  write_text(dir / "cfg.toml", "[theorem]\nfamily = \n");
  const auto r = run("theorem --config " + (dir / "cfg.toml").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("line 2") != std::string::npos);
  const auto bad = run("theorem --family gaussian --d 8,x");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("d_list") != std::string::npos);
}

TEST_CASE("flag overrides take precedence in the manifest echo") {
  const auto dir = scratch("override");
  write_text(dir / "cfg.toml", kSmallSweep);
  const auto r = run("theorem --config " + (dir / "cfg.toml").string() +
                     " --d 8,32 --n-betas 2 --n-samples 1000 --quiet --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  const auto echo = read_json(dir / "manifest.json")["config"]["theorem"];
  CHECK(echo["d_list"] == nlohmann::json({8, 32}));
  CHECK(echo["n_betas"] == 2);
  CHECK(echo["seed"] == 7);
  CHECK(echo["mc_reps"] == 1000);
}

TEST_CASE("manifest echo replays the run bit-identically") {
  const auto dir = scratch("replay");
  write_text(dir / "cfg.toml", kSmallSweep);
  REQUIRE(run("theorem --config " + (dir / "cfg.toml").string() + " --workers 1 --quiet --out-dir " +
              (dir / "a").string())
              .code == 0);
  REQUIRE(run("theorem --config " + (dir / "a" / "manifest.json").string() + " --quiet --out-dir " +
              (dir / "b").string())
              .code == 0);
  const auto ma = read_json(dir / "a" / "manifest.json");
  const auto mb = read_json(dir / "b" / "manifest.json");
  CHECK(ma["config"] == mb["config"]);
  CHECK(ma["outputs"] == mb["outputs"]);
}

TEST_CASE("proof subcommand: outputs, constraint names, restriction") {
  const auto dir = scratch("proof");
  const std::string base = "proof --family product-uniform --d 32 --mc-reps 2000 --quiet ";
  const auto bad = run(base + "--j 4,2 --out-dir " + dir.string());
  CHECK(bad.code == 2);
  CHECK(bad.out.find("j_indices") != std::string::npos);

  const auto r = run(base + "--functional C --k 4 --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  const auto t = projlab::read_csv((dir / "proof_sweep.csv").string());
  REQUIRE(!t.rows.empty());
  const auto col = std::find(t.header.begin(), t.header.end(), "functional") - t.header.begin();
  for (const auto& row : t.rows) CHECK(row[col] == "C");
  CHECK(read_json(dir / "manifest.json")["outputs"][0]["path"] == "proof_sweep.csv");
}

TEST_CASE("degeneracy above the threshold exits 3 after writing outputs") {
  const auto dir = scratch("degenerate");
  const auto r = run("proof --family product-uniform --d 128 --mc-reps 2000 --functional e1 "
                     "--max-degenerate-fraction 0.25 --quiet --out-dir " + dir.string());
  CHECK(r.code == 3);
  CHECK(fs::exists(dir / "proof_sweep.csv"));
  const auto m = read_json(dir / "manifest.json");
  CHECK(m["notes"].size() >= 1);
}

TEST_CASE("point evaluation and coefficient export") {
  const auto r = run("ratio --k 2 --d 64 --x 1.0 --gram identity");
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  double value = 0, se = -1;
  in >> value >> se;
  CHECK(value > 0.0);
  CHECK(se == 0.0);

  const auto mean = run("ratio --k 2 --d 64 --x 0.5 --gram mean --family gaussian --reps 20000");
  REQUIRE(mean.code == 0);
  std::istringstream min(mean.out);
  double mv = 0, ms = 0;
  min >> mv >> ms;
  CHECK(std::abs(mv - 1.0) < 4 * ms + 1e-12);

  const auto dir = scratch("psi");
  const auto p = run("psi --k 2 --d 64 --x 0 --out " + (dir / "coeffs.csv").string());
  CHECK(p.code == 0);
  const auto t = projlab::read_csv((dir / "coeffs.csv").string());
  CHECK(t.header == std::vector<std::string>{"monomial", "coefficient"});
  CHECK(t.rows.front()[0] == "1");
  CHECK(run("psi --k 4 --d 16 --x 2").code == 2);
}

TEST_CASE("apps sir prints the alignment") {
  const auto dir = scratch("apps");
  const auto r = run("apps sir --link square --d 20 --repeats 3 --out-dir " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.find("sir link=square d=20 median_alignment=") != std::string::npos);
  CHECK(fs::exists(dir / "sir_save.csv"));
  CHECK(run("apps bogus").code == 2);
}
