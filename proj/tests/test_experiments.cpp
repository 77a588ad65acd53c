#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "projlab/csv.hpp"
#include "projlab/experiments.hpp"

using namespace projlab;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& family) {
  ExperimentConfig cfg;
  cfg.family = family;
  cfg.d_list = {4, 12};
  cfg.n_betas = 12;
  cfg.n_samples = 6000;
  cfg.eps_list = {0.0, 0.05};
  cfg.seed = 7;
  cfg.workers = 2;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("projlab_" + name);
  fs::remove_all(p);
  return p.string();
}

}  // namespace

TEST_CASE("experiment config validation names the key") {
  auto cfg = small_config("product-uniform");
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.d_list.clear();
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("d_list"), ConfigError);
  bad = cfg;
  bad.d_list = {8, 8};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("strictly increasing"), ConfigError);
  bad = cfg;
  bad.eps_list.clear();
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("eps_list"), ConfigError);
  bad = cfg;
  bad.n_betas = 0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("n_betas"), ConfigError);
  bad = cfg;
  bad.family = "cauchy";
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("family"), ConfigError);
  bad = cfg;
  bad.j_indices = {2, 3};
  CHECK_THROWS_WITH_AS(bad.validate_proof(), doctest::Contains("j_{i-1}+1 < j_i"), ConfigError);
  bad = cfg;
  bad.j_indices = {2, 5};
  CHECK_THROWS_WITH_AS(bad.validate_proof(), doctest::Contains("j_m <= l"), ConfigError);
  bad = cfg;
  bad.k = 3;
  CHECK_THROWS_WITH_AS(bad.validate_proof(), doctest::Contains("even"), ConfigError);
  CHECK(cfg.samples_for(8) == 6000);
  cfg.n_samples = 0;
  CHECK(cfg.samples_for(8) == 100000);
  CHECK(cfg.samples_for(1000) == 200000);
}

TEST_CASE("theorem sweep outputs are deterministic across runs and worker counts") {
  auto cfg = small_config("product-uniform");
  const auto a = temp_dir("det_a");
  const auto b = temp_dir("det_b");
  write_theorem_outputs(run_theorem_sweep(cfg), cfg, a);
  cfg.workers = 1;
  write_theorem_outputs(run_theorem_sweep(cfg), cfg, b);
  for (const char* f : {"theorem_sweep.csv", "verdict.csv", "verdict_random.csv", "null_floor.csv"}) {
    INFO(f);
    CHECK(slurp(a + "/" + f) == slurp(b + "/" + f));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("verdict fractions recomputed from the raw sweep") {
  auto cfg = small_config("product-laplace");
  const auto dir = temp_dir("recompute");
  const auto v = run_theorem_sweep(cfg);
  write_theorem_outputs(v, cfg, dir);
  const auto raw = read_csv(dir + "/theorem_sweep.csv");
  CHECK(raw.header == std::vector<std::string>{"family", "d", "beta_index", "x_mode", "eps",
                                               "sup_d1", "sup_d2", "exceed_d1", "exceed_d2",
                                               "n_eff_min", "seed"});
  CHECK(raw.rows.size() == 2 * cfg.d_list.size() * cfg.n_betas * cfg.eps_list.size());
  for (const auto& [file, mode] : {std::pair{"verdict.csv", "grid"}, {"verdict_random.csv", "random"}}) {
    const auto ver = read_csv(dir + "/" + file);
    CHECK(ver.header == std::vector<std::string>{"family", "d", "eps", "frac_exceed_d1",
                                                 "frac_exceed_d2", "se_frac_d1", "se_frac_d2",
                                                 "n_betas"});
    REQUIRE(ver.rows.size() == cfg.d_list.size() * cfg.eps_list.size());
    for (const auto& row : ver.rows) {
      int n = 0, c1 = 0, c2 = 0;
      for (const auto& r : raw.rows) {
        if (r[1] != row[1] || r[3] != mode || r[4] != row[2] || r[7].empty()) continue;
        ++n;
        c1 += r[7] == "1";
        c2 += r[8] == "1";
      }
      CHECK(row[7] == std::to_string(n));
      CHECK(row[3] == format_double(static_cast<double>(c1) / n));
      CHECK(row[4] == format_double(static_cast<double>(c2) / n));
      const double p = static_cast<double>(c1) / n;
      CHECK(std::stod(row[5]) == doctest::Approx(std::sqrt(p * (1 - p) / n)));
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("exceedance flags follow the floor plus eps rule") {
  auto cfg = small_config("product-uniform");
  const auto v = run_theorem_sweep(cfg);
  std::map<std::pair<int, std::string>, NullFloor> fl;
  for (const auto& f : v.floors) fl[{f.d, f.x_mode}] = f;
  for (const auto& row : v.rows) {
    CHECK(row.frac_exceed_d1 >= 0.0);
    CHECK(row.frac_exceed_d1 <= 1.0);
    CHECK(row.frac_exceed_d2 >= 0.0);
    CHECK(row.frac_exceed_d2 <= 1.0);
  }
  // Larger eps never increases exceedance.
  for (int d : cfg.d_list) {
    for (const char* mode : {"grid", "random"}) {
      CHECK(v.row(d, mode, 0.05).frac_exceed_d1 <= v.row(d, mode, 0.0).frac_exceed_d1);
      CHECK(v.row(d, mode, 0.05).frac_exceed_d2 <= v.row(d, mode, 0.0).frac_exceed_d2);
    }
  }
  CHECK(exceeds(1.0, 0.5, 0.4));
  CHECK_FALSE(exceeds(0.9, 0.5, 0.4));
}

TEST_CASE("null dominance: gaussian exceedance below product-family exceedance") {
  auto g = small_config("gaussian");
  g.n_betas = 30;
  auto u = g;
  u.family = "product-uniform";
  const auto floors = compute_null_floor(g);
  const auto vg = run_theorem_sweep(g, &floors);
  const auto vu = run_theorem_sweep(u, &floors);
  for (std::size_t i = 0; i < vg.rows.size(); ++i) {
    const auto& a = vg.rows[i];
    const auto& b = vu.rows[i];
    const double se1 = std::sqrt(a.se_frac_d1 * a.se_frac_d1 + b.se_frac_d1 * b.se_frac_d1);
    const double se2 = std::sqrt(a.se_frac_d2 * a.se_frac_d2 + b.se_frac_d2 * b.se_frac_d2);
    INFO("d=", a.d, " mode=", a.x_mode, " eps=", a.eps);
    CHECK(a.frac_exceed_d1 <= b.frac_exceed_d1 + 2 * se1 + 1e-12);
    CHECK(a.frac_exceed_d2 <= b.frac_exceed_d2 + 2 * se2 + 1e-12);
  }
  // At d = 4 the uniform deviations are large enough to clear the floor.
  CHECK(vu.row(4, "grid", 0.0).frac_exceed_d2 > 0.5);
}

TEST_CASE("kernel and gauss-is estimators run in the sweep") {
  auto cfg = small_config("product-laplace");
  cfg.d_list = {4};
  cfg.n_betas = 4;
  cfg.estimator.method = Method::kKernel;
  cfg.estimator.n_grid = 9;
  auto v = run_theorem_sweep(cfg);
  int random_present = 0;
  for (const auto& r : v.records) {
    if (r.x_mode == "grid") CHECK(r.present);
    random_present += r.x_mode == "random" && r.present;
  }
  CHECK(random_present >= 3);
  cfg.estimator.method = Method::kGaussIs;
  cfg.estimator.is_reps = 4000;
  cfg.estimator.n_grid = 5;
  v = run_theorem_sweep(cfg);
  for (const auto& r : v.records) CHECK(r.present);
}

TEST_CASE("degenerate directions are counted as missing") {
  auto cfg = small_config("product-uniform");
  cfg.d_list = {2};
  cfg.n_betas = 5;
  cfg.x_range = 3.0;  // beyond the support of beta'Z for every beta
  cfg.estimator.method = Method::kGaussIs;
  cfg.estimator.is_reps = 2000;
  cfg.estimator.n_grid = 3;
  const auto floors = std::vector<NullFloor>{{2, "grid", 0.0, 0.0, 1}, {2, "random", 0.0, 0.0, 1}};
  const auto v = run_theorem_sweep(cfg, &floors);
  REQUIRE(v.missing.size() == 1);
  CHECK(v.missing[0] == 5);
  CHECK(v.row(2, "grid", 0.0).n_betas == 0);
  CHECK(std::isnan(v.row(2, "grid", 0.0).frac_exceed_d1));
  CHECK_FALSE(v.notes.empty());
}

TEST_CASE("proof sweep: gaussian functionals vanish, schema and restriction") {
  ExperimentConfig cfg;
  cfg.family = "gaussian";
  cfg.d_list = {16, 32};
  cfg.x_list = {0.0, 1.0};
  cfg.mc_reps = 20000;
  cfg.workers = 2;
  cfg.functionals = {"e1", "a", "B", "C"};
  const auto rows = run_proof_sweep(cfg);
  CHECK(rows.size() == 4 * 2 * 2);
  for (const auto& r : rows) {
    INFO(r.functional, " d=", r.d, " x=", r.x, " ", r.estimate, " +- ", r.se);
    CHECK(std::abs(r.estimate) <= 4 * r.se + 1e-12);
    if (r.functional == "e1") CHECK(r.estimate == 0.0);
  }
  const auto dir = temp_dir("proof");
  write_proof_outputs(rows, cfg, dir);
  const auto t = read_csv(dir + "/proof_sweep.csv");
  CHECK(t.header == std::vector<std::string>{"family", "functional", "k", "l", "m", "j_indices", "d",
                                             "x", "estimate", "se", "reps", "seed"});
  bool saw_b = false;
  for (const auto& r : t.rows) {
    if (r[1] == "B") {
      saw_b = true;
      CHECK(r[5] == "2;4");
      CHECK(r[3] == "4");
      CHECK(r[4] == "2");
    }
    if (r[1] == "e1") CHECK(r[3].empty());
  }
  CHECK(saw_b);
  fs::remove_all(dir);

  auto only_c = cfg;
  only_c.functionals = {"C"};
  const auto c_rows = run_proof_sweep(only_c);
  REQUIRE(c_rows.size() == 4);
  // Restricting the sweep leaves the C estimates unchanged.
  int matched = 0;
  for (const auto& r : rows) {
    if (r.functional != "C") continue;
    for (const auto& c : c_rows) {
      if (c.d == r.d && c.x == r.x) {
        CHECK(c.estimate == r.estimate);
        ++matched;
      }
    }
  }
  CHECK(matched == 4);
}

TEST_CASE("proof sweep: uniform e1 agrees with the i.i.d. form and flags degeneracy") {
  ExperimentConfig cfg;
  cfg.family = "product-uniform";
  cfg.d_list = {8, 128};
  cfg.x_list = {0.0};
  cfg.mc_reps = 100000;
  cfg.workers = 2;
  cfg.functionals = {"e1", "c"};
  const auto rows = run_proof_sweep(cfg);
  REQUIRE(rows.size() == 4);
  const auto& e1_8 = rows[0];
  const auto& e1_128 = rows[1];
  const auto& c_8 = rows[2];
  const auto& c_128 = rows[3];
  CHECK_FALSE(e1_8.degenerate);
  CHECK(std::abs(e1_8.estimate - c_8.estimate) <= 4 * std::hypot(e1_8.se, c_8.se));
  CHECK(e1_128.degenerate);
  CHECK(std::isnan(e1_128.estimate));
  CHECK(degenerate_fraction(rows) == doctest::Approx(0.25));
  // The i.i.d. form stays usable and shrinks with d.
  CHECK(c_8.estimate - c_128.estimate > 2 * std::hypot(c_8.se, c_128.se));
}
