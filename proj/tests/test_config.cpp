#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "projlab/config.hpp"

using namespace projlab;

namespace {

std::string error_of(const std::string& text) {
  try {
    ConfigDoc::parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("parse scalar types, sections and comments") {
  const auto doc = ConfigDoc::parse(
      "# header\n"
      "seed = 7\n"
      "[theorem]\n"
      "family = \"product-uniform\"  # trailing comment\n"
      "alias = 'raw\\path'\n"
      "n_betas = 1_000\n"
      "x_range = 2.5e0\n"
      "neg = -3\n"
      "big = inf\n"
      "flag = true\n"
      "estimator.method = \"slicing\"\n");
  const auto& j = doc.json();
  CHECK(j["seed"] == 7);
  CHECK(j["theorem"]["family"] == "product-uniform");
  CHECK(j["theorem"]["alias"] == "raw\\path");
  CHECK(j["theorem"]["n_betas"] == 1000);
  CHECK(j["theorem"]["n_betas"].is_number_integer());
  CHECK(j["theorem"]["x_range"].get<double>() == 2.5);
  CHECK(j["theorem"]["neg"] == -3);
  CHECK(std::isinf(j["theorem"]["big"].get<double>()));
  CHECK(j["theorem"]["flag"] == true);
  CHECK(j["theorem"]["estimator.method"] == "slicing");
}

TEST_CASE("multi-line arrays and lookup fallback") {
  const auto doc = ConfigDoc::parse(
      "workers = 2\n"
      "[theorem]\n"
      "d_list = [\n"
      "  8,   # small\n"
      "  32,\n"
      "]\n"
      "names = [\"a\", 'b']\n"
      "after = 1\n");
  const auto* d = doc.find("theorem", "d_list");
  REQUIRE(d);
  CHECK(*d == nlohmann::json({8, 32}));
  CHECK(*doc.find("theorem", "names") == nlohmann::json({"a", "b"}));
  CHECK(*doc.find("theorem", "after") == 1);
  CHECK(*doc.find("theorem", "workers") == 2);
  CHECK(doc.find("theorem", "missing") == nullptr);
  CHECK(doc.find("proof", "d_list") == nullptr);
}

TEST_CASE("malformed input names the line") {
  CHECK(error_of("a = 1\nb 2\n") == "line 2: expected key = value");
  CHECK(error_of("a = 1\na = 2\n") == "line 2: duplicate key 'a'");
  CHECK(error_of("a = \"open\n") == "line 1: unterminated string");
  CHECK(error_of("[s\n") == "line 1: unterminated section header");
  CHECK(error_of("x = [1, 2\n") == "line 1: unterminated array");
  CHECK(error_of("x = 1 2\n") == "line 1: trailing characters after value");
  CHECK(error_of("\n\nx = 12abc\n") == "line 3: invalid value '12abc'");
  CHECK(error_of("a = 1\nb =\nc = 2\n") == "line 2: missing value");
  CHECK(error_of("x = [\n1,\n2\n]\ny = ?\n") == "line 5: invalid value '?'");
}

TEST_CASE("experiment config requires family and d_list") {
  auto doc = ConfigDoc::parse("[theorem]\nfamily = \"gaussian\"\n");
  try {
    experiment_config(doc, "theorem");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()) == "d_list: missing required key");
  }
  doc.set("theorem", "d_list", {8, 16});
  const auto cfg = experiment_config(doc, "theorem");
  CHECK(cfg.d_list == std::vector<int>{8, 16});
  CHECK(cfg.n_betas == 200);
}

TEST_CASE("type errors name the key") {
  auto doc = ConfigDoc::parse(
      "[theorem]\nfamily = \"gaussian\"\nd_list = [8]\nn_betas = \"ten\"\n");
  CHECK_THROWS_WITH_AS(experiment_config(doc, "theorem"), "n_betas: expected an integer",
                       ConfigError);
  doc.set("theorem", "n_betas", 10);
  doc.set("theorem", "estimator.method", "bogus");
  CHECK_THROWS_WITH_AS(experiment_config(doc, "theorem"),
                       "estimator.method: unknown estimator 'bogus'", ConfigError);
  doc.set("theorem", "estimator.method", "kernel");
  doc.set("theorem", "d_list", {8, 2.5});
  CHECK_THROWS_WITH_AS(experiment_config(doc, "theorem"), "d_list: expected an integer",
                       ConfigError);
  doc.set("theorem", "d_list", {8});
  doc.set("theorem", "seed", -1);
  CHECK_THROWS_WITH_AS(experiment_config(doc, "theorem"),
                       "seed: expected a nonnegative integer", ConfigError);
}

TEST_CASE("echo round-trips every section") {
  auto doc = ConfigDoc::parse(
      "seed = 99\n"
      "[theorem]\nfamily = \"spherical-shell-mixture\"\nd_list = [8, 32]\n"
      "eps_list = [0.02, 0.05]\nestimator.method = \"gauss-is\"\n"
      "[proof]\nfamily = \"product-uniform\"\nd_list = [16]\nfunctionals = [\"C\"]\n"
      "j_indices = [2]\nx_list = [0.5]\n"
      "[moments]\nfamily = \"product-laplace\"\nreps = 500\n"
      "[apps]\nlinks = [\"square\"]\nrepeats = 3\n");
  const auto t = experiment_config(doc, "theorem");
  const auto t2 = experiment_config(ConfigDoc::from_json(config_echo(t, "theorem")), "theorem");
  CHECK(config_echo(t, "theorem") == config_echo(t2, "theorem"));
  CHECK(t2.seed == 99);
  CHECK(t2.estimator.method == Method::kGaussIs);

  const auto p = experiment_config(doc, "proof");
  const auto p2 = experiment_config(ConfigDoc::from_json(config_echo(p, "proof")), "proof");
  CHECK(config_echo(p, "proof") == config_echo(p2, "proof"));
  CHECK(p2.functionals == std::vector<std::string>{"C"});

  const auto m = moments_config(doc);
  CHECK(m.reps == 500);
  CHECK(config_echo(m) == config_echo(moments_config(ConfigDoc::from_json(config_echo(m)))));

  const auto a = apps_config(doc);
  CHECK(a.repeats == 3);
  CHECK(config_echo(a) == config_echo(apps_config(ConfigDoc::from_json(config_echo(a)))));
}

TEST_CASE("load reads TOML and manifest JSON") {
  const std::string toml_path = "test_config_tmp.toml";
  const std::string json_path = "test_config_tmp.json";
  {
    std::ofstream(toml_path) << "[apps]\nd = 12\n";
    std::ofstream(json_path) << R"({"config": {"apps": {"d": 13}}, "seed": 1})";
  }
  CHECK(apps_config(ConfigDoc::load(toml_path)).d == 12);
  CHECK(apps_config(ConfigDoc::load(json_path)).d == 13);
  std::remove(toml_path.c_str());
  std::remove(json_path.c_str());
  CHECK_THROWS_AS(ConfigDoc::load("does_not_exist.toml"), ConfigError);
}
