#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>

#include "projlab/manifest.hpp"
#include "projlab/types.hpp"

using namespace projlab;

TEST_CASE("sha256 matches known digests") {
  const auto dir = std::filesystem::temp_directory_path() / "projlab_manifest_test";
  std::filesystem::create_directories(dir);
  const auto empty = (dir / "empty.txt").string();
  const auto abc = (dir / "abc.txt").string();
  std::ofstream(empty, std::ios::binary).flush();
  std::ofstream(abc, std::ios::binary) << "abc";
  CHECK(sha256_file(empty) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_file(abc) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(sha256_file((dir / "missing").string()), InvalidArgument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest lists outputs with digests and sorted keys") {
  const auto dir = std::filesystem::temp_directory_path() / "projlab_manifest_test2";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.csv", std::ios::binary) << "x\n1\n";
  RunManifest m;
  m.command = "theorem";
  m.config = {{"theorem", {{"d_list", {8}}}}};
  m.seed = 42;
  m.workers = 1;
  m.started_at = utc_timestamp();
  m.add_output(dir.string(), "a.csv");
  m.write(dir.string());

  std::ifstream in(dir / "manifest.json");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto j = nlohmann::json::parse(text);
  CHECK(j["outputs"][0]["path"] == "a.csv");
  CHECK(j["outputs"][0]["bytes"] == 4);
  CHECK(j["outputs"][0]["sha256"] == sha256_file((dir / "a.csv").string()));
  CHECK(j["seed"] == 42);
  CHECK(j["artifact_version"] == kArtifactVersion);
  CHECK(std::regex_match(j["finished_at"].get<std::string>(),
                         std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
  CHECK(text.find("\"artifact_version\"") < text.find("\"command\""));
  CHECK(text.find("\"outputs\"") < text.find("\"seed\""));
  std::filesystem::remove_all(dir);
}
