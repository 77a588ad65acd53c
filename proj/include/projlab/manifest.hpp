#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace projlab {

inline constexpr const char* kArtifactVersion = PROJLAB_VERSION;

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

struct OutputFile {
  std::string path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Run record: written after every output it lists.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  int workers = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<OutputFile> outputs;
  std::vector<std::string> notes;

  /// Digests the file now; `name` is stored relative to the output directory.
  void add_output(const std::string& dir, const std::string& name);
  nlohmann::json to_json() const;
  /// Sets finished_at and writes dir/manifest.json (UTF-8, sorted keys).
  void write(const std::string& dir);
};

}  // namespace projlab
