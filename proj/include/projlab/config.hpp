#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "projlab/applications.hpp"
#include "projlab/experiments.hpp"
#include "projlab/moment_lab.hpp"

namespace projlab {

/// Key-value configuration: a TOML subset (top-level keys, [section] tables,
/// strings, integers, floats, booleans, flat arrays, comments) held as JSON
/// {section: {key: value}} with top-level keys at the root.
class ConfigDoc {
 public:
  ConfigDoc() : root_(nlohmann::json::object()) {}

  /// Throws ConfigError("line N: ...") on malformed input.
  static ConfigDoc parse(std::string_view text);
  /// TOML file, or a JSON file (a manifest's "config" member is used when present).
  static ConfigDoc load(const std::string& path);
  static ConfigDoc from_json(const nlohmann::json& j);

  const nlohmann::json& json() const { return root_; }

  /// Value of `key` in `section`, falling back to the top level; nullptr if absent.
  const nlohmann::json* find(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, nlohmann::json value);

 private:
  nlohmann::json root_;
};

/// Builds the sweep configuration from [theorem] or [proof] (plus top-level keys).
/// family and d_list are required.
ExperimentConfig experiment_config(const ConfigDoc& doc, const std::string& section);
MomentsConfig moments_config(const ConfigDoc& doc, const std::string& section = "moments");
AppsConfig apps_config(const ConfigDoc& doc, const std::string& section = "apps");

/// Effective configuration as {section: {...}}; ConfigDoc::from_json of the
/// result rebuilds an identical configuration.
nlohmann::json config_echo(const ExperimentConfig& cfg, const std::string& section);
nlohmann::json config_echo(const MomentsConfig& cfg, const std::string& section = "moments");
nlohmann::json config_echo(const AppsConfig& cfg, const std::string& section = "apps");

}  // namespace projlab
