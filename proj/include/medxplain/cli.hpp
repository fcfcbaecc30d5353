#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medxplain/pipeline.hpp"

namespace medxplain::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBackend = 3;

/// Returns the value of an environment variable, or nothing when unset.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Replaces every `${NAME}` inside string values (recursively). Throws
/// ConfigError naming the variable when it is unset.
nlohmann::json interpolate_env(const nlohmann::json& j, const EnvLookup& env);

struct BackendSpec {
  std::string kind;  // mock | http | replay | record
  // mock
  std::uint64_t seed = 0;
  std::filesystem::path profile;
  MockFaults faults;
  // http
  HttpEndpoint http;
  // replay / record
  std::filesystem::path fixture;
  std::shared_ptr<BackendSpec> inner;  // record only
};

struct CliConfig {
  PipelineConfig base;  // parameters shared by every preset
  std::map<std::string, StageFlags> custom_presets;
  std::string default_preset = "complete";
  BackendSpec vqa, reformulator, integrator;
  ResourcePaths resources;
  std::filesystem::path colormap;
  LlmGenerateRequest generation;
  int max_answer_tokens = 64;
  std::filesystem::path output_dir = "out";
  bool log_stages = true;

  /// Named preset with the shared parameters applied; throws ConfigError
  /// listing the valid names.
  PipelineConfig resolve_preset(const std::string& name) const;
  std::vector<std::string> preset_catalogue() const;
};

/// Parses and fully validates a config document. Relative paths resolve
/// against `base_dir`. Unknown keys anywhere are rejected.
CliConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir, const EnvLookup& env);
CliConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());

Backends build_backends(const CliConfig& config);

/// Entry point shared by the executable and the in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
        const EnvLookup& env = process_env());

}  // namespace medxplain::cli
