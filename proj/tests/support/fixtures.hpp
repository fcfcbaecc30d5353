#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medxplain/backends.hpp"
#include "medxplain/pipeline.hpp"

namespace fixture {

namespace fs = std::filesystem;

fs::path test_data();    // tests/data
fs::path source_data();  // shipped data/
fs::path image(int n);   // tests/data/images/sample_0n.png, n in 1..6

/// Shipped resources with the default generation parameters.
const medxplain::PipelineResources& resources();

/// Mock backends for every role. `profile` names a file under
/// data/mock_profiles (empty for hashed defaults).
medxplain::Backends mock_backends(std::uint64_t seed, const std::string& profile = {},
                                  medxplain::MockFaults faults = {});

/// LLM stand-in driven by a callback; remembers every prompt it saw.
class ScriptedLlm final : public medxplain::LlmBackend {
 public:
  using Script = std::function<std::string(const medxplain::LlmGenerateRequest&)>;
  explicit ScriptedLlm(Script script) : script_(std::move(script)) {}
  medxplain::LlmGenerateResponse llm_generate(const medxplain::LlmGenerateRequest& request) override {
    prompts.push_back(request.prompt);
    return {script_(request)};
  }
  std::vector<std::string> prompts;

 private:
  Script script_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Manifest of `n` samples cycling over the six fixture images.
fs::path write_manifest(const fs::path& dir, std::size_t n, const std::string& name = "manifest.jsonl");
std::vector<medxplain::Sample> samples(std::size_t n);

/// CLI config with mock backends; `faults` applies to every role.
nlohmann::json mock_config(const fs::path& output_dir, const std::string& profile = {},
                           const nlohmann::json& faults = nlohmann::json::object(),
                           const std::string& timing = "fixed");
fs::path write_json(const fs::path& path, const nlohmann::json& j);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace fixture
