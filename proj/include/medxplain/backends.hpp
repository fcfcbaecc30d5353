#pragma once

// Wire protocol to the external model servers plus in-process transports
// (HTTP, deterministic mock, record, replay).
//
// Endpoints:  POST /v1/vqa/answer      VqaAnswerRequest        -> VqaAnswerResponse
//             POST /v1/vqa/attention   AttentionArtifactRequest -> AttentionArtifactResponse
//             POST /v1/llm/generate    LlmGenerateRequest      -> LlmGenerateResponse
// Error bodies are {"error": "..."}.

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "medxplain/grid.hpp"

namespace medxplain {

inline constexpr std::string_view kVqaAnswerEndpoint = "/v1/vqa/answer";
inline constexpr std::string_view kVqaAttentionEndpoint = "/v1/vqa/attention";
inline constexpr std::string_view kLlmGenerateEndpoint = "/v1/llm/generate";

struct VqaAnswerRequest {
  std::string image;  // base64 PNG/JPEG bytes
  std::string question;
  int max_answer_tokens = 64;
};

struct VqaAnswerResponse {
  std::string answer;
};

struct AttentionArtifactRequest {
  std::string image;
  std::string question;
};

struct GradCamTensors {
  FeatureStack features;
  GradientStack gradients;
};

struct AttentionArtifactResponse {
  std::variant<GradCamTensors, GridD> payload;  // tensors, or a pre-reduced heatmap
  std::string target_layer;

  bool has_tensors() const { return std::holds_alternative<GradCamTensors>(payload); }
};

struct LlmGenerateRequest {
  std::string prompt;
  std::vector<std::string> images;  // base64
  double temperature = 0.2;
  int max_tokens = 1024;
  double top_p = 0.95;
  int top_k = 40;
};

struct LlmGenerateResponse {
  std::string text;
};

// JSON mapping. Response parsers throw BackendUnavailable on any payload that
// violates the protocol; request parsers throw InvalidInput.
nlohmann::json to_json(const VqaAnswerRequest& r);
nlohmann::json to_json(const VqaAnswerResponse& r);
nlohmann::json to_json(const AttentionArtifactRequest& r);
nlohmann::json to_json(const AttentionArtifactResponse& r, bool float32_blob = false);
nlohmann::json to_json(const LlmGenerateRequest& r);
nlohmann::json to_json(const LlmGenerateResponse& r);

VqaAnswerRequest parse_vqa_answer_request(const nlohmann::json& j);
AttentionArtifactRequest parse_attention_request(const nlohmann::json& j);
LlmGenerateRequest parse_llm_request(const nlohmann::json& j);
VqaAnswerResponse parse_vqa_answer_response(const nlohmann::json& j);
AttentionArtifactResponse parse_attention_response(const nlohmann::json& j);
LlmGenerateResponse parse_llm_response(const nlohmann::json& j);

/// Moves JSON bodies to an endpoint. Implementations throw BackendUnavailable
/// when no usable body can be produced. Must be safe for concurrent calls.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) = 0;
};

class VqaBackend {
 public:
  virtual ~VqaBackend() = default;
  virtual VqaAnswerResponse vqa_answer(const VqaAnswerRequest& request) = 0;
  virtual AttentionArtifactResponse attention_artifacts(const AttentionArtifactRequest& request) = 0;
};

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual LlmGenerateResponse llm_generate(const LlmGenerateRequest& request) = 0;
};

/// Typed client over any transport; validates requests before sending.
class VqaClient final : public VqaBackend {
 public:
  explicit VqaClient(std::shared_ptr<Transport> transport);
  VqaAnswerResponse vqa_answer(const VqaAnswerRequest& request) override;
  AttentionArtifactResponse attention_artifacts(const AttentionArtifactRequest& request) override;

 private:
  std::shared_ptr<Transport> transport_;
};

class LlmClient final : public LlmBackend {
 public:
  explicit LlmClient(std::shared_ptr<Transport> transport);
  LlmGenerateResponse llm_generate(const LlmGenerateRequest& request) override;

 private:
  std::shared_ptr<Transport> transport_;
};

// ---------------------------------------------------------------------------
// HTTP

struct RetryPolicy {
  int max_retries = 2;
  std::chrono::milliseconds backoff_base{500};  // doubled after every failed attempt
};

struct HttpEndpoint {
  std::string base_url;  // scheme://host:port
  std::string bearer_token;
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(HttpEndpoint endpoint);
  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

 private:
  HttpEndpoint endpoint_;
};

// ---------------------------------------------------------------------------
// Mock

enum class MockRole { vqa, reformulator, integrator };

/// Scripted behaviour for calibration runs; see data/mock_profiles.
struct MockProfile {
  struct Rect {
    std::size_t row = 0, col = 0, height = 1, width = 1;
    double value = 1.0;
  };
  std::size_t grid_size = 16;
  double grid_base = 0.0;
  std::vector<Rect> rects;
  std::vector<double> chain_confidences;  // six values, or empty for hashed defaults
  std::optional<std::string> vqa_answer;
  std::optional<std::string> reformulation;
  std::unordered_map<std::string, std::string> answers;  // keyed by prompt signature

  static MockProfile load(const std::filesystem::path& path);
};

struct MockFaults {
  bool answer_down = false;
  bool attention_down = false;
  bool llm_down = false;
  bool attention_heatmap_variant = false;
  bool attention_malformed = false;
};

/// Deterministic in-process stand-in for every endpoint. Responses depend only
/// on (seed, role, profile, request body).
class MockTransport final : public Transport {
 public:
  MockTransport(MockRole role, std::uint64_t seed, std::shared_ptr<const MockProfile> profile = {},
                MockFaults faults = {});
  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

 private:
  nlohmann::json answer(const nlohmann::json& body) const;
  nlohmann::json attention(const nlohmann::json& body) const;
  nlohmann::json generate(const nlohmann::json& body) const;

  MockRole role_;
  std::uint64_t seed_;
  std::shared_ptr<const MockProfile> profile_;
  MockFaults faults_;
};

/// Section headers the pipeline writes into generated prompts. The mock keys
/// calibrated answers on which of them are present.
namespace prompt_headers {
inline constexpr std::string_view reformulated = "## Reformulated query";
inline constexpr std::string_view attention = "## Attention summary";
inline constexpr std::string_view regions = "## Detected regions";
inline constexpr std::string_view chain = "## Reasoning chain";
/// Marker carried by the reasoning-chain template.
inline constexpr std::string_view reasoning_task = "Task: structured diagnostic reasoning";
}  // namespace prompt_headers

/// Letters R, A, B, C for each prompt_headers section present, in that order;
/// empty when none are.
std::string prompt_signature(std::string_view prompt);

// ---------------------------------------------------------------------------
// Record / replay. Fixture files are JSONL: {"endpoint", "request_hash", "response"}.

std::string request_hash(std::string_view endpoint, const nlohmann::json& body);

class RecordingTransport final : public Transport {
 public:
  RecordingTransport(std::shared_ptr<Transport> inner, std::filesystem::path fixture);
  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;

 private:
  std::shared_ptr<Transport> inner_;
  std::filesystem::path fixture_;
  std::mutex mutex_;
};

class ReplayTransport final : public Transport {
 public:
  explicit ReplayTransport(const std::filesystem::path& fixture);
  nlohmann::json post(std::string_view endpoint, const nlohmann::json& body) override;
  std::size_t size() const noexcept { return responses_.size(); }

 private:
  std::unordered_map<std::string, nlohmann::json> responses_;  // endpoint + hash
};

}  // namespace medxplain
