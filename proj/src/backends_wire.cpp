#include <cmath>
#include <cstring>

#include "medxplain/backends.hpp"
#include "medxplain/error.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

using nlohmann::json;

namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw BackendUnavailable("protocol error: " + what);
}

json nested(const Tensor3& t) {
  json out = json::array();
  for (std::size_t k = 0; k < t.channels(); ++k) {
    json plane = json::array();
    for (std::size_t i = 0; i < t.height(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < t.width(); ++j) row.push_back(t(k, i, j));
      plane.push_back(std::move(row));
    }
    out.push_back(std::move(plane));
  }
  return out;
}

json nested(const GridD& g) {
  json out = json::array();
  for (std::size_t i = 0; i < g.height(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < g.width(); ++j) row.push_back(g(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json blob(std::span<const double> values, std::vector<std::size_t> shape) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t n = 0; n < values.size(); ++n) {
    const auto f = static_cast<float>(values[n]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) bytes[n * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  return json{{"shape", shape}, {"data", util::base64_encode(bytes)}};
}

double finite_number(const json& v, const char* what) {
  if (!v.is_number()) protocol_error(std::string(what) + " holds a non-numeric entry");
  const double d = v.get<double>();
  if (!std::isfinite(d)) protocol_error(std::string(what) + " holds a non-finite entry");
  return d;
}

std::vector<double> unblob(const json& j, std::vector<std::size_t>& shape, std::size_t rank,
                           const char* what) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("data")) {
    protocol_error(std::string(what) + " blob needs shape and data");
  }
  try {
    shape = j.at("shape").get<std::vector<std::size_t>>();
  } catch (const json::exception&) {
    protocol_error(std::string(what) + " blob shape is not a list of sizes");
  }
  if (shape.size() != rank) protocol_error(std::string(what) + " blob has wrong rank");
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  if (count == 0) protocol_error(std::string(what) + " blob has a zero dimension");
  std::string bytes;
  try {
    bytes = util::base64_decode(j.at("data").get<std::string>());
  } catch (const std::exception&) {
    protocol_error(std::string(what) + " blob data is not base64");
  }
  if (bytes.size() != count * 4) protocol_error(std::string(what) + " blob size does not match shape");
  std::vector<double> out(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= std::uint32_t(static_cast<std::uint8_t>(bytes[n * 4 + b])) << (8 * b);
    }
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) protocol_error(std::string(what) + " blob holds a non-finite entry");
    out[n] = f;
  }
  return out;
}

Tensor3 parse_tensor(const json& j, const char* what) {
  if (j.is_object()) {
    std::vector<std::size_t> shape;
    auto values = unblob(j, shape, 3, what);
    return Tensor3(shape[0], shape[1], shape[2], std::move(values));
  }
  if (!j.is_array() || j.empty()) protocol_error(std::string(what) + " must be a non-empty K x H x W array");
  const std::size_t k = j.size();
  std::size_t h = 0, w = 0;
  std::vector<double> values;
  for (const auto& plane : j) {
    if (!plane.is_array() || plane.empty()) protocol_error(std::string(what) + " has an empty channel");
    if (h == 0) h = plane.size();
    if (plane.size() != h) protocol_error(std::string(what) + " channels differ in height");
    for (const auto& row : plane) {
      if (!row.is_array() || row.empty()) protocol_error(std::string(what) + " has an empty row");
      if (w == 0) w = row.size();
      if (row.size() != w) protocol_error(std::string(what) + " is ragged");
      for (const auto& v : row) values.push_back(finite_number(v, what));
    }
  }
  return Tensor3(k, h, w, std::move(values));
}

GridD parse_grid(const json& j, const char* what) {
  if (j.is_object()) {
    std::vector<std::size_t> shape;
    auto values = unblob(j, shape, 2, what);
    return GridD(shape[0], shape[1], std::move(values));
  }
  if (!j.is_array() || j.empty()) protocol_error(std::string(what) + " must be a non-empty H x W array");
  const std::size_t h = j.size();
  std::size_t w = 0;
  std::vector<double> values;
  for (const auto& row : j) {
    if (!row.is_array() || row.empty()) protocol_error(std::string(what) + " has an empty row");
    if (w == 0) w = row.size();
    if (row.size() != w) protocol_error(std::string(what) + " is ragged");
    for (const auto& v : row) values.push_back(finite_number(v, what));
  }
  return GridD(h, w, std::move(values));
}

const json& field(const json& j, const char* name, bool (json::*check)() const noexcept,
                  const char* type, bool response) {
  if (!j.is_object() || !j.contains(name) || !(j.at(name).*check)()) {
    const std::string msg = std::string("field '") + name + "' must be a " + type;
    if (response) protocol_error(msg);
    throw InvalidInput(msg);
  }
  return j.at(name);
}

}  // namespace

json to_json(const VqaAnswerRequest& r) {
  return json{{"image", r.image}, {"question", r.question}, {"max_answer_tokens", r.max_answer_tokens}};
}
json to_json(const VqaAnswerResponse& r) { return json{{"answer", r.answer}}; }
json to_json(const AttentionArtifactRequest& r) {
  return json{{"image", r.image}, {"question", r.question}};
}

json to_json(const AttentionArtifactResponse& r, bool float32_blob) {
  json out = json::object();
  if (const auto* t = std::get_if<GradCamTensors>(&r.payload)) {
    if (float32_blob) {
      const std::vector<std::size_t> shape{t->features.channels(), t->features.height(),
                                           t->features.width()};
      out["features_f32"] = blob(t->features.values(), shape);
      out["gradients_f32"] = blob(t->gradients.values(), shape);
    } else {
      out["features"] = nested(t->features);
      out["gradients"] = nested(t->gradients);
    }
  } else {
    const auto& g = std::get<GridD>(r.payload);
    if (float32_blob) {
      out["heatmap_f32"] = blob(g.values(), {g.height(), g.width()});
    } else {
      out["heatmap"] = nested(g);
    }
  }
  out["target_layer"] = r.target_layer;
  return out;
}

json to_json(const LlmGenerateRequest& r) {
  return json{{"prompt", r.prompt},       {"images", r.images}, {"temperature", r.temperature},
              {"max_tokens", r.max_tokens}, {"top_p", r.top_p},   {"top_k", r.top_k}};
}
json to_json(const LlmGenerateResponse& r) { return json{{"text", r.text}}; }

VqaAnswerRequest parse_vqa_answer_request(const json& j) {
  VqaAnswerRequest r;
  r.image = field(j, "image", &json::is_string, "string", false).get<std::string>();
  r.question = field(j, "question", &json::is_string, "string", false).get<std::string>();
  if (j.contains("max_answer_tokens")) {
    r.max_answer_tokens =
        field(j, "max_answer_tokens", &json::is_number_integer, "integer", false).get<int>();
  }
  return r;
}

AttentionArtifactRequest parse_attention_request(const json& j) {
  AttentionArtifactRequest r;
  r.image = field(j, "image", &json::is_string, "string", false).get<std::string>();
  r.question = field(j, "question", &json::is_string, "string", false).get<std::string>();
  return r;
}

LlmGenerateRequest parse_llm_request(const json& j) {
  LlmGenerateRequest r;
  r.prompt = field(j, "prompt", &json::is_string, "string", false).get<std::string>();
  if (j.contains("images")) {
    for (const auto& img : field(j, "images", &json::is_array, "list", false)) {
      if (!img.is_string()) throw InvalidInput("field 'images' must hold strings");
      r.images.push_back(img.get<std::string>());
    }
  }
  if (j.contains("temperature"))
    r.temperature = field(j, "temperature", &json::is_number, "number", false).get<double>();
  if (j.contains("max_tokens"))
    r.max_tokens = field(j, "max_tokens", &json::is_number_integer, "integer", false).get<int>();
  if (j.contains("top_p")) r.top_p = field(j, "top_p", &json::is_number, "number", false).get<double>();
  if (j.contains("top_k"))
    r.top_k = field(j, "top_k", &json::is_number_integer, "integer", false).get<int>();
  return r;
}

VqaAnswerResponse parse_vqa_answer_response(const json& j) {
  VqaAnswerResponse r;
  r.answer = field(j, "answer", &json::is_string, "string", true).get<std::string>();
  if (r.answer.empty()) protocol_error("empty answer");
  return r;
}

AttentionArtifactResponse parse_attention_response(const json& j) {
  if (!j.is_object()) protocol_error("attention response must be an object");
  const bool has_f = j.contains("features") || j.contains("features_f32");
  const bool has_g = j.contains("gradients") || j.contains("gradients_f32");
  const bool has_h = j.contains("heatmap") || j.contains("heatmap_f32");
  if (has_f != has_g) protocol_error("features and gradients must be sent together");
  if (has_f == has_h) protocol_error("exactly one of tensors or heatmap must be present");

  AttentionArtifactResponse r;
  if (j.contains("target_layer")) {
    if (!j.at("target_layer").is_string()) protocol_error("target_layer must be a string");
    r.target_layer = j.at("target_layer").get<std::string>();
  }
  if (has_f) {
    Tensor3 f = j.contains("features") ? parse_tensor(j.at("features"), "features")
                                       : parse_tensor(j.at("features_f32"), "features");
    Tensor3 g = j.contains("gradients") ? parse_tensor(j.at("gradients"), "gradients")
                                        : parse_tensor(j.at("gradients_f32"), "gradients");
    if (!f.same_shape(g)) protocol_error("feature and gradient shapes differ");
    GradCamTensors t;
    t.features = FeatureStack(f.channels(), f.height(), f.width(),
                              std::vector<double>(f.values().begin(), f.values().end()));
    t.gradients = GradientStack(g.channels(), g.height(), g.width(),
                                std::vector<double>(g.values().begin(), g.values().end()));
    r.payload = std::move(t);
  } else {
    GridD h = j.contains("heatmap") ? parse_grid(j.at("heatmap"), "heatmap")
                                    : parse_grid(j.at("heatmap_f32"), "heatmap");
    for (double v : h.values()) {
      if (v < 0.0 || v > 1.0) protocol_error("heatmap values must lie in [0,1]");
    }
    r.payload = std::move(h);
  }
  return r;
}

LlmGenerateResponse parse_llm_response(const json& j) {
  LlmGenerateResponse r;
  r.text = field(j, "text", &json::is_string, "string", true).get<std::string>();
  return r;
}

// ---------------------------------------------------------------------------

VqaClient::VqaClient(std::shared_ptr<Transport> transport) : transport_(std::move(transport)) {}

VqaAnswerResponse VqaClient::vqa_answer(const VqaAnswerRequest& request) {
  if (request.image.empty()) throw InvalidInput("vqa_answer: image is empty");
  if (request.question.empty()) throw InvalidInput("vqa_answer: question is empty");
  return parse_vqa_answer_response(transport_->post(kVqaAnswerEndpoint, to_json(request)));
}

AttentionArtifactResponse VqaClient::attention_artifacts(const AttentionArtifactRequest& request) {
  if (request.image.empty()) throw InvalidInput("attention_artifacts: image is empty");
  if (request.question.empty()) throw InvalidInput("attention_artifacts: question is empty");
  return parse_attention_response(transport_->post(kVqaAttentionEndpoint, to_json(request)));
}

LlmClient::LlmClient(std::shared_ptr<Transport> transport) : transport_(std::move(transport)) {}

LlmGenerateResponse LlmClient::llm_generate(const LlmGenerateRequest& request) {
  if (request.prompt.empty()) throw InvalidInput("llm_generate: prompt is empty");
  return parse_llm_response(transport_->post(kLlmGenerateEndpoint, to_json(request)));
}

std::string prompt_signature(std::string_view prompt) {
  std::string sig;
  if (prompt.find(prompt_headers::reformulated) != std::string_view::npos) sig += 'R';
  if (prompt.find(prompt_headers::attention) != std::string_view::npos) sig += 'A';
  if (prompt.find(prompt_headers::regions) != std::string_view::npos) sig += 'B';
  if (prompt.find(prompt_headers::chain) != std::string_view::npos) sig += 'C';
  return sig;
}

}  // namespace medxplain
