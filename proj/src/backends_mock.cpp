#include <cmath>
#include <random>
#include <sstream>

#include "medxplain/backends.hpp"
#include "medxplain/error.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

using nlohmann::json;

namespace {

constexpr const char* kReformulation =
    "In this histopathology image, identify and describe visible pathological structures, "
    "cellular abnormalities, and diagnostic features relevant to medical interpretation.";

const std::vector<std::string> kAnswers = {
    "yes", "no", "myocardium", "fibrosis or necrosis", "granulomatous inflammation",
    "adenocarcinoma", "squamous epithelium", "hemorrhage or congestion"};

const std::vector<std::string> kTissues = {"cardiac muscle", "glandular epithelium", "lung parenchyma",
                                           "hepatic lobules", "renal cortex", "lymphoid tissue"};
const std::vector<std::string> kFindings = {
    "interstitial fibrosis", "nuclear pleomorphism", "inflammatory infiltrate",
    "coagulative necrosis", "vascular congestion", "mitotic figures"};
const std::vector<std::string> kProcesses = {"chronic inflammation", "ischemic injury",
                                             "a neoplastic process", "reactive changes"};
const std::vector<std::string> kConclusions = {"chronic myocarditis", "invasive carcinoma",
                                               "granulomatous disease", "infarction"};

const char* kStepTitles[6] = {"Visual Observation",    "Attention Analysis",
                              "Medical Context",       "Differential Analysis",
                              "Evidence Integration",  "Clinical Conclusion"};
const char* kStepTexts[6] = {
    "The tissue shows preserved architecture with focal areas of altered cellular morphology.",
    "The highlighted regions concentrate on the areas of increased cellularity and stromal change.",
    "These patterns are characteristic of tissue injury with an accompanying inflammatory response.",
    "Alternatives include reactive change, infection and early neoplasia; the morphology favours a reactive process.",
    "The observed morphology and the attention pattern agree on the same focal abnormality.",
    "The findings support the initial answer with moderate to high diagnostic confidence."};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Portable uniform in [0,1): std::uniform_real_distribution is implementation-defined.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t request_key(const json& body, std::uint64_t seed) {
  std::string material = body.value("image", std::string{});
  material += '\x1f';
  material += body.value("question", std::string{});
  material += '\x1f';
  material += body.value("prompt", std::string{});
  return util::fnv1a64(material, util::fnv1a64(std::to_string(seed)));
}

json nested_grid(const GridD& g) {
  json out = json::array();
  for (std::size_t i = 0; i < g.height(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < g.width(); ++j) row.push_back(g(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

std::size_t count_region_rows(std::string_view prompt) {
  const auto start = prompt.find(prompt_headers::regions);
  if (start == std::string_view::npos) return 0;
  std::istringstream in(std::string(prompt.substr(start)));
  std::string line;
  std::getline(in, line);  // header
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("## ", 0) == 0) break;
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
  }
  return rows;
}

}  // namespace

MockProfile MockProfile::load(const std::filesystem::path& path) {
  json j = json::parse(util::read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("mock profile is not a JSON object: " + path.string());
  MockProfile p;
  try {
    if (j.contains("attention")) {
      const auto& a = j.at("attention");
      p.grid_size = a.value("grid_size", std::size_t{16});
      p.grid_base = a.value("base", 0.0);
      for (const auto& r : a.value("rects", json::array())) {
        p.rects.push_back(Rect{r.at("row").get<std::size_t>(), r.at("col").get<std::size_t>(),
                               r.at("height").get<std::size_t>(), r.at("width").get<std::size_t>(),
                               r.at("value").get<double>()});
      }
    }
    if (j.contains("chain_confidences")) {
      p.chain_confidences = j.at("chain_confidences").get<std::vector<double>>();
      if (p.chain_confidences.size() != 6) throw ConfigError("chain_confidences needs six values");
    }
    if (j.contains("vqa_answer")) p.vqa_answer = j.at("vqa_answer").get<std::string>();
    if (j.contains("reformulation")) p.reformulation = j.at("reformulation").get<std::string>();
    if (j.contains("answers")) {
      p.answers = j.at("answers").get<std::unordered_map<std::string, std::string>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError("mock profile " + path.string() + ": " + e.what());
  }
  if (p.grid_size == 0) throw ConfigError("mock profile grid_size must be positive");
  return p;
}

MockTransport::MockTransport(MockRole role, std::uint64_t seed,
                             std::shared_ptr<const MockProfile> profile, MockFaults faults)
    : role_(role), seed_(seed), profile_(std::move(profile)), faults_(faults) {}

json MockTransport::post(std::string_view endpoint, const json& body) {
  if (endpoint == kVqaAnswerEndpoint) return answer(body);
  if (endpoint == kVqaAttentionEndpoint) return attention(body);
  if (endpoint == kLlmGenerateEndpoint) return generate(body);
  throw BackendUnavailable("mock: unknown endpoint " + std::string(endpoint));
}

json MockTransport::answer(const json& body) const {
  if (faults_.answer_down) throw BackendUnavailable("mock: answer endpoint down");
  if (profile_ && profile_->vqa_answer) return json{{"answer", *profile_->vqa_answer}};
  return json{{"answer", kAnswers[request_key(body, seed_) % kAnswers.size()]}};
}

json MockTransport::attention(const json& body) const {
  if (faults_.attention_down) throw BackendUnavailable("mock: attention endpoint down");
  const std::string layer = "vision_model.encoder.layers.11";
  if (faults_.attention_malformed) {
    return json{{"features", json::array({json::array({json::array({1.0, 2.0})})})},
                {"gradients", json::array({json::array({json::array({1.0})})})},
                {"target_layer", layer}};
  }

  std::size_t n = 16;
  std::size_t channels = 4;
  Tensor3 features, gradients;
  if (profile_ && !profile_->rects.empty()) {
    n = profile_->grid_size;
    channels = 1;
    features = Tensor3(1, n, n, profile_->grid_base);
    for (const auto& r : profile_->rects) {
      for (std::size_t i = r.row; i < std::min(n, r.row + r.height); ++i)
        for (std::size_t j = r.col; j < std::min(n, r.col + r.width); ++j) features(0, i, j) = r.value;
    }
    gradients = Tensor3(1, n, n, 1.0);
  } else {
    Rng rng(request_key(body, seed_));
    features = Tensor3(channels, n, n);
    gradients = Tensor3(channels, n, n);
    const std::size_t blobs = 2 + rng.index(4);
    for (std::size_t b = 0; b < blobs; ++b) {
      const double cy = 1.5 + rng.uniform() * (static_cast<double>(n) - 3.0);
      const double cx = 1.5 + rng.uniform() * (static_cast<double>(n) - 3.0);
      const double sigma = 0.8 + rng.uniform() * 1.6;
      const double amp = 0.4 + rng.uniform() * 0.6;
      const std::size_t k = rng.index(channels);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          const double dy = static_cast<double>(i) - cy;
          const double dx = static_cast<double>(j) - cx;
          features(k, i, j) += amp * std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
        }
      }
    }
    for (std::size_t k = 0; k < channels; ++k) {
      // Channel 0 always contributes positively so the CAM is never empty.
      const double mean = k == 0 ? 0.5 + rng.uniform() : rng.uniform() * 1.2 - 0.3;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) gradients(k, i, j) = mean + (rng.uniform() - 0.5) * 0.1;
    }
  }

  if (faults_.attention_heatmap_variant) {
    GridD g(n, n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < channels; ++k) g(i, j) += features(k, i, j);
        peak = std::max(peak, g(i, j));
      }
    }
    if (peak > 0.0)
      for (double& v : g.values()) v /= peak;
    return json{{"heatmap", nested_grid(g)}, {"target_layer", layer}};
  }

  AttentionArtifactResponse r;
  r.payload = GradCamTensors{
      FeatureStack(channels, n, n, std::vector<double>(features.values().begin(), features.values().end())),
      GradientStack(channels, n, n, std::vector<double>(gradients.values().begin(), gradients.values().end()))};
  r.target_layer = layer;
  return to_json(r);
}

json MockTransport::generate(const json& body) const {
  if (faults_.llm_down) throw BackendUnavailable("mock: llm endpoint down");
  const std::string prompt = body.value("prompt", std::string{});
  const std::uint64_t key = request_key(body, seed_);

  if (role_ == MockRole::reformulator) {
    if (profile_ && profile_->reformulation) return json{{"text", *profile_->reformulation}};
    return json{{"text", kReformulation}};
  }

  if (prompt.find(prompt_headers::reasoning_task) != std::string::npos) {
    Rng rng(key);
    std::ostringstream out;
    for (int s = 0; s < 6; ++s) {
      const double c = profile_ && !profile_->chain_confidences.empty()
                           ? profile_->chain_confidences[static_cast<std::size_t>(s)]
                           : 0.78 + 0.14 * rng.uniform();
      out << "Step " << (s + 1) << " - " << kStepTitles[s] << ": " << kStepTexts[s] << "\n"
          << "confidence: " << util::format_fixed(c, 2) << "\n\n";
    }
    return json{{"text", out.str()}};
  }

  const std::string sig = prompt_signature(prompt);
  if (profile_) {
    if (auto it = profile_->answers.find(sig); it != profile_->answers.end()) {
      return json{{"text", it->second}};
    }
  }

  Rng rng(key);
  std::ostringstream out;
  out << "The image shows " << kTissues[rng.index(kTissues.size())] << " with "
      << kFindings[rng.index(kFindings.size())] << ".";
  if (sig.find('A') != std::string::npos) {
    out << " The attention map highlights " << kFindings[rng.index(kFindings.size())]
        << " in the tissue.";
  }
  if (sig.find('B') != std::string::npos) {
    out << " Identified " << count_region_rows(prompt) << " attention regions.";
  }
  if (sig.find('C') != std::string::npos || rng.uniform() < 0.5) {
    out << " These findings suggest " << kProcesses[rng.index(kProcesses.size())] << ".";
  }
  if (rng.uniform() < 0.6) {
    out << " However, the limited field of view prevents assessment of the surrounding tissue.";
  }
  if (sig.find('C') != std::string::npos || rng.uniform() < 0.5) {
    out << " Overall, the features are consistent with " << kConclusions[rng.index(kConclusions.size())]
        << ".";
  }
  return json{{"text", out.str()}};
}

}  // namespace medxplain
