#include "medxplain/reasoning.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <regex>
#include <sstream>

#include "medxplain/error.hpp"
#include "medxplain/text.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

namespace {

constexpr std::array<StepKind, kChainSteps> kOrder = {
    StepKind::visual_observation, StepKind::attention_analysis,    StepKind::medical_context,
    StepKind::differential_analysis, StepKind::evidence_integration, StepKind::clinical_conclusion};

const std::regex& confidence_re() {
  static const std::regex re(R"(confidence\s*[:=]\s*([0-9]*\.?[0-9]+))", std::regex::icase);
  return re;
}

std::optional<int> header_step(const std::string& line) {
  static const std::regex step_re(R"(^\s*[#*\s]*step\s*([1-6])\b)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(line, m, step_re)) return std::stoi(m[1]);
  std::string lower = line;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto first = lower.find_first_not_of(" \t#*0123456789.)-");
  if (first == std::string::npos) return std::nullopt;
  for (std::size_t s = 0; s < kChainSteps; ++s) {
    std::string title(step_title(kOrder[s]));
    std::transform(title.begin(), title.end(), title.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower.compare(first, title.size(), title) == 0) return static_cast<int>(s + 1);
  }
  return std::nullopt;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string strip_header(const std::string& line) {
  const auto colon = line.find(':');
  return colon == std::string::npos ? std::string{} : trim(line.substr(colon + 1));
}

std::vector<ReasoningStep> placeholder_steps() {
  std::vector<ReasoningStep> steps;
  for (std::size_t s = 0; s < kChainSteps; ++s) {
    steps.push_back({static_cast<int>(s + 1), kOrder[s],
                     std::string(step_title(kOrder[s])) + ": unavailable", kDefaultStepConfidence, true});
  }
  return steps;
}

}  // namespace

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::visual_observation: return "visual_observation";
    case StepKind::attention_analysis: return "attention_analysis";
    case StepKind::medical_context: return "medical_context";
    case StepKind::differential_analysis: return "differential_analysis";
    case StepKind::evidence_integration: return "evidence_integration";
    case StepKind::clinical_conclusion: return "clinical_conclusion";
  }
  return "visual_observation";
}

std::string_view step_title(StepKind k) {
  switch (k) {
    case StepKind::visual_observation: return "Visual Observation";
    case StepKind::attention_analysis: return "Attention Analysis";
    case StepKind::medical_context: return "Medical Context";
    case StepKind::differential_analysis: return "Differential Analysis";
    case StepKind::evidence_integration: return "Evidence Integration";
    case StepKind::clinical_conclusion: return "Clinical Conclusion";
  }
  return "Visual Observation";
}

StepKind step_kind_from_string(std::string_view s) {
  for (StepKind k : kOrder) {
    if (to_string(k) == s) return k;
  }
  throw InvalidInput("unknown reasoning step kind: " + std::string(s));
}

std::string_view to_string(ReasoningFlow f) {
  switch (f) {
    case ReasoningFlow::attention_guided: return "attention_guided";
    case ReasoningFlow::pathology_focused: return "pathology_focused";
    case ReasoningFlow::comparative: return "comparative";
  }
  return "pathology_focused";
}

ReasoningFlow reasoning_flow_from_string(std::string_view s) {
  if (s == "attention_guided") return ReasoningFlow::attention_guided;
  if (s == "pathology_focused") return ReasoningFlow::pathology_focused;
  if (s == "comparative") return ReasoningFlow::comparative;
  throw InvalidInput("unknown reasoning flow: " + std::string(s));
}

StepWeights default_step_weights() { return {0.15, 0.15, 0.15, 0.15, 0.15, 0.25}; }

void validate_step_weights(const StepWeights& w) {
  double sum = 0.0;
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("step weights must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("step weights must sum to 1 (got " + util::format_fixed(sum, 6) + ")");
  }
}

ReasoningFlow select_flow(double attention_strength, double pathology_confidence,
                          int candidate_count, const FlowThresholds& t) {
  if (attention_strength >= t.attention_strength) return ReasoningFlow::attention_guided;
  if (pathology_confidence >= t.pathology_confidence) return ReasoningFlow::pathology_focused;
  if (candidate_count >= t.candidate_count) return ReasoningFlow::comparative;
  return ReasoningFlow::pathology_focused;
}

double aggregate_confidence(std::span<const double> confidences, std::span<const double> weights) {
  if (confidences.empty() || confidences.size() != weights.size()) {
    throw InvalidInput("confidences and weights must be non-empty and of equal length");
  }
  double wsum = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i], w = weights[i];
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("step confidence must be positive");
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidInput("step weight must be positive");
    wsum += w;
    denom += w / c;
  }
  return wsum / denom;
}

std::string regions_table(const std::vector<RegionBox>& regions) {
  if (regions.empty()) return "(no regions)\n";
  std::ostringstream out;
  out << "rank | x | y | w | h | score\n";
  for (const auto& r : regions) {
    out << r.rank << " | " << r.x << " | " << r.y << " | " << r.width << " | " << r.height << " | "
        << util::format_fixed(r.score, 3) << "\n";
  }
  return out.str();
}

std::string build_reasoning_prompt(const ReasoningContext& ctx, ReasoningFlow flow,
                                   const ReasoningResources& res) {
  std::string directive;
  switch (flow) {
    case ReasoningFlow::attention_guided:
      directive = "Reasoning flow: attention-guided. Anchor each step in the highlighted regions.";
      break;
    case ReasoningFlow::pathology_focused:
      directive = "Reasoning flow: pathology-focused. Follow the diagnostic criteria for the suspected lesion.";
      break;
    case ReasoningFlow::comparative:
      directive = "Reasoning flow: comparative. Weigh the competing diagnoses against each other.";
      break;
  }
  return directive + "\n\n" +
         util::fill_template(res.prompt_template,
                             {{"question", ctx.question},
                              {"initial_answer", ctx.initial_answer},
                              {"regions_table", regions_table(ctx.regions)},
                              {"attention_summary", ctx.attention_summary}});
}

std::vector<ReasoningStep> parse_reasoning_reply(std::string_view reply) {
  std::array<std::optional<std::string>, kChainSteps> sections;
  std::istringstream in{std::string(reply)};
  std::string line;
  int current = 0;
  while (std::getline(in, line)) {
    if (auto step = header_step(line)) {
      current = *step;
      if (!sections[static_cast<std::size_t>(current - 1)]) {
        sections[static_cast<std::size_t>(current - 1)] = strip_header(line) + "\n";
      } else {
        current = 0;  // duplicate header: ignore the repeated section
      }
      continue;
    }
    if (current > 0) *sections[static_cast<std::size_t>(current - 1)] += line + "\n";
  }

  std::vector<ReasoningStep> steps;
  for (std::size_t s = 0; s < kChainSteps; ++s) {
    ReasoningStep step{static_cast<int>(s + 1), kOrder[s], {}, kDefaultStepConfidence, true};
    if (sections[s]) {
      const std::string& body = *sections[s];
      double conf = -1.0;  // last stated confidence wins; -1 marks none
      for (auto it = std::sregex_iterator(body.begin(), body.end(), confidence_re());
           it != std::sregex_iterator(); ++it) {
        try {
          conf = std::stod((*it)[1]);
        } catch (const std::exception&) {
          conf = -1.0;
        }
      }
      std::string text = std::regex_replace(body, confidence_re(), "");
      std::replace(text.begin(), text.end(), '\n', ' ');
      text = trim(std::regex_replace(text, std::regex(R"(\s+)"), " "));
      step.text = text.empty() ? std::string(step_title(kOrder[s])) : text;
      if (conf > 0.0 && conf <= 1.0) {
        step.confidence = conf;
        step.defaulted = false;
      }
    } else {
      step.text = std::string(step_title(kOrder[s])) + ": not provided";
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

ReasoningChain build_chain(const ReasoningContext& ctx, LlmBackend& backend,
                           const StepWeights& weights, const ReasoningResources& res) {
  validate_step_weights(weights);
  ReasoningChain chain;
  chain.weights = weights;
  chain.flow = select_flow(ctx.attention_strength, ctx.pathology_confidence, ctx.candidate_count,
                           res.thresholds);
  try {
    LlmGenerateRequest req = res.request_defaults;
    req.prompt = build_reasoning_prompt(ctx, chain.flow, res);
    chain.steps = parse_reasoning_reply(backend.llm_generate(req).text);
  } catch (const std::exception& e) {
    chain.steps = placeholder_steps();
    chain.backend_failed = true;
    chain.error = e.what();
  }
  chain.degraded = std::any_of(chain.steps.begin(), chain.steps.end(),
                               [](const ReasoningStep& s) { return s.defaulted; });
  std::array<double, kChainSteps> conf{};
  for (std::size_t s = 0; s < kChainSteps; ++s) conf[s] = chain.steps[s].confidence;
  chain.overall_confidence = aggregate_confidence(conf, weights);
  return chain;
}

int count_answer_candidates(std::string_view answer) {
  const auto tokens = text::tokenize(answer);
  if (tokens.empty()) return 1;
  return 1 + static_cast<int>(std::count(tokens.begin(), tokens.end(), "or"));
}

double parse_answer_confidence(std::string_view answer) {
  const std::string s(answer);
  std::smatch m;
  if (std::regex_search(s, m, confidence_re())) {
    try {
      const double v = std::stod(m[1]);
      if (v >= 0.0 && v <= 1.0) return v;
    } catch (const std::exception&) {
    }
  }
  return 0.5;
}

}  // namespace medxplain
