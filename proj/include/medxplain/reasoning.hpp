#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medxplain/backends.hpp"
#include "medxplain/regions.hpp"

namespace medxplain {

enum class StepKind {
  visual_observation,
  attention_analysis,
  medical_context,
  differential_analysis,
  evidence_integration,
  clinical_conclusion
};
inline constexpr std::size_t kChainSteps = 6;

std::string_view to_string(StepKind k);
std::string_view step_title(StepKind k);  // "Visual Observation", ...
StepKind step_kind_from_string(std::string_view s);

enum class ReasoningFlow { attention_guided, pathology_focused, comparative };
std::string_view to_string(ReasoningFlow f);
ReasoningFlow reasoning_flow_from_string(std::string_view s);

using StepWeights = std::array<double, kChainSteps>;

/// (0.15 x5, 0.25): the clinical conclusion carries the most weight.
StepWeights default_step_weights();
/// Throws ConfigError unless every weight is positive and they sum to 1 (1e-9).
void validate_step_weights(const StepWeights& w);

inline constexpr double kDefaultStepConfidence = 0.75;

struct ReasoningStep {
  int index = 1;
  StepKind kind = StepKind::visual_observation;
  std::string text;
  double confidence = kDefaultStepConfidence;
  bool defaulted = false;  // confidence or section missing from the reply

  bool operator==(const ReasoningStep&) const = default;
};

struct ReasoningChain {
  std::vector<ReasoningStep> steps;
  ReasoningFlow flow = ReasoningFlow::pathology_focused;
  StepWeights weights = default_step_weights();
  double overall_confidence = kDefaultStepConfidence;
  bool degraded = false;        // at least one step fell back to defaults
  bool backend_failed = false;  // no reply at all; steps are placeholders
  std::string error;

  bool operator==(const ReasoningChain&) const = default;
};

struct FlowThresholds {
  double attention_strength = 0.5;
  double pathology_confidence = 0.5;
  int candidate_count = 2;
};

ReasoningFlow select_flow(double attention_strength, double pathology_confidence,
                          int candidate_count, const FlowThresholds& thresholds = {});

/// Normalised weighted harmonic mean (sum w) / (sum w/c). Throws InvalidInput
/// on length mismatch, empty input, or any non-positive value.
double aggregate_confidence(std::span<const double> confidences, std::span<const double> weights);

struct ReasoningContext {
  std::string question;
  std::string initial_answer;
  std::vector<RegionBox> regions;
  std::string attention_summary;
  double attention_strength = 0.0;
  double pathology_confidence = 0.5;
  int candidate_count = 1;
};

struct ReasoningResources {
  std::string prompt_template;  // {question} {initial_answer} {regions_table} {attention_summary}
  FlowThresholds thresholds;
  LlmGenerateRequest request_defaults;
};

/// Pipe-separated table, one row per region, used in every prompt.
std::string regions_table(const std::vector<RegionBox>& regions);

std::string build_reasoning_prompt(const ReasoningContext& ctx, ReasoningFlow flow,
                                   const ReasoningResources& res);

/// Splits a reply into the six sections; missing sections or confidences get
/// kDefaultStepConfidence and are flagged.
std::vector<ReasoningStep> parse_reasoning_reply(std::string_view reply);

/// One structured prompt per chain. Backend failure yields six placeholder
/// steps at the default confidence; never throws for backend trouble.
ReasoningChain build_chain(const ReasoningContext& ctx, LlmBackend& backend,
                           const StepWeights& weights, const ReasoningResources& res);

/// Candidate diagnoses named in a short answer ("a or b" counts two).
int count_answer_candidates(std::string_view answer);
/// `confidence: x` embedded in an answer, else 0.5.
double parse_answer_confidence(std::string_view answer);

}  // namespace medxplain
