#include "medxplain/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "medxplain/error.hpp"

namespace medxplain {

void MetricWeights::validate() const {
  const double w[] = {terminology, structure, coherence, attention_quality, reasoning_confidence};
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("metric weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("metric weights must sum to 1");
}

double score_terminology(std::string_view explanation, const ScoringResources& res) {
  return text::terminology_density(explanation, res.lexicon, res.stopwords);
}

double score_structure(std::string_view explanation, const ExplanationCues& cues) {
  const auto tokens = text::tokenize(explanation);
  if (tokens.empty()) return 0.0;
  int present = 0;
  for (const text::CueList* list : {&cues.observation, &cues.analysis, &cues.limitation, &cues.conclusion}) {
    if (list->matches(tokens)) ++present;
  }
  return present / 4.0;
}

double score_coherence(std::string_view explanation, const text::StopWords& stopwords) {
  if (explanation.find_first_not_of(" \t\r\n") == std::string_view::npos) return 0.0;
  std::vector<std::set<std::string>> sentences;
  for (const auto& s : text::split_sentences(explanation)) {
    auto tokens = text::content_tokens(s, stopwords);
    if (!tokens.empty()) sentences.emplace_back(tokens.begin(), tokens.end());
  }
  if (sentences.size() < 2) return 0.5;
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < sentences.size(); ++n) {
    const auto& a = sentences[n];
    const auto& b = sentences[n + 1];
    std::size_t common = 0;
    for (const auto& t : a) common += b.count(t);
    const std::size_t uni = a.size() + b.size() - common;
    total += static_cast<double>(common) / static_cast<double>(uni);
  }
  return 0.5 + 0.5 * total / static_cast<double>(sentences.size() - 1);
}

double score_attention(const std::vector<RegionBox>& regions) {
  if (regions.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : regions) sum += r.score;
  return sum / static_cast<double>(regions.size());
}

double composite(const EvaluationScores& s, const MetricWeights& w) {
  w.validate();
  const double v = w.terminology * s.terminology + w.structure * s.structure +
                   w.coherence * s.coherence + w.attention_quality * s.attention_quality +
                   w.reasoning_confidence * s.reasoning_confidence;
  return std::clamp(v, 0.0, 1.0);
}

EvaluationScores evaluate(std::string_view explanation, const std::vector<RegionBox>& regions,
                          double reasoning_confidence, const ScoringResources& res,
                          const MetricWeights& weights) {
  EvaluationScores s;
  s.terminology = score_terminology(explanation, res);
  s.structure = score_structure(explanation, res.cues);
  s.coherence = score_coherence(explanation, res.stopwords);
  s.attention_quality = score_attention(regions);
  s.reasoning_confidence = std::clamp(reasoning_confidence, 0.0, 1.0);
  s.composite = composite(s, weights);
  return s;
}

}  // namespace medxplain
