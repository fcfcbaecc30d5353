#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "medxplain/regions.hpp"
#include "medxplain/text.hpp"

namespace medxplain {

struct MetricWeights {
  double terminology = 0.25;
  double structure = 0.20;
  double coherence = 0.25;
  double attention_quality = 0.15;
  double reasoning_confidence = 0.15;

  /// Throws InvalidInput unless all weights are >= 0 and sum to 1 (1e-9).
  void validate() const;
};

struct EvaluationScores {
  double terminology = 0.0;
  double structure = 0.0;
  double coherence = 0.0;
  double attention_quality = 0.0;
  double reasoning_confidence = 0.0;
  double composite = 0.0;

  bool operator==(const EvaluationScores&) const = default;
};

/// Cue lists for the four discourse elements of an explanation.
struct ExplanationCues {
  text::CueList observation;
  text::CueList analysis;
  text::CueList limitation;
  text::CueList conclusion;
};

struct ScoringResources {
  text::StopWords stopwords;
  text::Lexicon lexicon;
  ExplanationCues cues;
};

double score_terminology(std::string_view explanation, const ScoringResources& res);

/// Fraction of the four discourse elements present.
double score_structure(std::string_view explanation, const ExplanationCues& cues);

/// Adjacent-sentence content overlap (Jaccard) mapped to 0.5 + 0.5*mean.
/// Texts with fewer than two content-bearing sentences score 0.5; blank text 0.
double score_coherence(std::string_view explanation, const text::StopWords& stopwords);

/// Mean region score; 0 when no regions were extracted.
double score_attention(const std::vector<RegionBox>& regions);

/// Weighted sum of the five dimensions (the `composite` field is ignored).
double composite(const EvaluationScores& scores, const MetricWeights& weights);

/// Scores one explanation and fills in the composite.
EvaluationScores evaluate(std::string_view explanation, const std::vector<RegionBox>& regions,
                          double reasoning_confidence, const ScoringResources& res,
                          const MetricWeights& weights);

}  // namespace medxplain
