#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "medxplain/backends.hpp"
#include "medxplain/text.hpp"

namespace medxplain {

/// Keyword lists for the three structural cues of a clinical query.
struct QueryCues {
  text::CueList interrogative;  // wh-words and imperative verbs; a '?' also counts
  text::CueList anatomical;
  text::CueList output_spec;
};

struct QualityWeights {
  double terminology = 0.5;
  double structure = 0.5;
};

/// Everything reformulation needs besides the backend.
struct ReformulationResources {
  text::StopWords stopwords;
  text::Lexicon lexicon;
  QueryCues cues;
  std::string prompt_template;  // contains {question}
  QualityWeights weights;
  LlmGenerateRequest request_defaults;
};

struct ReformulatedQuery {
  std::string original;
  std::string reformulated;
  double terminology_density_original = 0.0;
  double terminology_density_reformulated = 0.0;
  double structure_compliance = 0.0;  // of the reformulated text
  double improvement = 0.0;
  bool degraded = false;
  std::string error;  // backend failure message when degraded

  bool operator==(const ReformulatedQuery&) const = default;
};

using text::terminology_density;

/// Fraction of {interrogative/imperative, anatomical reference, output
/// specification} cues present in `text`.
double structure_compliance(std::string_view text, const QueryCues& cues);

double query_quality(std::string_view text, const ReformulationResources& res);

/// Never throws on backend trouble: falls back to the original question with
/// improvement 0 and `degraded` set. Throws InvalidInput on an empty question.
ReformulatedQuery reformulate(const std::string& question, LlmBackend& backend,
                              const ReformulationResources& res);

}  // namespace medxplain
