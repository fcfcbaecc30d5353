#include "medxplain/query_reformulation.hpp"

#include <algorithm>

#include "medxplain/error.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

namespace {
constexpr double kQualityFloor = 1e-6;

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}
}  // namespace

double structure_compliance(std::string_view text, const QueryCues& cues) {
  const auto tokens = text::tokenize(text);
  if (tokens.empty()) return 0.0;
  int present = 0;
  if (text.find('?') != std::string_view::npos || cues.interrogative.matches(tokens)) ++present;
  if (cues.anatomical.matches(tokens)) ++present;
  if (cues.output_spec.matches(tokens)) ++present;
  return present / 3.0;
}

double query_quality(std::string_view text, const ReformulationResources& res) {
  return res.weights.terminology * terminology_density(text, res.lexicon, res.stopwords) +
         res.weights.structure * structure_compliance(text, res.cues);
}

ReformulatedQuery reformulate(const std::string& question, LlmBackend& backend,
                              const ReformulationResources& res) {
  if (question.empty()) throw InvalidInput("reformulate: question is empty");

  ReformulatedQuery out;
  out.original = question;
  out.terminology_density_original = terminology_density(question, res.lexicon, res.stopwords);

  try {
    LlmGenerateRequest req = res.request_defaults;
    req.prompt = util::fill_template(res.prompt_template, {{"question", question}});
    out.reformulated = trim(backend.llm_generate(req).text);
    if (out.reformulated.empty()) {
      out.degraded = true;
      out.error = "reformulator returned an empty reply";
    }
  } catch (const std::exception& e) {
    out.degraded = true;
    out.error = e.what();
  }

  if (out.degraded) {
    out.reformulated = question;
    out.terminology_density_reformulated = out.terminology_density_original;
    out.structure_compliance = structure_compliance(question, res.cues);
    out.improvement = 0.0;
    return out;
  }

  out.terminology_density_reformulated =
      terminology_density(out.reformulated, res.lexicon, res.stopwords);
  out.structure_compliance = structure_compliance(out.reformulated, res.cues);
  const double before = query_quality(question, res);
  const double after = query_quality(out.reformulated, res);
  out.improvement = (after - before) / std::max(before, kQualityFloor);
  return out;
}

}  // namespace medxplain
