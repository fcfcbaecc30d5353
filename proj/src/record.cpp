#include <fstream>

#include "medxplain/error.hpp"
#include "medxplain/pipeline.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

using nlohmann::json;

namespace {

// Field access that names the offending path in every error.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }

  const json& at(const char* key) const {
    if (!j_.contains(key)) throw ParseError(path_ + "." + key + ": missing");
    return j_[key];
  }
  bool has(const char* key) const { return j_.contains(key) && !j_[key].is_null(); }
  std::string sub(const char* key) const { return path_ + "." + key; }

  std::string str(const char* key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ParseError(sub(key) + ": expected a string");
    return v.get<std::string>();
  }
  double num(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ParseError(sub(key) + ": expected a number");
    return v.get<double>();
  }
  std::size_t count(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ParseError(sub(key) + ": expected a non-negative integer");
    }
    return v.get<std::size_t>();
  }
  int integer(const char* key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw ParseError(sub(key) + ": expected an integer");
    return v.get<int>();
  }
  bool boolean(const char* key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw ParseError(sub(key) + ": expected a boolean");
    return v.get<bool>();
  }
  const json& array(const char* key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ParseError(sub(key) + ": expected an array");
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename F>
auto enum_field(const Reader& r, const char* key, F&& parse) {
  const std::string s = r.str(key);
  try {
    return parse(s);
  } catch (const std::exception& e) {
    throw ParseError(r.sub(key) + ": " + e.what());
  }
}

json region_json(const RegionBox& b) {
  return {{"x", b.x},         {"y", b.y},         {"w", b.width}, {"h", b.height},
          {"score", b.score}, {"rank", b.rank}, {"area_px", b.area_px}};
}

RegionBox region_from(const json& j, const std::string& path) {
  Reader r(j, path);
  RegionBox b;
  b.x = r.count("x");
  b.y = r.count("y");
  b.width = r.count("w");
  b.height = r.count("h");
  b.score = r.num("score");
  b.rank = r.integer("rank");
  b.area_px = r.count("area_px");
  return b;
}

json chain_json(const ReasoningChain& c) {
  json steps = json::array();
  for (const auto& s : c.steps) {
    steps.push_back({{"index", s.index},
                     {"kind", to_string(s.kind)},
                     {"text", s.text},
                     {"confidence", s.confidence},
                     {"defaulted", s.defaulted}});
  }
  return {{"steps", steps},
          {"flow", to_string(c.flow)},
          {"weights", c.weights},
          {"overall_confidence", c.overall_confidence},
          {"degraded", c.degraded},
          {"backend_failed", c.backend_failed},
          {"error", c.error}};
}

ReasoningChain chain_from(const json& j, const std::string& path) {
  Reader r(j, path);
  ReasoningChain c;
  const json& steps = r.array("steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    Reader s(steps[i], path + ".steps[" + std::to_string(i) + "]");
    ReasoningStep st;
    st.index = s.integer("index");
    st.kind = enum_field(s, "kind", [](const std::string& v) { return step_kind_from_string(v); });
    st.text = s.str("text");
    st.confidence = s.num("confidence");
    st.defaulted = s.boolean("defaulted");
    c.steps.push_back(std::move(st));
  }
  c.flow = enum_field(r, "flow", [](const std::string& v) { return reasoning_flow_from_string(v); });
  const json& w = r.array("weights");
  if (w.size() != c.weights.size()) throw ParseError(r.sub("weights") + ": expected six weights");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!w[i].is_number()) throw ParseError(r.sub("weights") + ": expected numbers");
    c.weights[i] = w[i].get<double>();
  }
  c.overall_confidence = r.num("overall_confidence");
  c.degraded = r.boolean("degraded");
  c.backend_failed = r.boolean("backend_failed");
  c.error = r.str("error");
  return c;
}

json reformulation_json(const ReformulatedQuery& q) {
  return {{"original", q.original},
          {"reformulated", q.reformulated},
          {"terminology_density_original", q.terminology_density_original},
          {"terminology_density_reformulated", q.terminology_density_reformulated},
          {"structure_compliance", q.structure_compliance},
          {"improvement", q.improvement},
          {"degraded", q.degraded},
          {"error", q.error}};
}

ReformulatedQuery reformulation_from(const json& j, const std::string& path) {
  Reader r(j, path);
  ReformulatedQuery q;
  q.original = r.str("original");
  q.reformulated = r.str("reformulated");
  q.terminology_density_original = r.num("terminology_density_original");
  q.terminology_density_reformulated = r.num("terminology_density_reformulated");
  q.structure_compliance = r.num("structure_compliance");
  q.improvement = r.num("improvement");
  q.degraded = r.boolean("degraded");
  q.error = r.str("error");
  return q;
}

json heatmap_json(const HeatmapSummary& h) {
  return {{"source", to_string(h.source)},
          {"target_layer", h.target_layer},
          {"max", h.max},
          {"grid_height", h.grid_height},
          {"grid_width", h.grid_width},
          {"height", h.height},
          {"width", h.width},
          {"grid", h.grid}};
}

HeatmapSummary heatmap_from(const json& j, const std::string& path) {
  Reader r(j, path);
  HeatmapSummary h;
  h.source = enum_field(r, "source", [](const std::string& v) { return heatmap_source_from_string(v); });
  h.target_layer = r.str("target_layer");
  h.max = r.num("max");
  h.grid_height = r.count("grid_height");
  h.grid_width = r.count("grid_width");
  h.height = r.count("height");
  h.width = r.count("width");
  const json& g = r.array("grid");
  if (g.size() != h.grid_height * h.grid_width) {
    throw ParseError(r.sub("grid") + ": expected " + std::to_string(h.grid_height * h.grid_width) + " values");
  }
  h.grid.reserve(g.size());
  for (const auto& v : g) {
    if (!v.is_number()) throw ParseError(r.sub("grid") + ": expected numbers");
    h.grid.push_back(v.get<double>());
  }
  return h;
}

json scores_json(const EvaluationScores& s) {
  return {{"terminology", s.terminology},
          {"structure", s.structure},
          {"coherence", s.coherence},
          {"attention_quality", s.attention_quality},
          {"reasoning_confidence", s.reasoning_confidence},
          {"composite", s.composite}};
}

EvaluationScores scores_from(const json& j, const std::string& path) {
  Reader r(j, path);
  EvaluationScores s;
  s.terminology = r.num("terminology");
  s.structure = r.num("structure");
  s.coherence = r.num("coherence");
  s.attention_quality = r.num("attention_quality");
  s.reasoning_confidence = r.num("reasoning_confidence");
  s.composite = r.num("composite");
  return s;
}

}  // namespace

json record_to_json(const PipelineRecord& r) {
  json regions = json::array();
  for (const auto& b : r.regions) regions.push_back(region_json(b));
  json timings = json::array();
  for (const auto& t : r.timings) timings.push_back({{"stage", t.stage}, {"ms", t.ms}});
  return {{"sample_id", r.sample_id},
          {"config", r.config_name},
          {"image_path", r.image_path},
          {"question", r.question},
          {"ground_truth", r.ground_truth},
          {"reformulation", r.reformulation ? reformulation_json(*r.reformulation) : json(nullptr)},
          {"initial_answer", r.initial_answer},
          {"heatmap", r.heatmap ? heatmap_json(*r.heatmap) : json(nullptr)},
          {"regions", regions},
          {"chain", r.chain ? chain_json(*r.chain) : json(nullptr)},
          {"unified_answer", r.unified_answer},
          {"scores", scores_json(r.scores)},
          {"degradation", to_string(r.degradation)},
          {"errors", r.errors},
          {"timings", timings}};
}

PipelineRecord record_from_json(const json& j) {
  Reader r(j, "record");
  PipelineRecord rec;
  rec.sample_id = r.str("sample_id");
  rec.config_name = r.str("config");
  rec.image_path = r.str("image_path");
  rec.question = r.str("question");
  rec.ground_truth = r.str("ground_truth");
  if (r.has("reformulation")) rec.reformulation = reformulation_from(r.at("reformulation"), r.sub("reformulation"));
  rec.initial_answer = r.str("initial_answer");
  if (r.has("heatmap")) rec.heatmap = heatmap_from(r.at("heatmap"), r.sub("heatmap"));
  const json& regions = r.array("regions");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    rec.regions.push_back(region_from(regions[i], "record.regions[" + std::to_string(i) + "]"));
  }
  if (r.has("chain")) rec.chain = chain_from(r.at("chain"), r.sub("chain"));
  rec.unified_answer = r.str("unified_answer");
  rec.scores = scores_from(r.at("scores"), r.sub("scores"));
  rec.degradation = enum_field(r, "degradation", [](const std::string& v) { return degradation_from_string(v); });
  for (const auto& e : r.array("errors")) {
    if (!e.is_string()) throw ParseError("record.errors: expected strings");
    rec.errors.push_back(e.get<std::string>());
  }
  const json& timings = r.array("timings");
  for (std::size_t i = 0; i < timings.size(); ++i) {
    Reader t(timings[i], "record.timings[" + std::to_string(i) + "]");
    StageTiming st{t.str("stage"), t.num("ms")};
    if (st.ms < 0.0) throw ParseError("record.timings[" + std::to_string(i) + "].ms: negative");
    rec.timings.push_back(std::move(st));
  }
  return rec;
}

void persist_record(const PipelineRecord& r, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  util::write_file(path, record_to_json(r).dump(2) + "\n");
}

PipelineRecord load_record(const std::filesystem::path& path) {
  const std::string text = util::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return record_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::optional<AttentionHeatmap> record_heatmap(const PipelineRecord& r) {
  if (!r.heatmap || r.heatmap->grid.empty()) return std::nullopt;
  const auto& h = *r.heatmap;
  GridD grid(h.grid_height, h.grid_width, h.grid);
  AttentionHeatmap hm = normalize_heatmap(grid);
  hm.source = h.source;
  hm.target_layer = h.target_layer;
  if (h.height == 0 || h.width == 0) return hm;
  AttentionHeatmap full = normalize_heatmap(upsample_heatmap(hm, h.height, h.width).values);
  full.source = h.source;
  full.target_layer = h.target_layer;
  return full;
}

}  // namespace medxplain
