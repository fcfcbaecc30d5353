#include "medxplain/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

#include "medxplain/error.hpp"
#include "medxplain/util.hpp"
#include "medxplain/visualization.hpp"

#ifndef MEDXPLAIN_DATA_DIR
#define MEDXPLAIN_DATA_DIR "data"
#endif

namespace medxplain {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void PipelineConfig::validate() const {
  if (name.empty()) throw ConfigError("pipeline config needs a name");
  if (flags.bounding_boxes && !flags.gradcam) throw ConfigError(name + ": bounding_boxes requires gradcam");
  if (flags.chain_of_thought && !flags.gradcam) throw ConfigError(name + ": chain_of_thought requires gradcam");
  if (flags.unified_prompt_includes_boxes && !flags.bounding_boxes) {
    throw ConfigError(name + ": unified_prompt_includes_boxes requires bounding_boxes");
  }
  if (worker_count < 1) throw ConfigError(name + ": worker_count must be at least 1");
  try {
    extraction.validate();
    metric_weights.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(name + ": " + e.what());
  }
  validate_step_weights(step_weights);
  if (!(flow_thresholds.attention_strength >= 0.0 && flow_thresholds.attention_strength <= 1.0) ||
      !(flow_thresholds.pathology_confidence >= 0.0 && flow_thresholds.pathology_confidence <= 1.0) ||
      flow_thresholds.candidate_count < 1) {
    throw ConfigError(name + ": flow thresholds out of range");
  }
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"basic", "query_reform", "bbox", "cot", "complete"};
  return names;
}

PipelineConfig preset(std::string_view name) {
  PipelineConfig c;
  c.name = std::string(name);
  auto& f = c.flags;
  if (name == "basic") {
    return c;
  }
  f.query_reformulation = true;
  f.gradcam = true;
  if (name == "query_reform") return c;
  if (name == "bbox") {
    f.bounding_boxes = true;
    f.unified_prompt_includes_boxes = true;
    return c;
  }
  if (name == "cot") {
    f.bounding_boxes = true;
    f.chain_of_thought = true;
    return c;
  }
  if (name == "complete") {
    f.bounding_boxes = true;
    f.chain_of_thought = true;
    f.unified_prompt_includes_boxes = true;
    return c;
  }
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + std::string(name) + "' (valid: " + valid + ")");
}

// ---------------------------------------------------------------------------
// Manifest

std::vector<Sample> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path.string());
  const auto base = path.parent_path();
  std::vector<Sample> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw ParseError(where + "expected an object");
    auto text = [&](const char* key, bool required) -> std::string {
      if (!j.contains(key)) {
        if (required) throw ParseError(where + "missing field '" + key + "'");
        return {};
      }
      if (!j[key].is_string()) throw ParseError(where + "field '" + key + "' must be a string");
      return j[key].get<std::string>();
    };
    Sample s;
    s.id = text("id", true);
    const std::string image = text("image", true);
    s.question = text("question", true);
    s.ground_truth = text("answer", false);
    if (s.id.empty()) throw ParseError(where + "empty id");
    if (image.empty()) throw ParseError(where + "empty image path");
    if (!seen.insert(s.id).second) throw ParseError(where + "duplicate id '" + s.id + "'");
    s.image_path = std::filesystem::path(image).is_absolute() ? std::filesystem::path(image) : base / image;
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view to_string(Degradation d) {
  switch (d) {
    case Degradation::none: return "none";
    case Degradation::basic_gradcam: return "basic_gradcam";
    case Degradation::attention_free: return "attention_free";
  }
  return "none";
}

Degradation degradation_from_string(std::string_view s) {
  for (auto d : {Degradation::none, Degradation::basic_gradcam, Degradation::attention_free}) {
    if (to_string(d) == s) return d;
  }
  throw ParseError("unknown degradation level '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Resources

ResourcePaths ResourcePaths::in(const std::filesystem::path& data_dir) {
  return {data_dir / "lexicon.txt",
          data_dir / "stopwords.txt",
          data_dir / "cues.json",
          data_dir / "templates" / "reformulate.txt",
          data_dir / "templates" / "reasoning.txt",
          data_dir / "templates" / "unified.txt"};
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("MEDXPLAIN_DATA_DIR"); env && *env) return env;
  return MEDXPLAIN_DATA_DIR;
}

namespace {

text::CueList cue_list(const json& group, const char* key, const std::string& where) {
  if (!group.contains(key) || !group[key].is_array()) {
    throw ConfigError(where + ": missing cue list '" + key + "'");
  }
  std::vector<std::string> phrases;
  for (const auto& p : group[key]) {
    if (!p.is_string()) throw ConfigError(where + ": cue list '" + key + "' must hold strings");
    phrases.push_back(p.get<std::string>());
  }
  return text::CueList(phrases);
}

std::string read_template(const std::filesystem::path& path, std::initializer_list<std::string_view> required) {
  std::string t;
  try {
    t = util::read_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  for (auto placeholder : required) {
    if (t.find(placeholder) == std::string::npos) {
      throw ConfigError(path.string() + ": template lacks " + std::string(placeholder));
    }
  }
  return t;
}

}  // namespace

PipelineResources load_resources(const ResourcePaths& paths) {
  auto words = [](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw ConfigError("missing word list: " + p.string());
    return text::read_word_list(p);
  };
  PipelineResources r;
  const text::StopWords stop(words(paths.stopwords));
  const text::Lexicon lex(words(paths.lexicon), stop);

  json cues;
  try {
    cues = json::parse(util::read_file(paths.cues));
  } catch (const json::parse_error& e) {
    throw ConfigError(paths.cues.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  const std::string where = paths.cues.string();
  if (!cues.contains("query") || !cues.contains("explanation")) {
    throw ConfigError(where + ": expected 'query' and 'explanation' sections");
  }
  const json& q = cues["query"];
  const json& x = cues["explanation"];

  r.reformulation.stopwords = stop;
  r.reformulation.lexicon = lex;
  r.reformulation.cues = {cue_list(q, "interrogative", where), cue_list(q, "anatomical", where),
                          cue_list(q, "output_spec", where)};
  r.reformulation.prompt_template = read_template(paths.reformulation_template, {"{question}"});

  r.reasoning.prompt_template =
      read_template(paths.reasoning_template, {"{question}", "{initial_answer}", "{regions_table}",
                                               "{attention_summary}", prompt_headers::reasoning_task});

  r.scoring.stopwords = stop;
  r.scoring.lexicon = lex;
  r.scoring.cues = {cue_list(x, "observation", where), cue_list(x, "analysis", where),
                    cue_list(x, "limitation", where), cue_list(x, "conclusion", where)};

  r.unified_template = read_template(paths.unified_template, {"{question}", "{initial_answer}", "{context}"});
  return r;
}

// ---------------------------------------------------------------------------
// Single sample

namespace {

class StageClock {
 public:
  StageClock(PipelineRecord& record, const PipelineConfig& config, const StageLogger& log)
      : record_(record), config_(config), log_(log) {}

  template <typename F>
  void run(const char* stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    body();
    double ms = 0.0;
    if (config_.timing == TimingMode::wall) {
      ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    record_.timings.push_back({stage, ms});
    if (log_) log_({record_.sample_id, record_.config_name, stage, ms, record_.degradation});
  }

 private:
  PipelineRecord& record_;
  const PipelineConfig& config_;
  const StageLogger& log_;
};

struct DecodedImage {
  std::string base64;
  cv::Mat pixels;  // empty when the bytes do not decode
};

DecodedImage read_image(const std::filesystem::path& path) {
  DecodedImage img;
  const std::string bytes = util::read_file(path);
  img.base64 = util::base64_encode(bytes);
  const std::vector<unsigned char> buf(bytes.begin(), bytes.end());
  img.pixels = cv::imdecode(buf, cv::IMREAD_COLOR);
  return img;
}

// Channel mean of the activations, without gradient weighting.
AttentionHeatmap activation_heatmap(const FeatureStack& features) {
  if (features.degenerate()) throw InvalidInput("empty activations");
  GridD mean(features.height(), features.width());
  for (std::size_t k = 0; k < features.channels(); ++k) {
    const auto ch = features.channel(k);
    for (std::size_t p = 0; p < ch.size(); ++p) mean.values()[p] += ch[p];
  }
  for (auto& v : mean.values()) {
    v /= static_cast<double>(features.channels());
    if (!std::isfinite(v)) throw InvalidInput("non-finite activations");
    v = std::max(v, 0.0);
  }
  AttentionHeatmap hm = normalize_heatmap(mean);
  hm.source = HeatmapSource::basic_gradcam;
  return hm;
}

HeatmapSummary summarize_heatmap(const AttentionHeatmap& grid, const AttentionHeatmap& full) {
  HeatmapSummary s;
  s.source = full.source;
  s.target_layer = full.target_layer;
  s.max = full.values.values().empty() ? 0.0 : *std::max_element(full.values.values().begin(),
                                                                  full.values.values().end());
  s.grid_height = grid.height();
  s.grid_width = grid.width();
  s.height = full.height();
  s.width = full.width();
  s.grid.assign(grid.values.values().begin(), grid.values.values().end());
  return s;
}

std::string attention_summary(const HeatmapSummary& hm, const std::vector<RegionBox>& regions) {
  std::ostringstream out;
  out << "source " << to_string(hm.source);
  if (!hm.target_layer.empty()) out << ", layer " << hm.target_layer;
  out << ", grid " << hm.grid_height << "x" << hm.grid_width << ", " << regions.size()
      << " salient regions, mean region score " << util::format_fixed(score_attention(regions), 3);
  return out.str();
}

std::string chain_text(const ReasoningChain& chain) {
  std::ostringstream out;
  for (const auto& s : chain.steps) {
    out << "Step " << s.index << " - " << step_title(s.kind) << ": " << s.text << " (confidence "
        << util::format_fixed(s.confidence, 2) << ")\n";
  }
  out << "Overall confidence: " << util::format_fixed(chain.overall_confidence, 3);
  return out.str();
}

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

PipelineRecord run_sample(const Sample& sample, const PipelineConfig& config, const Backends& backends,
                          const PipelineResources& resources, const StageLogger& log) {
  PipelineRecord rec;
  rec.sample_id = sample.id;
  rec.config_name = config.name;
  rec.image_path = sample.image_path.string();
  rec.question = sample.question;
  rec.ground_truth = sample.ground_truth;
  StageClock clock(rec, config, log);

  DecodedImage image;
  try {
    image = read_image(sample.image_path);
    if (image.pixels.empty()) rec.errors.push_back("image: cannot decode " + rec.image_path);
  } catch (const std::exception& e) {
    rec.errors.push_back("image: " + describe(e));
  }
  const std::size_t img_h = image.pixels.empty() ? resources.fallback_image_size
                                                 : static_cast<std::size_t>(image.pixels.rows);
  const std::size_t img_w = image.pixels.empty() ? resources.fallback_image_size
                                                 : static_cast<std::size_t>(image.pixels.cols);

  std::string query = sample.question;
  if (config.flags.query_reformulation) {
    clock.run("reformulate", [&] {
      try {
        if (!backends.reformulator) throw BackendUnavailable("no reformulation backend configured");
        rec.reformulation = reformulate(sample.question, *backends.reformulator, resources.reformulation);
      } catch (const std::exception& e) {
        ReformulatedQuery fallback;
        fallback.original = sample.question;
        fallback.reformulated = sample.question;
        fallback.degraded = true;
        fallback.error = describe(e);
        rec.reformulation = fallback;
      }
      if (rec.reformulation->degraded) rec.errors.push_back("reformulate: " + rec.reformulation->error);
      query = rec.reformulation->reformulated;
    });
  }

  bool vqa_ok = false;
  clock.run("vqa_answer", [&] {
    try {
      if (!backends.vqa) throw BackendUnavailable("no VQA backend configured");
      rec.initial_answer =
          backends.vqa->vqa_answer({image.base64, sample.question, resources.max_answer_tokens}).answer;
      vqa_ok = true;
    } catch (const std::exception& e) {
      rec.errors.push_back("vqa_answer: " + describe(e));
    }
  });

  std::optional<AttentionHeatmap> heatmap;
  if (config.flags.gradcam) {
    clock.run("attention", [&] {
      try {
        if (!backends.vqa) throw BackendUnavailable("no VQA backend configured");
        const auto artifacts = backends.vqa->attention_artifacts({image.base64, sample.question});
        AttentionHeatmap grid;
        if (artifacts.has_tensors()) {
          const auto& t = std::get<GradCamTensors>(artifacts.payload);
          try {
            grid = normalize_heatmap(compute_cam(t.features, compute_channel_weights(t.gradients)));
            grid.source = HeatmapSource::enhanced_gradcam;
            heatmap = gradcam(t.features, t.gradients, img_h, img_w, artifacts.target_layer);
          } catch (const std::exception& e) {
            rec.errors.push_back("attention: gradient weighting failed (" + describe(e) + ")");
            grid = activation_heatmap(t.features);
            heatmap = upsample_heatmap(grid, img_h, img_w);
            heatmap = normalize_heatmap(heatmap->values);
            heatmap->source = HeatmapSource::basic_gradcam;
            rec.degradation = Degradation::basic_gradcam;
          }
        } else {
          const auto& g = std::get<GridD>(artifacts.payload);
          heatmap = heatmap_from_backend(g, img_h, img_w, artifacts.target_layer);
          grid = normalize_heatmap(g);
          rec.degradation = Degradation::basic_gradcam;
        }
        grid.target_layer = artifacts.target_layer;
        heatmap->target_layer = artifacts.target_layer;
        rec.heatmap = summarize_heatmap(grid, *heatmap);
      } catch (const std::exception& e) {
        heatmap.reset();
        rec.heatmap.reset();
        rec.degradation = Degradation::attention_free;
        rec.errors.push_back("attention: " + describe(e));
      }
    });
    if (heatmap) {
      clock.run("regions", [&] {
        try {
          rec.regions = extract_regions(*heatmap, config.extraction);
        } catch (const std::exception& e) {
          rec.errors.push_back("regions: " + describe(e));
        }
      });
    }
  }

  const std::string summary =
      rec.heatmap ? attention_summary(*rec.heatmap, rec.regions) : std::string("attention unavailable");

  if (config.flags.chain_of_thought) {
    clock.run("chain", [&] {
      ReasoningContext ctx;
      ctx.question = query;
      ctx.initial_answer = rec.initial_answer;
      if (config.flags.bounding_boxes) ctx.regions = rec.regions;
      ctx.attention_summary = summary;
      ctx.attention_strength = score_attention(rec.regions);
      ctx.pathology_confidence = parse_answer_confidence(rec.initial_answer);
      ctx.candidate_count = count_answer_candidates(rec.initial_answer);
      ReasoningResources res = resources.reasoning;
      res.thresholds = config.flow_thresholds;
      res.request_defaults = resources.llm_defaults;
      try {
        if (!backends.integrator) throw BackendUnavailable("no LLM backend configured");
        rec.chain = build_chain(ctx, *backends.integrator, config.step_weights, res);
      } catch (const std::exception& e) {
        ReasoningChain failed;
        failed.backend_failed = true;
        failed.error = describe(e);
        failed.weights = config.step_weights;
        rec.chain = failed;
      }
      if (rec.chain->backend_failed) rec.errors.push_back("chain: " + rec.chain->error);
    });
  }

  clock.run("unified", [&] {
    std::ostringstream context;
    if (rec.reformulation) {
      context << prompt_headers::reformulated << "\n" << rec.reformulation->reformulated << "\n\n";
    }
    if (rec.heatmap) context << prompt_headers::attention << "\n" << summary << "\n\n";
    if (rec.heatmap && config.flags.unified_prompt_includes_boxes) {
      context << prompt_headers::regions << "\n" << regions_table(rec.regions) << "\n\n";
    }
    if (rec.chain && !rec.chain->backend_failed) {
      context << prompt_headers::chain << "\n" << chain_text(*rec.chain) << "\n\n";
    }
    LlmGenerateRequest req = resources.llm_defaults;
    req.prompt = util::fill_template(resources.unified_template, {{"question", query},
                                                                  {"initial_answer", rec.initial_answer},
                                                                  {"context", context.str()}});
    if (!image.base64.empty()) req.images.push_back(image.base64);
    if (heatmap && !image.pixels.empty()) {
      try {
        req.images.push_back(util::base64_encode(encode_png(render_heatmap_overlay(image.pixels, *heatmap, {}))));
      } catch (const std::exception& e) {
        rec.errors.push_back("unified: overlay skipped (" + describe(e) + ")");
      }
    }
    try {
      if (!backends.integrator) throw BackendUnavailable("no LLM backend configured");
      rec.unified_answer = backends.integrator->llm_generate(req).text;
    } catch (const std::exception& e) {
      rec.errors.push_back("unified: " + describe(e));
      if (vqa_ok) {
        rec.unified_answer = rec.initial_answer;
      } else {
        rec.errors.push_back("unified: no answer available (VQA and LLM backends both failed)");
      }
    }
  });

  clock.run("evaluate", [&] {
    const double rc = rec.chain && !rec.chain->backend_failed ? rec.chain->overall_confidence : 0.0;
    try {
      rec.scores = evaluate(rec.unified_answer, rec.regions, rc, resources.scoring, config.metric_weights);
    } catch (const std::exception& e) {
      rec.errors.push_back("evaluate: " + describe(e));
    }
  });
  return rec;
}

// ---------------------------------------------------------------------------
// Ablation

std::map<std::string, std::vector<PipelineRecord>> run_ablation(
    const std::vector<Sample>& samples, const std::vector<PipelineConfig>& presets, const Backends& backends,
    const PipelineResources& resources, int workers, const StageLogger& log) {
  if (presets.empty()) throw ConfigError("ablation needs at least one preset");
  if (workers < 1) throw ConfigError("worker count must be at least 1");
  std::set<std::string> names;
  for (const auto& p : presets) {
    p.validate();
    if (!names.insert(p.name).second) throw ConfigError("duplicate preset '" + p.name + "'");
  }

  std::mutex log_mutex;
  StageLogger guarded;
  if (log) {
    guarded = [&](const StageEvent& ev) {
      std::lock_guard lock(log_mutex);
      log(ev);
    };
  }

  const auto n_samples = static_cast<std::ptrdiff_t>(samples.size());
  const auto n_tasks = static_cast<std::ptrdiff_t>(presets.size()) * n_samples;
  std::vector<PipelineRecord> results(static_cast<std::size_t>(n_tasks));
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t t = 0; t < n_tasks; ++t) {
    const auto& cfg = presets[static_cast<std::size_t>(t / n_samples)];
    const auto& s = samples[static_cast<std::size_t>(t % n_samples)];
    results[static_cast<std::size_t>(t)] = run_sample(s, cfg, backends, resources, guarded);
  }

  std::map<std::string, std::vector<PipelineRecord>> out;
  for (const auto& p : presets) out[p.name];
  for (auto& r : results) out[r.config_name].push_back(std::move(r));
  for (auto& [name, recs] : out) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const PipelineRecord& a, const PipelineRecord& b) { return a.sample_id < b.sample_id; });
  }
  return out;
}

namespace {

constexpr const char* kCsvHeader =
    "config,sample_id,terminology,structure,coherence,attention_quality,reasoning_confidence,composite";

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError("ablation CSV line " + std::to_string(lineno) + ": unterminated quote");
  return fields;
}

double parse_number(const std::string& s, std::size_t lineno, const char* column) {
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  double v;
  if (!(in >> v) || !(in >> std::ws).eof() || !std::isfinite(v)) {
    throw ParseError("ablation CSV line " + std::to_string(lineno) + ": bad " + column + " value '" + s + "'");
  }
  return v;
}

}  // namespace

std::string ablation_csv(const std::map<std::string, std::vector<PipelineRecord>>& records,
                         const std::vector<std::string>& config_order) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& name : config_order) {
    const auto it = records.find(name);
    if (it == records.end()) continue;
    for (const auto& r : it->second) {
      const auto& s = r.scores;
      out += csv_field(name) + "," + csv_field(r.sample_id);
      for (double v : {s.terminology, s.structure, s.coherence, s.attention_quality, s.reasoning_confidence,
                       s.composite}) {
        out += "," + util::format_fixed(v, 6);
      }
      out += "\n";
    }
  }
  return out;
}

std::vector<AblationRow> parse_ablation_csv(std::string_view csv) {
  std::vector<AblationRow> rows;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError("ablation CSV line " + std::to_string(lineno) + ": expected header '" + kCsvHeader + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line, lineno);
    if (f.size() != 8) {
      throw ParseError("ablation CSV line " + std::to_string(lineno) + ": expected 8 fields, got " +
                       std::to_string(f.size()));
    }
    AblationRow r;
    r.config = f[0];
    r.sample_id = f[1];
    if (r.config.empty()) throw ParseError("ablation CSV line " + std::to_string(lineno) + ": empty config");
    r.scores.terminology = parse_number(f[2], lineno, "terminology");
    r.scores.structure = parse_number(f[3], lineno, "structure");
    r.scores.coherence = parse_number(f[4], lineno, "coherence");
    r.scores.attention_quality = parse_number(f[5], lineno, "attention_quality");
    r.scores.reasoning_confidence = parse_number(f[6], lineno, "reasoning_confidence");
    r.scores.composite = parse_number(f[7], lineno, "composite");
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError("ablation CSV is empty (no header)");
  return rows;
}

std::vector<std::pair<std::string, EvaluationScores>> summarize(const std::vector<AblationRow>& rows) {
  std::vector<std::pair<std::string, EvaluationScores>> out;
  std::vector<std::size_t> counts;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.config; });
    if (it == out.end()) {
      out.emplace_back(r.config, EvaluationScores{});
      counts.push_back(0);
      it = out.end() - 1;
    }
    auto& s = it->second;
    s.terminology += r.scores.terminology;
    s.structure += r.scores.structure;
    s.coherence += r.scores.coherence;
    s.attention_quality += r.scores.attention_quality;
    s.reasoning_confidence += r.scores.reasoning_confidence;
    s.composite += r.scores.composite;
    ++counts[static_cast<std::size_t>(it - out.begin())];
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& s = out[i].second;
    const double n = static_cast<double>(counts[i]);
    for (double* v : {&s.terminology, &s.structure, &s.coherence, &s.attention_quality,
                      &s.reasoning_confidence, &s.composite}) {
      *v /= n;
    }
  }
  return out;
}

std::string summary_table(const std::vector<std::pair<std::string, EvaluationScores>>& summary) {
  const std::vector<std::string> head{"Configuration", "Terminology", "Structure", "Coherence",
                                      "Attention",     "Reasoning",   "Composite"};
  std::vector<std::vector<std::string>> rows;
  // A dimension the configuration never produced prints as "---".
  auto cell = [](double v) { return v == 0.0 ? std::string("---") : util::format_fixed(v, 3); };
  for (const auto& [name, s] : summary) {
    rows.push_back({name, util::format_fixed(s.terminology, 3), util::format_fixed(s.structure, 3),
                    util::format_fixed(s.coherence, 3), cell(s.attention_quality), cell(s.reasoning_confidence),
                    util::format_fixed(s.composite, 3)});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t c = 0; c < head.size(); ++c) {
    width[c] = head[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c == 0) {
        out << std::left << std::setw(static_cast<int>(width[c])) << r[c];
      } else {
        out << "  " << std::right << std::setw(static_cast<int>(width[c])) << r[c];
      }
    }
    out << "\n";
  };
  emit(head);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
  for (const auto& r : rows) emit(r);
  return out.str();
}

}  // namespace medxplain
