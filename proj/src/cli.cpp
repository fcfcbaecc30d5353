#include "medxplain/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "medxplain/error.hpp"
#include "medxplain/statistics.hpp"
#include "medxplain/util.hpp"
#include "medxplain/visualization.hpp"

namespace medxplain::cli {

using nlohmann::json;
namespace fs = std::filesystem;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

json interpolate_env(const json& j, const EnvLookup& env) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const std::size_t open = s.find("${", pos);
      if (open == std::string::npos) break;
      const std::size_t close = s.find('}', open + 2);
      if (close == std::string::npos) throw ConfigError("unterminated ${ in config value");
      const std::string name = s.substr(open + 2, close - open - 2);
      if (name.empty()) throw ConfigError("empty ${} in config value");
      const auto value = env(name);
      if (!value) throw ConfigError("environment variable " + name + " is not set");
      out += s.substr(pos, open - pos) + *value;
      pos = close + 1;
    }
    return out + s.substr(pos);
  }
  if (j.is_array()) {
    json a = json::array();
    for (const auto& v : j) a.push_back(interpolate_env(v, env));
    return a;
  }
  if (j.is_object()) {
    json o = json::object();
    for (const auto& [k, v] : j.items()) o[k] = interpolate_env(v, env);
    return o;
  }
  return j;
}

namespace {

// Typed access to one config object; every key must be consumed or listed.
class Section {
 public:
  Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (const auto& [k, v] : j_.items()) {
      if (!allowed.count(k)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError(path_ + ": unknown key '" + k + "' (allowed: " + list + ")");
      }
    }
  }

  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const { return j_.at(k); }
  std::string sub(const char* k) const { return path_.empty() ? k : path_ + "." + k; }

  std::string str(const char* k, std::string def = {}) const {
    if (!has(k)) return def;
    if (!j_[k].is_string()) throw ConfigError(sub(k) + ": expected a string");
    return j_[k].get<std::string>();
  }
  double num(const char* k, double def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number()) throw ConfigError(sub(k) + ": expected a number");
    return j_[k].get<double>();
  }
  long long integer(const char* k, long long def) const {
    if (!has(k)) return def;
    if (!j_[k].is_number_integer()) throw ConfigError(sub(k) + ": expected an integer");
    return j_[k].get<long long>();
  }
  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    if (!j_[k].is_boolean()) throw ConfigError(sub(k) + ": expected a boolean");
    return j_[k].get<bool>();
  }

 private:
  const json& j_;
  std::string path_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

StageFlags parse_flags(const json& j, const std::string& path) {
  Section s(j, path,
            {"query_reformulation", "gradcam", "bounding_boxes", "chain_of_thought", "unified_prompt_includes_boxes"});
  StageFlags f;
  f.query_reformulation = s.boolean("query_reformulation", false);
  f.gradcam = s.boolean("gradcam", false);
  f.bounding_boxes = s.boolean("bounding_boxes", false);
  f.chain_of_thought = s.boolean("chain_of_thought", false);
  f.unified_prompt_includes_boxes = s.boolean("unified_prompt_includes_boxes", false);
  return f;
}

void parse_pipeline(const json& j, CliConfig& c) {
  Section s(j, "pipeline",
            {"preset", "presets", "extraction", "metric_weights", "step_weights", "flow_thresholds", "worker_count",
             "timing"});
  PipelineConfig& p = c.base;
  c.default_preset = s.str("preset", c.default_preset);
  p.worker_count = static_cast<int>(s.integer("worker_count", 1));
  const std::string timing = s.str("timing", "wall");
  if (timing == "wall") {
    p.timing = TimingMode::wall;
  } else if (timing == "fixed") {
    p.timing = TimingMode::fixed;
  } else {
    throw ConfigError("pipeline.timing: expected 'wall' or 'fixed'");
  }

  if (s.has("presets")) {
    const json& presets = s.raw("presets");
    if (!presets.is_object()) throw ConfigError("pipeline.presets: expected an object");
    for (const auto& [name, flags] : presets.items()) {
      if (std::find(preset_names().begin(), preset_names().end(), name) != preset_names().end()) {
        throw ConfigError("pipeline.presets: '" + name + "' shadows a built-in preset");
      }
      c.custom_presets[name] = parse_flags(flags, "pipeline.presets." + name);
    }
  }
  if (s.has("extraction")) {
    Section e(s.raw("extraction"), "pipeline.extraction",
              {"threshold", "min_area", "max_regions", "expansion", "connectivity"});
    auto& x = p.extraction;
    x.threshold = e.num("threshold", x.threshold);
    const auto min_area = e.integer("min_area", static_cast<long long>(x.min_area));
    const auto max_regions = e.integer("max_regions", static_cast<long long>(x.max_regions));
    if (min_area < 0 || max_regions < 0) throw ConfigError("pipeline.extraction: counts must be non-negative");
    x.min_area = static_cast<std::size_t>(min_area);
    x.max_regions = static_cast<std::size_t>(max_regions);
    x.expansion = e.num("expansion", x.expansion);
    const auto conn = e.integer("connectivity", 4);
    if (conn != 4 && conn != 8) throw ConfigError("pipeline.extraction.connectivity: expected 4 or 8");
    x.connectivity = conn == 4 ? Connectivity::four : Connectivity::eight;
  }
  if (s.has("metric_weights")) {
    Section w(s.raw("metric_weights"), "pipeline.metric_weights",
              {"terminology", "structure", "coherence", "attention_quality", "reasoning_confidence"});
    auto& m = p.metric_weights;
    m.terminology = w.num("terminology", m.terminology);
    m.structure = w.num("structure", m.structure);
    m.coherence = w.num("coherence", m.coherence);
    m.attention_quality = w.num("attention_quality", m.attention_quality);
    m.reasoning_confidence = w.num("reasoning_confidence", m.reasoning_confidence);
  }
  if (s.has("step_weights")) {
    const json& w = s.raw("step_weights");
    if (!w.is_array() || w.size() != kChainSteps) throw ConfigError("pipeline.step_weights: expected six numbers");
    for (std::size_t i = 0; i < kChainSteps; ++i) {
      if (!w[i].is_number()) throw ConfigError("pipeline.step_weights: expected six numbers");
      p.step_weights[i] = w[i].get<double>();
    }
  }
  if (s.has("flow_thresholds")) {
    Section f(s.raw("flow_thresholds"), "pipeline.flow_thresholds",
              {"attention_strength", "pathology_confidence", "candidate_count"});
    auto& t = p.flow_thresholds;
    t.attention_strength = f.num("attention_strength", t.attention_strength);
    t.pathology_confidence = f.num("pathology_confidence", t.pathology_confidence);
    t.candidate_count = static_cast<int>(f.integer("candidate_count", t.candidate_count));
  }
}

BackendSpec parse_backend(const json& j, const std::string& path, const fs::path& base) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError(path + ": expected an object with a 'kind' string");
  }
  BackendSpec b;
  b.kind = j["kind"].get<std::string>();
  if (b.kind == "mock") {
    Section s(j, path, {"kind", "seed", "profile", "faults"});
    const auto seed = s.integer("seed", 0);
    if (seed < 0) throw ConfigError(path + ".seed: must be non-negative");
    b.seed = static_cast<std::uint64_t>(seed);
    b.profile = resolve(base, s.str("profile"));
    if (!b.profile.empty() && !fs::exists(b.profile)) {
      throw ConfigError(path + ".profile: file not found: " + b.profile.string());
    }
    if (s.has("faults")) {
      Section f(s.raw("faults"), path + ".faults",
                {"answer_down", "attention_down", "llm_down", "attention_heatmap_variant", "attention_malformed"});
      b.faults.answer_down = f.boolean("answer_down", false);
      b.faults.attention_down = f.boolean("attention_down", false);
      b.faults.llm_down = f.boolean("llm_down", false);
      b.faults.attention_heatmap_variant = f.boolean("attention_heatmap_variant", false);
      b.faults.attention_malformed = f.boolean("attention_malformed", false);
    }
  } else if (b.kind == "http") {
    Section s(j, path, {"kind", "base_url", "token", "timeout_ms", "max_retries", "backoff_ms"});
    b.http.base_url = s.str("base_url");
    if (b.http.base_url.rfind("http://", 0) != 0 && b.http.base_url.rfind("https://", 0) != 0) {
      throw ConfigError(path + ".base_url: expected an http:// or https:// URL");
    }
    b.http.bearer_token = s.str("token");
    const auto timeout = s.integer("timeout_ms", 60000);
    const auto retries = s.integer("max_retries", 2);
    const auto backoff = s.integer("backoff_ms", 500);
    if (timeout <= 0 || retries < 0 || backoff < 0) throw ConfigError(path + ": timing values out of range");
    b.http.timeout = std::chrono::milliseconds(timeout);
    b.http.retry.max_retries = static_cast<int>(retries);
    b.http.retry.backoff_base = std::chrono::milliseconds(backoff);
  } else if (b.kind == "replay") {
    Section s(j, path, {"kind", "fixture"});
    b.fixture = resolve(base, s.str("fixture"));
    if (b.fixture.empty() || !fs::exists(b.fixture)) {
      throw ConfigError(path + ".fixture: file not found: " + b.fixture.string());
    }
  } else if (b.kind == "record") {
    Section s(j, path, {"kind", "fixture", "inner"});
    b.fixture = resolve(base, s.str("fixture"));
    if (b.fixture.empty()) throw ConfigError(path + ".fixture: required");
    if (!s.has("inner")) throw ConfigError(path + ".inner: required");
    b.inner = std::make_shared<BackendSpec>(parse_backend(s.raw("inner"), path + ".inner", base));
    if (b.inner->kind == "record") throw ConfigError(path + ".inner: cannot nest record backends");
  } else {
    throw ConfigError(path + ".kind: expected mock, http, replay or record (got '" + b.kind + "')");
  }
  return b;
}

std::shared_ptr<Transport> make_transport(const BackendSpec& spec, MockRole role) {
  if (spec.kind == "mock") {
    std::shared_ptr<const MockProfile> profile;
    if (!spec.profile.empty()) {
      try {
        profile = std::make_shared<const MockProfile>(MockProfile::load(spec.profile));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("mock profile: ") + e.what());
      }
    }
    return std::make_shared<MockTransport>(role, spec.seed, profile, spec.faults);
  }
  if (spec.kind == "http") return std::make_shared<HttpTransport>(spec.http);
  if (spec.kind == "replay") {
    try {
      return std::make_shared<ReplayTransport>(spec.fixture);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("replay fixture: ") + e.what());
    }
  }
  return std::make_shared<RecordingTransport>(make_transport(*spec.inner, role), spec.fixture);
}

}  // namespace

PipelineConfig CliConfig::resolve_preset(const std::string& name) const {
  PipelineConfig p;
  if (auto it = custom_presets.find(name); it != custom_presets.end()) {
    p.flags = it->second;
  } else {
    const auto& builtin = preset_names();
    if (std::find(builtin.begin(), builtin.end(), name) == builtin.end()) {
      std::string list;
      for (const auto& n : preset_catalogue()) list += (list.empty() ? "" : ", ") + n;
      throw ConfigError("unknown preset '" + name + "' (valid: " + list + ")");
    }
    p.flags = preset(name).flags;
  }
  PipelineConfig out = base;
  out.name = name;
  out.flags = p.flags;
  out.validate();
  return out;
}

std::vector<std::string> CliConfig::preset_catalogue() const {
  std::vector<std::string> names = preset_names();
  for (const auto& [n, f] : custom_presets) names.push_back(n);
  return names;
}

CliConfig parse_config(const json& raw, const fs::path& base_dir, const EnvLookup& env) {
  const json doc = interpolate_env(raw, env);
  Section top(doc, "config", {"pipeline", "backends", "resources", "generation", "output_dir", "log_stages"});
  CliConfig c;
  if (top.has("pipeline")) parse_pipeline(top.raw("pipeline"), c);

  if (!top.has("backends")) throw ConfigError("backends: required");
  Section be(top.raw("backends"), "backends", {"vqa", "reformulator", "integrator"});
  for (const char* role : {"vqa", "reformulator", "integrator"}) {
    if (!be.has(role)) throw ConfigError(std::string("backends.") + role + ": required");
  }
  c.vqa = parse_backend(be.raw("vqa"), "backends.vqa", base_dir);
  c.reformulator = parse_backend(be.raw("reformulator"), "backends.reformulator", base_dir);
  c.integrator = parse_backend(be.raw("integrator"), "backends.integrator", base_dir);

  fs::path data_dir = default_data_dir();
  json res = top.has("resources") ? top.raw("resources") : json::object();
  Section r(res, "resources",
            {"data_dir", "lexicon", "stopwords", "cues", "reformulation_template", "reasoning_template",
             "unified_template", "colormap"});
  if (r.has("data_dir")) data_dir = resolve(base_dir, r.str("data_dir"));
  c.resources = ResourcePaths::in(data_dir);
  c.colormap = data_dir / "colormap.txt";
  auto override_path = [&](const char* key, fs::path& target) {
    if (r.has(key)) target = resolve(base_dir, r.str(key));
  };
  override_path("lexicon", c.resources.lexicon);
  override_path("stopwords", c.resources.stopwords);
  override_path("cues", c.resources.cues);
  override_path("reformulation_template", c.resources.reformulation_template);
  override_path("reasoning_template", c.resources.reasoning_template);
  override_path("unified_template", c.resources.unified_template);
  override_path("colormap", c.colormap);

  if (top.has("generation")) {
    Section g(top.raw("generation"), "generation",
              {"temperature", "max_tokens", "top_p", "top_k", "max_answer_tokens"});
    c.generation.temperature = g.num("temperature", c.generation.temperature);
    c.generation.max_tokens = static_cast<int>(g.integer("max_tokens", c.generation.max_tokens));
    c.generation.top_p = g.num("top_p", c.generation.top_p);
    c.generation.top_k = static_cast<int>(g.integer("top_k", c.generation.top_k));
    c.max_answer_tokens = static_cast<int>(g.integer("max_answer_tokens", c.max_answer_tokens));
    if (!(c.generation.temperature >= 0.0) || c.generation.max_tokens < 1 || !(c.generation.top_p > 0.0) ||
        !(c.generation.top_p <= 1.0) || c.generation.top_k < 1 || c.max_answer_tokens < 1) {
      throw ConfigError("generation: parameter out of range");
    }
  }
  c.output_dir = resolve(base_dir, top.str("output_dir", "out"));
  c.log_stages = top.boolean("log_stages", true);

  // Surface incoherent parameters before any work happens.
  c.base.name = "base";
  c.base.validate();
  for (const auto& name : c.preset_catalogue()) c.resolve_preset(name);
  c.resolve_preset(c.default_preset);
  return c;
}

CliConfig load_config(const fs::path& path, const EnvLookup& env) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(util::read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path(), env);
}

Backends build_backends(const CliConfig& c) {
  Backends b;
  b.vqa = std::make_shared<VqaClient>(make_transport(c.vqa, MockRole::vqa));
  b.reformulator = std::make_shared<LlmClient>(make_transport(c.reformulator, MockRole::reformulator));
  b.integrator = std::make_shared<LlmClient>(make_transport(c.integrator, MockRole::integrator));
  return b;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

PipelineResources resources_for(const CliConfig& c) {
  PipelineResources r = load_resources(c.resources);
  r.llm_defaults = c.generation;
  r.reformulation.request_defaults = c.generation;
  r.reasoning.request_defaults = c.generation;
  r.max_answer_tokens = c.max_answer_tokens;
  return r;
}

OverlaySpec overlay_for(const fs::path& colormap) {
  OverlaySpec spec;
  if (!colormap.empty() && fs::exists(colormap)) spec.colormap = Colormap::load(colormap);
  return spec;
}

StageLogger stage_logger(std::ostream& err, bool enabled) {
  if (!enabled) return {};
  return [&err](const StageEvent& ev) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    json line{{"ts", stamp},
              {"sample", ev.sample_id},
              {"config", ev.config_name},
              {"stage", ev.stage},
              {"duration_ms", ev.duration_ms},
              {"degradation", to_string(ev.degradation)}};
    err << line.dump() << "\n";
  };
}

bool answer_missing(const PipelineRecord& r) { return r.unified_answer.empty(); }

void write_tiles(const PipelineRecord& rec, const fs::path& dir, const OverlaySpec& spec) {
  const PanelTiles t = render_tiles(rec, spec);
  write_png(dir / (rec.sample_id + "_boxes.png"), t.boxes);
  write_png(dir / (rec.sample_id + "_heatmap.png"), t.heatmap);
  write_png(dir / (rec.sample_id + "_integrated.png"), t.integrated);
  write_png(dir / (rec.sample_id + "_panel.png"), render_panel(rec, spec));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(' ');
    const auto b = item.find_last_not_of(' ');
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

struct RunArgs {
  std::string config, image, question, preset;
};

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  const CliConfig cfg = load_config(a.config, env);
  const PipelineConfig pc = cfg.resolve_preset(a.preset.empty() ? cfg.default_preset : a.preset);
  if (!fs::exists(a.image)) throw ConfigError("image not found: " + a.image);
  if (a.question.find_first_not_of(" \t\r\n") == std::string::npos) throw ConfigError("question is empty");
  load_image(a.image);  // fail fast on undecodable input

  const PipelineResources res = resources_for(cfg);
  const Backends backends = build_backends(cfg);
  Sample s{fs::path(a.image).stem().string(), a.image, a.question, {}};
  const PipelineRecord rec = run_sample(s, pc, backends, res, stage_logger(err, cfg.log_stages));

  const fs::path dir = cfg.output_dir / pc.name;
  persist_record(rec, dir / (rec.sample_id + ".json"));
  write_tiles(rec, dir, overlay_for(cfg.colormap));

  for (const auto& e : rec.errors) err << "warning: " << e << "\n";
  if (answer_missing(rec)) {
    err << "error: no backend produced an answer\n";
    return kExitBackend;
  }
  out << rec.unified_answer << "\n";
  out << "composite: " << util::format_fixed(rec.scores.composite, 3) << " (degradation: "
      << to_string(rec.degradation) << ")\n";
  return kExitOk;
}

struct AblateArgs {
  std::string config, manifest, presets;
  int workers = 0;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  const CliConfig cfg = load_config(a.config, env);
  const std::vector<std::string> names = a.presets.empty() ? preset_names() : split_list(a.presets);
  if (names.empty()) throw ConfigError("--presets names no preset");
  std::vector<PipelineConfig> presets;
  for (const auto& n : names) presets.push_back(cfg.resolve_preset(n));
  if (!fs::exists(a.manifest)) throw ConfigError("manifest not found: " + a.manifest);
  std::vector<Sample> samples;
  try {
    samples = load_manifest(a.manifest);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  const int workers = a.workers > 0 ? a.workers : cfg.base.worker_count;

  const PipelineResources res = resources_for(cfg);
  const Backends backends = build_backends(cfg);
  const auto records = run_ablation(samples, presets, backends, res, workers, stage_logger(err, cfg.log_stages));

  // Single collector: files are written serially in deterministic order.
  fs::create_directories(cfg.output_dir);
  bool missing = false;
  for (const auto& n : names) {
    for (const auto& r : records.at(n)) {
      persist_record(r, cfg.output_dir / n / (r.sample_id + ".json"));
      missing = missing || answer_missing(r);
    }
  }
  const std::string csv = ablation_csv(records, names);
  util::write_file(cfg.output_dir / "ablation.csv", csv);

  const auto summary = summarize(parse_ablation_csv(csv));
  out << summary_table(summary);
  out << "records: " << samples.size() * names.size() << ", csv: " << (cfg.output_dir / "ablation.csv").string()
      << "\n";
  if (missing) {
    err << "error: some samples have no answer from any backend\n";
    return kExitBackend;
  }
  return kExitOk;
}

struct StatsArgs {
  std::string csv, report_csv;
  int m = 0;
  bool welch = false;
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
  if (!fs::exists(a.csv)) throw ConfigError("ablation CSV not found: " + a.csv);
  std::vector<AblationRow> rows;
  try {
    rows = parse_ablation_csv(util::read_file(a.csv));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  std::map<std::string, std::vector<double>> composites;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!composites.count(r.config)) order.push_back(r.config);
    composites[r.config].push_back(r.scores.composite);
  }
  if (order.size() < 2) throw ConfigError("need at least two configurations to compare");

  // First configuration is the reference; comparisons ordered by gain.
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 1; i < order.size(); ++i) pairs.emplace_back(order[0], order[i]);
  std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& x, const auto& y) {
    return stats::mean(composites[x.second]) > stats::mean(composites[y.second]);
  });
  const int m = a.m > 0 ? a.m : static_cast<int>(pairs.size());
  const auto results = stats::compare_configurations(composites, pairs, m,
                                                     a.welch ? stats::TTestKind::welch : stats::TTestKind::student);
  out << stats::report_table(results, m);
  if (!a.report_csv.empty()) util::write_file(a.report_csv, stats::report_csv(results));
  return kExitOk;
}

struct RenderArgs {
  std::string record, csv, out;
};

int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream&) {
  if (a.record.empty() == a.csv.empty()) throw ConfigError("give exactly one of --record or --ablation-csv");
  const fs::path dir = a.out.empty() ? fs::path(".") : fs::path(a.out);
  const OverlaySpec spec = overlay_for(default_data_dir() / "colormap.txt");
  if (!a.record.empty()) {
    if (!fs::exists(a.record)) throw ConfigError("record not found: " + a.record);
    PipelineRecord rec;
    try {
      rec = load_record(a.record);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    if (!fs::exists(rec.image_path)) throw ConfigError("record image not found: " + rec.image_path);
    write_tiles(rec, dir, spec);
    out << (dir / (rec.sample_id + "_panel.png")).string() << "\n";
  } else {
    if (!fs::exists(a.csv)) throw ConfigError("ablation CSV not found: " + a.csv);
    std::vector<AblationRow> rows;
    try {
      rows = parse_ablation_csv(util::read_file(a.csv));
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    const auto summary = summarize(rows);
    if (summary.empty()) throw ConfigError("ablation CSV has no rows");
    write_png(dir / "radar.png", render_radar(summary));
    out << (dir / "radar.png").string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Explainable medical VQA pipeline, ablation harness and reporting", "medxplain"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run one image-question pair through a preset");
  run->add_option("--config", run_args.config, "Config JSON")->required();
  run->add_option("--image", run_args.image, "Input image")->required();
  run->add_option("--question", run_args.question, "Question text")->required();
  run->add_option("--preset", run_args.preset, "Preset name (default: the config's pipeline.preset)");

  AblateArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "Run a manifest under several presets");
  ablate->add_option("--config", ablate_args.config, "Config JSON")->required();
  ablate->add_option("--manifest", ablate_args.manifest, "JSONL manifest {id, image, question, answer}")->required();
  ablate->add_option("--presets", ablate_args.presets, "Comma-separated presets (default: all five built-ins)");
  ablate->add_option("--workers", ablate_args.workers, "Parallel workers (default: pipeline.worker_count)")
      ->check(CLI::PositiveNumber);

  StatsArgs stats_args;
  auto* st = app.add_subcommand("stats", "Significance report over an ablation CSV");
  st->add_option("--ablation-csv", stats_args.csv, "Ablation CSV")->required();
  st->add_option("--m", stats_args.m, "Comparisons for the Bonferroni correction (default: number of pairs)")
      ->check(CLI::PositiveNumber);
  st->add_flag("--welch", stats_args.welch, "Welch's unequal-variance test instead of Student's");
  st->add_option("--report-csv", stats_args.report_csv, "Also write the report as CSV");

  RenderArgs render_args;
  auto* render = app.add_subcommand("render", "Render panels for a record or a radar chart for an ablation");
  render->add_option("--record", render_args.record, "Record JSON");
  render->add_option("--ablation-csv", render_args.csv, "Ablation CSV");
  render->add_option("--out", render_args.out, "Output directory (default: current)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args, out, err, env);
    if (*ablate) return cmd_ablate(ablate_args, out, err, env);
    if (*st) return cmd_stats(stats_args, out, err);
    if (*render) return cmd_render(render_args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendUnavailable& e) {
    err << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace medxplain::cli
