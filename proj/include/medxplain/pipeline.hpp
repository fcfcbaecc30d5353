#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "medxplain/attention.hpp"
#include "medxplain/backends.hpp"
#include "medxplain/evaluation.hpp"
#include "medxplain/query_reformulation.hpp"
#include "medxplain/reasoning.hpp"
#include "medxplain/regions.hpp"

namespace medxplain {

struct StageFlags {
  bool query_reformulation = false;
  bool gradcam = false;
  bool bounding_boxes = false;
  bool chain_of_thought = false;
  bool unified_prompt_includes_boxes = false;

  bool operator==(const StageFlags&) const = default;
};

enum class TimingMode { wall, fixed };

struct PipelineConfig {
  std::string name = "custom";
  StageFlags flags;
  ExtractionParams extraction;
  MetricWeights metric_weights;
  StepWeights step_weights = default_step_weights();
  FlowThresholds flow_thresholds;
  int worker_count = 1;
  /// `fixed` records every stage duration as 0 so outputs are byte-stable.
  TimingMode timing = TimingMode::wall;

  /// Throws ConfigError on incoherent flags or out-of-range parameters.
  void validate() const;
};

/// basic, query_reform, bbox, cot, complete (in ablation order).
const std::vector<std::string>& preset_names();
/// Throws ConfigError listing the valid names when `name` is unknown.
PipelineConfig preset(std::string_view name);

struct Sample {
  std::string id;
  std::filesystem::path image_path;
  std::string question;
  std::string ground_truth;
};

/// JSONL with {id, image, question, answer}; relative image paths resolve
/// against the manifest's directory. Blank lines are skipped.
std::vector<Sample> load_manifest(const std::filesystem::path& path);

enum class Degradation { none, basic_gradcam, attention_free };
std::string_view to_string(Degradation d);
Degradation degradation_from_string(std::string_view s);

struct HeatmapSummary {
  HeatmapSource source = HeatmapSource::none;
  std::string target_layer;
  double max = 0.0;
  std::size_t grid_height = 0;  // backend grid the map was computed on
  std::size_t grid_width = 0;
  std::size_t height = 0;  // resolution regions were extracted at
  std::size_t width = 0;
  std::vector<double> grid;  // normalised, grid_height x grid_width

  bool operator==(const HeatmapSummary&) const = default;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
  bool operator==(const StageTiming&) const = default;
};

struct PipelineRecord {
  std::string sample_id;
  std::string config_name;
  std::string image_path;
  std::string question;
  std::string ground_truth;
  std::optional<ReformulatedQuery> reformulation;
  std::string initial_answer;
  std::optional<HeatmapSummary> heatmap;
  std::vector<RegionBox> regions;
  std::optional<ReasoningChain> chain;
  std::string unified_answer;
  EvaluationScores scores;
  Degradation degradation = Degradation::none;
  std::vector<std::string> errors;
  std::vector<StageTiming> timings;

  bool operator==(const PipelineRecord&) const = default;
};

nlohmann::json record_to_json(const PipelineRecord& r);
/// Throws ParseError naming the offending field.
PipelineRecord record_from_json(const nlohmann::json& j);
void persist_record(const PipelineRecord& r, const std::filesystem::path& path);
PipelineRecord load_record(const std::filesystem::path& path);

/// Rebuilds the full-resolution heatmap stored in a record's summary.
std::optional<AttentionHeatmap> record_heatmap(const PipelineRecord& r);

struct Backends {
  std::shared_ptr<VqaBackend> vqa;
  std::shared_ptr<LlmBackend> reformulator;
  std::shared_ptr<LlmBackend> integrator;
};

struct PipelineResources {
  ReformulationResources reformulation;
  ReasoningResources reasoning;
  ScoringResources scoring;
  std::string unified_template;  // {question} {initial_answer} {context}
  LlmGenerateRequest llm_defaults;
  int max_answer_tokens = 64;
  std::size_t fallback_image_size = 224;  // used when the image cannot be decoded
};

struct ResourcePaths {
  std::filesystem::path lexicon;
  std::filesystem::path stopwords;
  std::filesystem::path cues;
  std::filesystem::path reformulation_template;
  std::filesystem::path reasoning_template;
  std::filesystem::path unified_template;

  /// Standard file names below `data_dir`.
  static ResourcePaths in(const std::filesystem::path& data_dir);
};

PipelineResources load_resources(const ResourcePaths& paths);
/// Directory holding the shipped data files.
std::filesystem::path default_data_dir();

struct StageEvent {
  std::string sample_id;
  std::string config_name;
  std::string stage;
  double duration_ms = 0.0;
  Degradation degradation = Degradation::none;
};
using StageLogger = std::function<void(const StageEvent&)>;

/// Runs the stages enabled by `config`. Never throws: every failure becomes a
/// degradation level or an entry in `errors`.
PipelineRecord run_sample(const Sample& sample, const PipelineConfig& config, const Backends& backends,
                          const PipelineResources& resources, const StageLogger& log = {});

/// Every sample under every preset, `workers` samples at a time. Result
/// vectors are sorted by sample id.
std::map<std::string, std::vector<PipelineRecord>> run_ablation(
    const std::vector<Sample>& samples, const std::vector<PipelineConfig>& presets,
    const Backends& backends, const PipelineResources& resources, int workers,
    const StageLogger& log = {});

/// Ablation CSV: config,sample_id,<five metrics>,composite. Rows follow
/// `config_order`, then sample id.
std::string ablation_csv(const std::map<std::string, std::vector<PipelineRecord>>& records,
                         const std::vector<std::string>& config_order);

struct AblationRow {
  std::string config;
  std::string sample_id;
  EvaluationScores scores;
};
/// Throws ParseError with the line number on malformed input.
std::vector<AblationRow> parse_ablation_csv(std::string_view csv);

/// Column means per configuration, in first-appearance order.
std::vector<std::pair<std::string, EvaluationScores>> summarize(const std::vector<AblationRow>& rows);
std::string summary_table(const std::vector<std::pair<std::string, EvaluationScores>>& summary);

}  // namespace medxplain
