#include "doctest.h"

#include <fstream>

#include "medxplain/cli.hpp"
#include "medxplain/error.hpp"
#include "medxplain/util.hpp"
#include "support/fixtures.hpp"

using namespace medxplain;
using fixture::run_cli;
using fixture::TempDir;
using nlohmann::json;

namespace {

std::optional<std::string> test_env(const std::string& name) {
  if (name == "MEDXPLAIN_TEST_TOKEN") return std::string("secret-token");
  return std::nullopt;
}

std::string ablation_rows(const std::vector<std::pair<std::string, double>>& configs, int per_config) {
  std::string csv = "config,sample_id,terminology,structure,coherence,attention_quality,reasoning_confidence,composite\n";
  for (const auto& [name, composite] : configs) {
    for (int i = 0; i < per_config; ++i) {
      csv += name + ",s" + std::to_string(i) + ",0.5,0.5,0.5,0.5,0.5," + util::format_fixed(composite + 0.01 * (i % 3), 4) +
             "\n";
    }
  }
  return csv;
}

}  // namespace

TEST_CASE("help and argument errors") {
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({}).code == cli::kExitConfig);
  CHECK(run_cli({"frobnicate"}).code == cli::kExitConfig);
  CHECK(run_cli({"stats"}).code == cli::kExitConfig);
  CHECK(run_cli({"ablate", "--config", "x.json", "--manifest", "m.jsonl", "--workers", "0"}).code ==
        cli::kExitConfig);
}

TEST_CASE("run writes a record and panels") {
  TempDir tmp("cli_run");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out", "ablation.json"));
  const auto r = run_cli({"run", "--config", cfg.string(), "--image", fixture::image(1).string(), "--question",
                          "Is there evidence of malaria parasites?", "--preset", "complete"});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("composite: ") != std::string::npos);
  const auto dir = tmp.path() / "out" / "complete";
  const auto rec = load_record(dir / "sample_01.json");
  CHECK(rec.config_name == "complete");
  CHECK(!rec.unified_answer.empty());
  for (const char* suffix : {"_boxes.png", "_heatmap.png", "_integrated.png", "_panel.png"}) {
    CHECK(std::filesystem::exists(dir / (std::string("sample_01") + suffix)));
  }
}

TEST_CASE("run reports configuration problems with exit code 2") {
  TempDir tmp("cli_run_err");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out"));

  auto r = run_cli({"run", "--config", cfg.string(), "--image", fixture::image(1).string(), "--question", "q?",
                    "--preset", "nope"});
  CHECK(r.code == cli::kExitConfig);
  for (const auto& name : preset_names()) CHECK(r.err.find(name) != std::string::npos);

  r = run_cli({"run", "--config", cfg.string(), "--image", (tmp / "missing.png").string(), "--question", "q?"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(r.err.find("image not found") != std::string::npos);

  r = run_cli({"run", "--config", cfg.string(), "--image", fixture::image(1).string(), "--question", "   "});
  CHECK(r.code == cli::kExitConfig);

  r = run_cli({"run", "--config", (tmp / "absent.json").string(), "--image", fixture::image(1).string(),
               "--question", "q?"});
  CHECK(r.code == cli::kExitConfig);
}

TEST_CASE("run exits 3 when no backend can answer") {
  TempDir tmp("cli_run_down");
  const auto cfg = fixture::write_json(
      tmp / "config.json", fixture::mock_config(tmp / "out", "", json{{"answer_down", true}, {"llm_down", true}}));
  const auto r = run_cli({"run", "--config", cfg.string(), "--image", fixture::image(2).string(), "--question",
                          "What is shown?"});
  CHECK(r.code == cli::kExitBackend);
  CHECK(r.err.find("no backend produced an answer") != std::string::npos);
}

TEST_CASE("ablate writes the CSV and one record per sample and preset") {
  TempDir tmp("cli_ablate");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out", "ablation.json"));
  const auto manifest = fixture::write_manifest(tmp.path(), 4);
  const auto r = run_cli({"ablate", "--config", cfg.string(), "--manifest", manifest.string(), "--presets",
                          "basic, complete", "--workers", "2"});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("records: 8") != std::string::npos);
  const auto rows = parse_ablation_csv(util::read_file(tmp.path() / "out" / "ablation.csv"));
  CHECK(rows.size() == 8);
  for (const char* preset : {"basic", "complete"}) {
    for (const auto& s : fixture::samples(4)) {
      CHECK(std::filesystem::exists(tmp.path() / "out" / preset / (s.id + ".json")));
    }
  }
}

TEST_CASE("ablate over an empty manifest writes only the header") {
  TempDir tmp("cli_ablate_empty");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out"));
  std::ofstream(tmp / "empty.jsonl").close();
  const auto r = run_cli({"ablate", "--config", cfg.string(), "--manifest", (tmp / "empty.jsonl").string()});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  const std::string csv = util::read_file(tmp.path() / "out" / "ablation.csv");
  CHECK(csv.rfind("config,sample_id,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("ablate rejects unknown presets and missing manifests") {
  TempDir tmp("cli_ablate_err");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out"));
  const auto manifest = fixture::write_manifest(tmp.path(), 2);
  CHECK(run_cli({"ablate", "--config", cfg.string(), "--manifest", manifest.string(), "--presets", "basic,bogus"})
            .code == cli::kExitConfig);
  CHECK(run_cli({"ablate", "--config", cfg.string(), "--manifest", (tmp / "none.jsonl").string()}).code ==
        cli::kExitConfig);
}

TEST_CASE("stats prints the significance table") {
  TempDir tmp("cli_stats");
  const auto csv = tmp / "ablation.csv";
  util::write_file(csv, ablation_rows({{"basic", 0.40}, {"cot", 0.70}, {"bbox", 0.55}}, 12));

  auto r = run_cli({"stats", "--ablation-csv", csv.string(), "--m", "6", "--report-csv", (tmp / "r.csv").string()});
  INFO(r.err);
  REQUIRE(r.code == cli::kExitOk);
  CHECK(r.out.find("basic vs cot") != std::string::npos);
  CHECK(r.out.find("basic vs bbox") != std::string::npos);
  CHECK(r.out.find("basic vs cot") < r.out.find("basic vs bbox"));
  CHECK(r.out.find("+0.300") != std::string::npos);
  CHECK(r.out.find("0.05/6 = 0.008333") != std::string::npos);
  CHECK(std::filesystem::exists(tmp / "r.csv"));

  r = run_cli({"stats", "--ablation-csv", csv.string()});
  CHECK(r.out.find("0.05/2 = 0.025000") != std::string::npos);

  const auto welch = run_cli({"stats", "--ablation-csv", csv.string(), "--welch"});
  CHECK(welch.code == cli::kExitOk);
}

TEST_CASE("stats needs two configurations") {
  TempDir tmp("cli_stats_err");
  util::write_file(tmp / "one.csv", ablation_rows({{"basic", 0.40}}, 5));
  CHECK(run_cli({"stats", "--ablation-csv", (tmp / "one.csv").string()}).code == cli::kExitConfig);
  CHECK(run_cli({"stats", "--ablation-csv", (tmp / "none.csv").string()}).code == cli::kExitConfig);
  util::write_file(tmp / "bad.csv", "not,a,csv\n1,2\n");
  CHECK(run_cli({"stats", "--ablation-csv", (tmp / "bad.csv").string()}).code == cli::kExitConfig);
}

TEST_CASE("render from a record and from an ablation CSV") {
  TempDir tmp("cli_render");
  const auto cfg = fixture::write_json(tmp / "config.json", fixture::mock_config(tmp / "out", "ablation.json"));
  REQUIRE(run_cli({"run", "--config", cfg.string(), "--image", fixture::image(3).string(), "--question",
                   "Any abnormality?"})
              .code == cli::kExitOk);
  const auto record = tmp.path() / "out" / "complete" / "sample_03.json";

  auto r = run_cli({"render", "--record", record.string(), "--out", (tmp / "render").string()});
  INFO(r.err);
  CHECK(r.code == cli::kExitOk);
  CHECK(std::filesystem::exists(tmp / "render" / "sample_03_panel.png"));

  util::write_file(tmp / "ablation.csv", ablation_rows({{"basic", 0.4}, {"complete", 0.7}}, 3));
  r = run_cli({"render", "--ablation-csv", (tmp / "ablation.csv").string(), "--out", (tmp / "render").string()});
  CHECK(r.code == cli::kExitOk);
  CHECK(std::filesystem::exists(tmp / "render" / "radar.png"));

  CHECK(run_cli({"render"}).code == cli::kExitConfig);
  CHECK(run_cli({"render", "--record", record.string(), "--ablation-csv", (tmp / "ablation.csv").string()}).code ==
        cli::kExitConfig);
  util::write_file(tmp / "header.csv", ablation_rows({}, 0));
  CHECK(run_cli({"render", "--ablation-csv", (tmp / "header.csv").string(), "--out", (tmp / "render").string()})
            .code == cli::kExitConfig);
}

TEST_CASE("config validation") {
  TempDir tmp("cli_config");
  const json base = fixture::mock_config(tmp / "out");

  SUBCASE("unknown keys are rejected with their path") {
    json doc = base;
    doc["pipeline"]["extraction"] = {{"threshhold", 0.3}};
    CHECK_THROWS_WITH_AS(cli::parse_config(doc, tmp.path(), test_env), doctest::Contains("threshhold"), ConfigError);
    doc = base;
    doc["surprise"] = 1;
    CHECK_THROWS_AS(cli::parse_config(doc, tmp.path(), test_env), ConfigError);
    const auto path = fixture::write_json(tmp / "bad.json", doc);
    const auto r = run_cli({"run", "--config", path.string(), "--image", fixture::image(1).string(), "--question",
                            "q?"});
    CHECK(r.code == cli::kExitConfig);
  }

  SUBCASE("secrets come from the environment") {
    json doc = base;
    doc["backends"]["integrator"] = {
        {"kind", "http"}, {"base_url", "http://127.0.0.1:9"}, {"token", "${MEDXPLAIN_TEST_TOKEN}"}};
    const auto cfg = cli::parse_config(doc, tmp.path(), test_env);
    CHECK(cfg.integrator.kind == "http");
    CHECK(cfg.integrator.http.bearer_token == "secret-token");

    doc["backends"]["integrator"]["token"] = "${MEDXPLAIN_UNSET_VAR}";
    CHECK_THROWS_WITH_AS(cli::parse_config(doc, tmp.path(), test_env), doctest::Contains("MEDXPLAIN_UNSET_VAR"),
                         ConfigError);
    const auto path = fixture::write_json(tmp / "unset.json", doc);
    const auto r = run_cli({"run", "--config", path.string(), "--image", fixture::image(1).string(), "--question",
                            "q?"});
    CHECK(r.code == cli::kExitConfig);
    CHECK(r.err.find("MEDXPLAIN_UNSET_VAR") != std::string::npos);
  }

  SUBCASE("interpolation reaches nested strings only") {
    const json in = {{"a", "x-${MEDXPLAIN_TEST_TOKEN}-y"}, {"b", {1, "${MEDXPLAIN_TEST_TOKEN}"}}, {"c", 3}};
    const json outj = cli::interpolate_env(in, test_env);
    CHECK(outj["a"] == "x-secret-token-y");
    CHECK(outj["b"][1] == "secret-token");
    CHECK(outj["c"] == 3);
  }

  SUBCASE("backends are required and kinds validated") {
    json doc = base;
    doc.erase("backends");
    CHECK_THROWS_AS(cli::parse_config(doc, tmp.path(), test_env), ConfigError);
    doc = base;
    doc["backends"]["vqa"] = {{"kind", "carrier-pigeon"}};
    CHECK_THROWS_AS(cli::parse_config(doc, tmp.path(), test_env), ConfigError);
  }

  SUBCASE("custom presets extend the catalogue") {
    json doc = base;
    doc["pipeline"]["presets"] = {{"boxes_only", {{"gradcam", true}, {"bounding_boxes", true}}}};
    const auto cfg = cli::parse_config(doc, tmp.path(), test_env);
    const auto names = cfg.preset_catalogue();
    CHECK(std::find(names.begin(), names.end(), "boxes_only") != names.end());
    CHECK(cfg.resolve_preset("boxes_only").flags.bounding_boxes);
  }
}
