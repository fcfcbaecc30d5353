#include "support/fixtures.hpp"

#include <atomic>
#include <random>
#include <sstream>

#include "medxplain/cli.hpp"
#include "medxplain/util.hpp"

namespace fixture {

using namespace medxplain;

fs::path test_data() { return MEDXPLAIN_TEST_DATA; }
fs::path source_data() { return MEDXPLAIN_SOURCE_DATA; }

fs::path image(int n) { return test_data() / "images" / ("sample_0" + std::to_string(n) + ".png"); }

const PipelineResources& resources() {
  static const PipelineResources res = load_resources(ResourcePaths::in(source_data()));
  return res;
}

Backends mock_backends(std::uint64_t seed, const std::string& profile, MockFaults faults) {
  std::shared_ptr<const MockProfile> p;
  if (!profile.empty()) {
    p = std::make_shared<const MockProfile>(MockProfile::load(source_data() / "mock_profiles" / profile));
  }
  Backends b;
  b.vqa = std::make_shared<VqaClient>(std::make_shared<MockTransport>(MockRole::vqa, seed, p, faults));
  b.reformulator =
      std::make_shared<LlmClient>(std::make_shared<MockTransport>(MockRole::reformulator, seed, p, faults));
  b.integrator =
      std::make_shared<LlmClient>(std::make_shared<MockTransport>(MockRole::integrator, seed, p, faults));
  return b;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("medxplain_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

const char* const kQuestions[] = {
    "What type of tissue is shown?",
    "is there evidence of necrosis?",
    "What does the lesion in the upper region show",
    "Describe the cellular pattern in this biopsy.",
    "are inflammatory cells present in the stroma?",
    "what organ is this?",
};
const char* const kAnswers[] = {"myocardium", "yes", "carcinoma", "glandular", "yes", "liver"};

}  // namespace

std::vector<Sample> samples(std::size_t n) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "s%03zu", i + 1);
    out.push_back({id, image(static_cast<int>(i % 6) + 1), kQuestions[i % 6], kAnswers[i % 6]});
  }
  return out;
}

fs::path write_manifest(const fs::path& dir, std::size_t n, const std::string& name) {
  std::string text;
  for (const auto& s : samples(n)) {
    text += nlohmann::json{{"id", s.id}, {"image", s.image_path.string()}, {"question", s.question},
                           {"answer", s.ground_truth}}
                .dump() +
            "\n";
  }
  const fs::path path = dir / name;
  util::write_file(path, text);
  return path;
}

nlohmann::json mock_config(const fs::path& output_dir, const std::string& profile, const nlohmann::json& faults,
                           const std::string& timing) {
  nlohmann::json role = {{"kind", "mock"}, {"seed", 7}};
  if (!profile.empty()) role["profile"] = (source_data() / "mock_profiles" / profile).string();
  if (!faults.empty()) role["faults"] = faults;
  return {{"pipeline", {{"timing", timing}}},
          {"backends", {{"vqa", role}, {"reformulator", role}, {"integrator", role}}},
          {"resources", {{"data_dir", source_data().string()}}},
          {"output_dir", output_dir.string()},
          {"log_stages", false}};
}

fs::path write_json(const fs::path& path, const nlohmann::json& j) {
  util::write_file(path, j.dump(2) + "\n");
  return path;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"medxplain"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err,
                    [](const std::string& name) -> std::optional<std::string> {
                      if (name == "MEDXPLAIN_TEST_TOKEN") return std::string("secret-token");
                      return std::nullopt;
                    });
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace fixture
