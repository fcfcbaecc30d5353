#include "doctest.h"

#include <algorithm>
#include <random>

#include "medxplain/error.hpp"
#include "medxplain/reasoning.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace medxplain;

namespace {

std::string reply_with(const std::vector<double>& conf, int skip_confidence = 0) {
  const char* titles[] = {"Visual Observation", "Attention Analysis", "Medical Context",
                          "Differential Analysis", "Evidence Integration", "Clinical Conclusion"};
  std::string out;
  for (int s = 0; s < 6; ++s) {
    out += "Step " + std::to_string(s + 1) + " - " + titles[s] + ": finding number " + std::to_string(s + 1) + "\n";
    if (s + 1 != skip_confidence) out += "confidence: " + std::to_string(conf[static_cast<std::size_t>(s)]) + "\n";
  }
  return out;
}

ReasoningContext context() {
  ReasoningContext ctx;
  ctx.question = "What tissue is shown?";
  ctx.initial_answer = "myocardium";
  ctx.regions = {RegionBox{10, 12, 30, 20, 0.95, 400, 1}};
  ctx.attention_summary = "peak at upper left";
  ctx.attention_strength = 0.95;
  return ctx;
}

const std::vector<double> kDefaultWeights{0.15, 0.15, 0.15, 0.15, 0.15, 0.25};

}  // namespace

TEST_CASE("flow selection rule") {
  CHECK(select_flow(0.9, 0.2, 1) == ReasoningFlow::attention_guided);
  CHECK(select_flow(0.1, 0.8, 1) == ReasoningFlow::pathology_focused);
  CHECK(select_flow(0.1, 0.1, 3) == ReasoningFlow::comparative);
  CHECK(select_flow(0.1, 0.1, 1) == ReasoningFlow::pathology_focused);
  CHECK(select_flow(0.5, 0.0, 0) == ReasoningFlow::attention_guided);
}

TEST_CASE("default weights and validation") {
  const StepWeights w = default_step_weights();
  double sum = 0.0;
  for (double v : w) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(w[5] == 0.25);
  StepWeights uniform;
  uniform.fill(1.0 / 6.0);
  CHECK_NOTHROW(validate_step_weights(uniform));
  StepWeights short_sum;
  short_sum.fill(0.15);
  CHECK_THROWS_AS(validate_step_weights(short_sum), ConfigError);  // 0.9
  StepWeights negative = w;
  negative[0] = -0.15;
  negative[1] = 0.45;
  CHECK_THROWS_AS(validate_step_weights(negative), ConfigError);
}

TEST_CASE("aggregate confidence examples") {
  const std::vector<double> eq(6, 0.85);
  CHECK(aggregate_confidence(eq, kDefaultWeights) == doctest::Approx(0.85).epsilon(1e-12));
  const std::vector<double> c{0.5, 1.0}, w{0.5, 0.5};
  CHECK(aggregate_confidence(c, w) == doctest::Approx(2.0 / 3.0));
  const std::vector<double> zero{0.0, 1.0};
  CHECK_THROWS_AS(aggregate_confidence(zero, w), InvalidInput);
  CHECK_THROWS_AS(aggregate_confidence(std::vector<double>{0.5}, w), InvalidInput);
  CHECK_THROWS_AS(aggregate_confidence(std::vector<double>{}, std::vector<double>{}), InvalidInput);
}

TEST_CASE("aggregate confidence properties") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> cd(0.05, 1.0), wd(0.01, 2.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> c(6), w(6);
    for (auto& v : c) v = cd(rng);
    for (auto& v : w) v = wd(rng);
    const double h = aggregate_confidence(c, w);
    CHECK(h == doctest::Approx(oracle::harmonic(c, w)).epsilon(1e-12));
    CHECK(h >= *std::min_element(c.begin(), c.end()) - 1e-12);
    CHECK(h <= *std::max_element(c.begin(), c.end()) + 1e-12);

    std::vector<std::size_t> idx{0, 1, 2, 3, 4, 5};
    std::shuffle(idx.begin(), idx.end(), rng);
    std::vector<double> pc(6), pw(6);
    for (std::size_t i = 0; i < 6; ++i) {
      pc[i] = c[idx[i]];
      pw[i] = w[idx[i]];
    }
    CHECK(aggregate_confidence(pc, pw) == doctest::Approx(h).epsilon(1e-12));

    std::vector<double> up = c;
    const std::size_t k = idx[0];
    up[k] = std::min(1.0, up[k] + 0.01);
    if (up[k] > c[k]) CHECK(aggregate_confidence(up, w) > h);
  }
}

TEST_CASE("reply parsing") {
  const auto steps = parse_reasoning_reply(reply_with({0.8, 0.81, 0.82, 0.83, 0.84, 0.9}));
  REQUIRE(steps.size() == 6);
  for (std::size_t s = 0; s < 6; ++s) {
    CHECK(steps[s].index == static_cast<int>(s + 1));
    CHECK_FALSE(steps[s].defaulted);
  }
  CHECK(steps[0].kind == StepKind::visual_observation);
  CHECK(steps[5].kind == StepKind::clinical_conclusion);
  CHECK(steps[5].confidence == doctest::Approx(0.9));
  CHECK(steps[2].text == "finding number 3");

  const auto missing = parse_reasoning_reply(reply_with(std::vector<double>(6, 0.85), 4));
  CHECK(missing[3].confidence == kDefaultStepConfidence);
  CHECK(missing[3].defaulted);
  CHECK_FALSE(missing[2].defaulted);

  const auto garbage = parse_reasoning_reply("no structure here at all");
  REQUIRE(garbage.size() == 6);
  for (const auto& s : garbage) {
    CHECK(s.defaulted);
    CHECK(s.confidence == kDefaultStepConfidence);
  }

  // titles without "Step n", and out-of-range confidences
  const auto titled = parse_reasoning_reply("Medical Context: cardiac tissue\nconfidence: 1.7\n");
  CHECK(titled[2].text == "cardiac tissue");
  CHECK(titled[2].defaulted);
}

TEST_CASE("chains built from equal confidences aggregate to that value") {
  fixture::ScriptedLlm llm([](const LlmGenerateRequest&) { return reply_with(std::vector<double>(6, 0.85)); });
  const ReasoningChain chain = build_chain(context(), llm, default_step_weights(), fixture::resources().reasoning);
  CHECK(chain.overall_confidence == doctest::Approx(0.85));
  CHECK_FALSE(chain.degraded);
  CHECK(chain.flow == ReasoningFlow::attention_guided);
  REQUIRE(llm.prompts.size() == 1);
  const std::string& prompt = llm.prompts[0];
  CHECK(prompt.find("What tissue is shown?") != std::string::npos);
  CHECK(prompt.find("myocardium") != std::string::npos);
  CHECK(prompt.find("0.950") != std::string::npos);
  CHECK(prompt.find("attention-guided") != std::string::npos);
}

TEST_CASE("a missing step confidence defaults but keeps the chain") {
  fixture::ScriptedLlm llm([](const LlmGenerateRequest&) { return reply_with(std::vector<double>(6, 0.85), 4); });
  const ReasoningChain chain = build_chain(context(), llm, default_step_weights(), fixture::resources().reasoning);
  REQUIRE(chain.steps.size() == 6);
  CHECK(chain.steps[3].confidence == 0.75);
  CHECK(chain.degraded);
  CHECK_FALSE(chain.backend_failed);
  std::vector<double> c(6, 0.85);
  c[3] = 0.75;
  CHECK(chain.overall_confidence == doctest::Approx(oracle::harmonic(c, kDefaultWeights)));
}

TEST_CASE("backend failure produces placeholder steps") {
  fixture::ScriptedLlm down([](const LlmGenerateRequest&) -> std::string { throw BackendUnavailable("503"); });
  const ReasoningChain chain = build_chain(context(), down, default_step_weights(), fixture::resources().reasoning);
  CHECK(chain.backend_failed);
  CHECK(chain.degraded);
  REQUIRE(chain.steps.size() == 6);
  CHECK(chain.overall_confidence == doctest::Approx(0.75));
  CHECK(chain.error.find("503") != std::string::npos);
}

TEST_CASE("six steps in order for every flow") {
  auto backends = fixture::mock_backends(3);
  for (auto [strength, pathology, candidates] :
       {std::tuple{0.9, 0.1, 1}, std::tuple{0.1, 0.9, 1}, std::tuple{0.1, 0.1, 3}}) {
    ReasoningContext ctx = context();
    ctx.attention_strength = strength;
    ctx.pathology_confidence = pathology;
    ctx.candidate_count = candidates;
    const auto chain = build_chain(ctx, *backends.integrator, default_step_weights(), fixture::resources().reasoning);
    REQUIRE(chain.steps.size() == 6);
    for (std::size_t s = 0; s < 6; ++s) CHECK(chain.steps[s].index == static_cast<int>(s + 1));
    CHECK_FALSE(chain.degraded);
  }
}

TEST_CASE("calibrated mock lands in the reported confidence band") {
  auto backends = fixture::mock_backends(1, "confidence_band.json");
  const auto chain = build_chain(context(), *backends.integrator, default_step_weights(), fixture::resources().reasoning);
  CHECK(chain.overall_confidence >= 0.83);
  CHECK(chain.overall_confidence <= 0.87);
}

TEST_CASE("answer heuristics") {
  CHECK(count_answer_candidates("") == 1);
  CHECK(count_answer_candidates("adenoma or carcinoma") == 2);
  CHECK(count_answer_candidates("a or b or c") == 3);
  CHECK(parse_answer_confidence("yes (confidence: 0.92)") == doctest::Approx(0.92));
  CHECK(parse_answer_confidence("yes") == 0.5);
}

TEST_CASE("names round-trip") {
  for (auto f : {ReasoningFlow::attention_guided, ReasoningFlow::pathology_focused, ReasoningFlow::comparative}) {
    CHECK(reasoning_flow_from_string(to_string(f)) == f);
  }
  CHECK(step_kind_from_string("medical_context") == StepKind::medical_context);
  CHECK_THROWS_AS(step_kind_from_string("x"), InvalidInput);
}
