#include "doctest.h"

#include <random>

#include "medxplain/text.hpp"
#include "medxplain/util.hpp"
#include "support/fixtures.hpp"

using namespace medxplain::text;

namespace {

const StopWords& stops() {
  static const StopWords s({"the", "and", "with", "this", "are", "of", "in", "is"});
  return s;
}

}  // namespace

TEST_CASE("tokenize lower-cases letter runs") {
  CHECK(tokenize("Hello, World-42 foo_bar") == std::vector<std::string>{"hello", "world", "foo", "bar"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("123 !!").empty());
}

TEST_CASE("sentence splitting") {
  const auto s = split_sentences("First one. Second one!  Third? trailing");
  REQUIRE(s.size() == 4);
  CHECK(s[0] == "First one.");
  CHECK(s[3] == "trailing");
  CHECK(split_sentences("   ").empty());
  CHECK(split_sentences("Value 3.5 stays together.").size() == 1);
}

TEST_CASE("content tokens drop stopwords and short tokens") {
  CHECK(content_tokens("The cells of an organ", stops()) == std::vector<std::string>{"cells", "organ"});
  CHECK(is_content_token("tissue", stops()));
  CHECK_FALSE(is_content_token("the", stops()));
  CHECK_FALSE(is_content_token("an", stops()));
}

TEST_CASE("lexicon hits, including multi-word entries") {
  const Lexicon lex({"necrosis", "basement membrane", "fibrosis", "gland"}, stops());
  CHECK(lex.size() == 4);
  CHECK(lex.count_hits({"basement", "membrane", "intact"}) == 2);
  CHECK(lex.count_hits({"basement", "intact"}) == 0);
  CHECK(lex.count_hits({"necrosis", "necrosis"}) == 2);
}

TEST_CASE("terminology density") {
  const Lexicon lex({"necrosis", "fibrosis", "gland", "stroma"}, stops());
  CHECK(terminology_density("", lex, stops()) == 0.0);
  CHECK(terminology_density("necrosis and fibrosis", lex, stops()) == 1.0);
  // ten content tokens, four lexicon hits
  const char* ten = "necrosis fibrosis gland stroma large small round pale dense image";
  CHECK(terminology_density(ten, lex, stops()) == doctest::Approx(0.4));
}

TEST_CASE("appending a lexicon term never lowers the hit count") {
  const auto& res = fixture::resources();
  const auto& lex = res.scoring.lexicon;
  const auto& sw = res.scoring.stopwords;
  std::mt19937_64 rng(8);
  const std::vector<std::string> words{"tissue", "necrosis", "shows", "pale", "the", "carcinoma", "cells",
                                       "of", "xyz", "gland", "inflammatory", "image"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string t;
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(0, 12);
    for (std::size_t i = 0, n = len(rng); i < n; ++i) t += words[pick(rng)] + " ";
    const auto before = lex.count_hits(content_tokens(t, sw));
    const auto after = lex.count_hits(content_tokens(t + " necrosis", sw));
    REQUIRE(after >= before);
    const double d = terminology_density(t, lex, sw);
    REQUIRE(d >= 0.0);
    REQUIRE(d <= 1.0);
  }
}

TEST_CASE("cue phrases match contiguous tokens") {
  const CueList cues({"consistent with", "however"});
  CHECK(cues.matches(tokenize("This is consistent with necrosis")));
  CHECK_FALSE(cues.matches(tokenize("consistent but with")));
  CHECK(cues.matches(tokenize("HOWEVER")));
  CHECK_FALSE(CueList(std::vector<std::string>{}).matches(tokenize("anything")));
  CHECK(CueList(std::vector<std::string>{}).empty());
}

TEST_CASE("word lists skip comments and blanks") {
  fixture::TempDir dir("text");
  medxplain::util::write_file(dir / "w.txt", "# header\n  Alpha  \n\nbeta # trailing\n#gamma\n");
  CHECK(read_word_list(dir / "w.txt") == std::vector<std::string>{"alpha", "beta"});
}

TEST_CASE("shipped lists load") {
  const auto lex = read_word_list(fixture::source_data() / "lexicon.txt");
  const auto sw = read_word_list(fixture::source_data() / "stopwords.txt");
  CHECK(lex.size() > 200);
  CHECK(sw.size() > 100);
}
