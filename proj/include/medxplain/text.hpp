#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace medxplain::text {

/// Lower-cased runs of ASCII letters; every other byte separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Sentences end at a run of . ! ? followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view text);

/// Reads a UTF-8 word list: one entry per line, `#` starts a comment,
/// surrounding whitespace trimmed, blank lines skipped, entries lower-cased.
std::vector<std::string> read_word_list(const std::filesystem::path& path);

class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(const std::vector<std::string>& words);
  bool contains(std::string_view token) const;

 private:
  std::unordered_set<std::string> words_;
};

/// Alphabetic tokens of length >= 3 that are not stopwords.
std::vector<std::string> content_tokens(std::string_view text, const StopWords& stopwords);
bool is_content_token(std::string_view token, const StopWords& stopwords);

/// Domain term list. Multi-word entries are reduced to their content tokens
/// so that they line up with content_tokens() output.
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(const std::vector<std::string>& terms, const StopWords& stopwords);

  /// Number of tokens covered by lexicon entries, matching greedily with the
  /// longest entry first at each position.
  std::size_t count_hits(const std::vector<std::string>& tokens) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;  // tokens joined by ' '
  std::size_t max_len_ = 0;
};

/// Phrase list matched as contiguous token runs against tokenize() output.
class CueList {
 public:
  CueList() = default;
  explicit CueList(const std::vector<std::string>& phrases);
  bool matches(const std::vector<std::string>& tokens) const;
  bool empty() const noexcept { return phrases_.empty(); }

 private:
  std::vector<std::vector<std::string>> phrases_;
};

double terminology_density(std::string_view text, const Lexicon& lexicon,
                           const StopWords& stopwords);

}  // namespace medxplain::text
