#include "medxplain/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "medxplain/error.hpp"

namespace medxplain::text {

namespace {

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

std::string join(const std::vector<std::string>& tokens, std::size_t from, std::size_t len) {
  std::string out;
  for (std::size_t n = 0; n < len; ++n) {
    if (n) out += ' ';
    out += tokens[from + n];
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (is_alpha(c)) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_terminator(text[i])) {
      std::size_t end = i;
      while (end < text.size() && is_terminator(text[end])) ++end;
      if (end == text.size() || std::isspace(static_cast<unsigned char>(text[end]))) {
        out.emplace_back(text.substr(start, end - start));
        start = end;
      }
      i = end;
    } else {
      ++i;
    }
  }
  if (start < text.size()) out.emplace_back(text.substr(start));
  for (auto& s : out) {
    const auto first = s.find_first_not_of(" \t\r\n");
    const auto last = s.find_last_not_of(" \t\r\n");
    s = first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
  }
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

std::vector<std::string> read_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open word list: " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r\n");
    std::string entry = line.substr(first, last - first + 1);
    std::transform(entry.begin(), entry.end(), entry.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.push_back(std::move(entry));
  }
  return out;
}

StopWords::StopWords(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    for (auto& t : tokenize(w)) words_.insert(std::move(t));
  }
}

bool StopWords::contains(std::string_view token) const {
  return words_.find(std::string(token)) != words_.end();
}

bool is_content_token(std::string_view token, const StopWords& stopwords) {
  return token.size() >= 3 && !stopwords.contains(token);
}

std::vector<std::string> content_tokens(std::string_view text, const StopWords& stopwords) {
  auto tokens = tokenize(text);
  std::erase_if(tokens, [&](const std::string& t) { return !is_content_token(t, stopwords); });
  return tokens;
}

Lexicon::Lexicon(const std::vector<std::string>& terms, const StopWords& stopwords) {
  for (const auto& term : terms) {
    const auto tokens = content_tokens(term, stopwords);
    if (tokens.empty()) continue;
    max_len_ = std::max(max_len_, tokens.size());
    entries_.insert(join(tokens, 0, tokens.size()));
  }
}

std::size_t Lexicon::count_hits(const std::vector<std::string>& tokens) const {
  std::size_t hits = 0;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(max_len_, tokens.size() - i); len >= 1; --len) {
      if (entries_.count(join(tokens, i, len))) {
        matched = len;
        break;
      }
    }
    if (matched) {
      hits += matched;
      i += matched;
    } else {
      ++i;
    }
  }
  return hits;
}

CueList::CueList(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    auto tokens = tokenize(p);
    if (!tokens.empty()) phrases_.push_back(std::move(tokens));
  }
}

bool CueList::matches(const std::vector<std::string>& tokens) const {
  for (const auto& phrase : phrases_) {
    if (std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end()) {
      return true;
    }
  }
  return false;
}

double terminology_density(std::string_view text, const Lexicon& lexicon,
                           const StopWords& stopwords) {
  const auto tokens = content_tokens(text, stopwords);
  if (tokens.empty()) return 0.0;
  return static_cast<double>(lexicon.count_hits(tokens)) / static_cast<double>(tokens.size());
}

}  // namespace medxplain::text
