#include "convrag/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace convrag::text {

namespace {
bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}
bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}
}  // namespace

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::vector<std::string> normalize_tokens(std::string_view s) {
  std::string buf;
  buf.reserve(s.size());
  for (char c : s) {
    if (is_punct(c)) {
      buf.push_back(' ');
    } else {
      buf.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return split_whitespace(buf);
}

std::size_t word_count(std::string_view s) {
  return split_whitespace(s).size();
}

std::string truncate_words(std::string_view s, std::size_t max_words) {
  auto words = split_whitespace(s);
  if (words.size() <= max_words) return trim(s);
  words.resize(max_words);
  return join(words, " ");
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to) {
  std::string out;
  if (from.empty()) return std::string(s);
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = s.find(from, pos);
    if (hit == std::string_view::npos) {
      out += s.substr(pos);
      return out;
    }
    out += s.substr(pos, hit - pos);
    out += to;
    pos = hit + from.size();
  }
}

std::size_t ifind(std::string_view haystack, std::string_view needle,
                  std::size_t pos) {
  if (needle.empty() || haystack.size() < needle.size()) {
    return std::string_view::npos;
  }
  auto lower = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  for (std::size_t i = pos; i + needle.size() <= haystack.size(); ++i) {
    std::size_t j = 0;
    while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

std::vector<std::string> split_sentences(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.' || c == '!' || c == '?') {
      bool at_end = (i + 1 == s.size());
      if (at_end || is_space(s[i + 1])) {
        auto sentence = trim(s.substr(start, i - start + 1));
        if (!sentence.empty()) out.push_back(std::move(sentence));
        start = i + 1;
      }
    }
  }
  auto tail = trim(s.substr(start));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::unordered_set<std::string> distinct_ngrams(
    const std::vector<std::string>& tokens, std::size_t n) {
  std::unordered_set<std::string> grams;
  if (n == 0 || tokens.size() < n) return grams;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string gram = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      gram += ' ';
      gram += tokens[i + j];
    }
    grams.insert(std::move(gram));
  }
  return grams;
}

std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return std::string(buf);
}

}  // namespace convrag::text
