#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace convrag::text {

// ASCII lowercase; bytes outside [A-Z] pass through untouched.
std::string lowercase(std::string_view s);

// Trim ASCII whitespace from both ends.
std::string trim(std::string_view s);

// Split on runs of whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

// Lowercase, replace punctuation with spaces, split on whitespace.
// This is the shared token alphabet for BM25, r4 and question typing.
std::vector<std::string> normalize_tokens(std::string_view s);

// Number of whitespace-delimited words.
std::size_t word_count(std::string_view s);

// Keep at most `max_words` whitespace-delimited words.
std::string truncate_words(std::string_view s, std::size_t max_words);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replace every occurrence of `from` (must be non-empty) with `to`.
std::string replace_all(std::string_view s, std::string_view from,
                        std::string_view to);

// Case-insensitive substring search; npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle,
                  std::size_t pos = 0);

// Naive sentence splitter: breaks after . ! ? followed by whitespace/EOT.
std::vector<std::string> split_sentences(std::string_view s);

// Distinct n-grams over a token sequence, each rendered as tokens joined
// with a single space.
std::unordered_set<std::string> distinct_ngrams(
    const std::vector<std::string>& tokens, std::size_t n);

// FNV-1a 64-bit, rendered as 16 lowercase hex digits. Used by scripted
// backends to key exact prompts.
std::string fnv1a_hex(std::string_view s);

// Fixed-precision decimal rendering (locale-independent), for run files.
std::string format_fixed(double value, int decimals);

}  // namespace convrag::text
