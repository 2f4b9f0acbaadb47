#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "convrag/model.hpp"
#include "convrag/prompts.hpp"

namespace convrag {

enum class StrategyKind {
  kMinimal,
  kCorpusSpecific,
  kCot,
  kHyde,
  kAnchorKeyword,
};

inline constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::kMinimal, StrategyKind::kCorpusSpecific, StrategyKind::kCot,
    StrategyKind::kHyde, StrategyKind::kAnchorKeyword};

std::string to_string(StrategyKind kind);

// History window sizes are fixed at 6 user turns; assistant turns vary by
// strategy (corpus_specific additionally varies by corpus: fiqa uses 0,
// the other corpora use 3).
inline constexpr std::size_t kRewriteUserTurns = 6;
std::size_t agent_turns_for(StrategyKind kind, Corpus corpus);

enum class StandaloneClass { kStandalone, kNonStandalone };

struct RewriteResult {
  StrategyKind strategy = StrategyKind::kMinimal;
  StandaloneClass standalone_class = StandaloneClass::kNonStandalone;
  std::string rewritten;
  std::vector<std::string> anchors;    // anchor_keyword only, capped at 8
  std::vector<std::string> keywords;   // anchor_keyword only, capped at 12
  std::string hypothetical_passage;    // hyde only
  std::string reasoning;               // cot only, discarded downstream
};

inline constexpr std::size_t kMaxAnchors = 8;
inline constexpr std::size_t kMaxKeywords = 12;
inline constexpr std::size_t kAnchorQueryMaxWords = 28;

struct RenderedPrompt {
  std::string system_message;
  std::string prompt;
};

// Fills the strategy's template with the windowed history and current query.
// Throws UnknownCorpus only if the corpus enum is somehow out of range.
RenderedPrompt build_prompt(StrategyKind strategy,
                            const Conversation& conversation,
                            const PromptLibrary& prompts = PromptLibrary{});

// Extracts the first well-formed JSON object from the model output
// (tolerating code fences and surrounding prose) and maps its fields.
// Throws UnparseableOutput (no JSON object) or MissingField (no rewrite
// field); both signal fallback to the original query.
RewriteResult parse_rewrite(StrategyKind strategy,
                            std::string_view raw_model_output);

// Canonical JSON rendering of a result, matching the prompts' schema.
// parse_rewrite(strategy, serialize_rewrite(r)) reproduces r.
std::string serialize_rewrite(const RewriteResult& result);

// Final retrieval query per strategy:
//   minimal / corpus_specific / cot: rewritten text verbatim
//   hyde:  rewritten + " " + hypothetical_passage
//   anchor_keyword: rewritten + anchors + keywords, truncated at 28 words
//   (rewrite kept first, then anchors, then keywords)
std::string assemble_query(const RewriteResult& result,
                           std::string_view original_query);

}  // namespace convrag
