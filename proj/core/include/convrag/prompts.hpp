#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "convrag/model.hpp"

namespace convrag {

// A prompt template: a system message plus a body with {placeholder} slots.
struct PromptTemplate {
  std::string system_message;
  std::string body;
};

// Stable keys, also used as file stems when loading overrides from a
// template directory (`<key>.txt`, system message separated from the body
// by the first blank line).
namespace prompt_keys {
inline constexpr const char* kMinimal = "minimal";
inline constexpr const char* kCorpusSpecificClapNq = "corpus_specific_clapnq";
inline constexpr const char* kCorpusSpecificFiqa = "corpus_specific_fiqa";
inline constexpr const char* kCorpusSpecificGovt = "corpus_specific_govt";
inline constexpr const char* kCorpusSpecificCloud = "corpus_specific_cloud";
inline constexpr const char* kCot = "cot";
inline constexpr const char* kHyde = "hyde";
inline constexpr const char* kAnchorKeyword = "anchor_keyword";
inline constexpr const char* kConversational = "conversational";
inline constexpr const char* kNoContext = "no_context";
inline constexpr const char* kSpanExtraction = "span_extraction";
inline constexpr const char* kGeneration = "generation";
inline constexpr const char* kTechnicalJudge = "technical_judge";
inline constexpr const char* kUserJudge = "user_judge";
inline constexpr const char* kForceAnswer = "force_answer";
inline constexpr const char* kMicroAdjust = "micro_adjust";
inline constexpr const char* kGateDocument = "gate_document";
inline constexpr const char* kGateSpan = "gate_span";
inline constexpr const char* kGateAnswer = "gate_answer";
inline constexpr const char* kGateClassifier = "gate_classifier";
}  // namespace prompt_keys

// Resolves templates, preferring `<dir>/<key>.txt` when a template directory
// is configured. Built-ins cover every key.
class PromptLibrary {
 public:
  PromptLibrary() = default;
  explicit PromptLibrary(std::optional<std::string> template_dir)
      : template_dir_(std::move(template_dir)) {}

  PromptTemplate get(std::string_view key) const;
  static const PromptTemplate& builtin(std::string_view key);

 private:
  std::optional<std::string> template_dir_;
};

// Fills {name} slots from the map; unknown slots are left untouched.
std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& values);

// "user: ..." / "assistant: ..." lines (rewriting prompt convention).
std::string render_history_lines(const std::vector<Turn>& turns);
// "User: ..." / "Assistant: ..." lines (generation prompt convention).
std::string render_history_lines_capitalized(const std::vector<Turn>& turns);

}  // namespace convrag
