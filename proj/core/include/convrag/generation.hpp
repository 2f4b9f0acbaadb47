#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "convrag/model.hpp"
#include "convrag/prompts.hpp"
#include "convrag/textgen.hpp"

namespace convrag {

// --- evidence spans -------------------------------------------------------

struct EvidenceSpan {
  std::string passage_id;
  std::string sentence;
};

inline constexpr std::size_t kMaxSpans = 8;

// --- candidates -----------------------------------------------------------

struct CandidateAnswer {
  char label = 'A';
  std::string text;
  double temperature = 0.0;
  std::size_t word_count = 0;
  double r4 = 0.0;
  bool forbidden = false;
  double technical_score = 0.0;
};

// --- question typing ------------------------------------------------------

enum class QuestionType {
  kKeyword,
  kHowTo,
  kExplanation,
  kComparative,
  kSummarization,
  kFactoid,
  kDefault,
};

std::string to_string(QuestionType type);

struct QuestionTypeRule {
  QuestionType qtype = QuestionType::kDefault;
  std::size_t target_words = 90;
  std::string style_hint;
};

// Rules evaluated top-to-bottom (keyword, how-to, explanation, comparative,
// summarization, factoid); the first match wins, default always matches.
QuestionTypeRule classify_question(std::string_view query);

// --- selection configuration ----------------------------------------------

struct SelectionConfig {
  double technical_coeff = 0.35;
  double preference_scale = 5.0;
  double confidence_high = 1.0;
  double confidence_medium = 0.7;
  double confidence_low = 0.4;
  double prior_a = 2.0;
  double forbidden_penalty = 2.0;
  double judge_rate = 0.6;
  std::uint64_t seed = 42;
  double ideal_lower = 0.28;
  double ideal_upper = 0.38;
  double acceptable_upper = 0.50;
  double phi_under = -1.5;
  double phi_ideal = 2.5;
  double phi_acceptable = 1.5;
  double phi_over = 0.5;
};

// --- pure scoring functions -------------------------------------------------

// true iff the whole message is conversational chatter ("thanks", "ok",
// "got it", ... possibly chained), case-insensitive, punctuation ignored.
bool triage_conversational(std::string_view query);

// Fraction of the answer's distinct 4-grams also present in the concatenated
// spans. Tokens are lowercased and punctuation-stripped; answers with fewer
// than 4 tokens score 0.
double r4_extractiveness(std::string_view answer,
                         const std::vector<EvidenceSpan>& spans);

// Piecewise extractiveness shaping:
//   -1.5 for r4 < 0.28, +2.5 for 0.28 <= r4 <= 0.38,
//   +1.5 for 0.38 < r4 <= 0.50, +0.5 for r4 > 0.50.
double phi(double r4, const SelectionConfig& cfg = SelectionConfig{});

// Fixed hedging/refusal phrase list, matched case-insensitively.
const std::vector<std::string>& forbidden_phrases();
bool detect_forbidden(std::string_view answer);
// Removes forbidden phrases, collapses whitespace and repairs orphaned
// punctuation and dangling leading conjunctions left by the removal.
std::string strip_forbidden(std::string_view answer);

// Refusal check used by the force-answer trigger: a forbidden phrase or an
// "information is not available"-class pattern.
bool is_refusal(std::string_view answer);

// --- judge outputs ----------------------------------------------------------

struct TechnicalJudgeResult {
  double score_a = 0.0;  // clamped to [0, 10]
  double score_b = 0.0;
  std::string winner;  // "A" or "B" as reported; informational
};

enum class JudgeConfidence { kHigh, kMedium, kLow };

struct UserJudgeResult {
  char preferred = 'A';
  JudgeConfidence confidence = JudgeConfidence::kMedium;
};

double confidence_weight(JudgeConfidence c, const SelectionConfig& cfg);

// Parsers for the judge JSON replies; throw UnparseableOutput.
TechnicalJudgeResult parse_technical_judge(std::string_view raw);
UserJudgeResult parse_user_judge(std::string_view raw);

// --- selection ---------------------------------------------------------------

struct SelectionOutcome {
  char chosen = 'A';
  double score_a = 0.0;
  double score_b = 0.0;
  bool judge_invoked = false;
};

// Composite score for one candidate:
//   technical_coeff*T + preference_scale*c*U + phi(r4) - forbidden_penalty*I.
// `user_preference` is +1 when this candidate is preferred, -1 when the
// other is, 0 when the judge was not invoked.
double selection_score(const CandidateAnswer& candidate,
                       const std::vector<EvidenceSpan>& spans,
                       double user_preference, double user_confidence_weight,
                       const SelectionConfig& cfg);

// Applies the full policy: with no user judge both U-terms are 0 and A gets
// the +prior_a constant. Exact ties select A.
SelectionOutcome select(const CandidateAnswer& a, const CandidateAnswer& b,
                        const std::vector<EvidenceSpan>& spans,
                        const TechnicalJudgeResult& technical,
                        const std::optional<UserJudgeResult>& user,
                        const SelectionConfig& cfg);

// Seeded Bernoulli stream deciding user-judge invocation, consumed in turn
// order. Deterministic given (seed, rate).
class JudgeInvocationSchedule {
 public:
  JudgeInvocationSchedule(std::uint64_t seed, double rate);
  bool next();

 private:
  std::mt19937 rng_;
  double rate_;
};

// --- backend-facing stages ---------------------------------------------------

struct GenerationSettings {
  double temperature_a = 0.0;
  double temperature_b = 0.1;
  double micro_edit_temperature = 0.1;
  double force_answer_temperature = 0.2;
  double conversational_temperature = 0.3;
  std::size_t history_turns = 4;  // recent turns shown to generation prompts
  std::size_t max_spans = kMaxSpans;
  std::size_t span_truncate_chars = 120;  // per-span cap in judge prompts
};

struct SpanExtractionResult {
  std::vector<EvidenceSpan> spans;
  bool retried = false;
  bool parse_failed = false;  // fell back to empty after the retry
};

// Stage 1: builds the extraction prompt over the passages, parses
// {"extractedSpans": [...]}; retries once with the urgency prefix when no
// span parses; caps at max_spans preserving model order.
SpanExtractionResult extract_spans(const std::vector<Passage>& passages,
                                   const Conversation& conversation,
                                   const BackendRoutingTable& backends,
                                   const PromptLibrary& prompts,
                                   const GenerationSettings& settings,
                                   const RetryPolicy& retry = RetryPolicy{});

// Stage 2: two generation calls at temperature_a/temperature_b (run
// concurrently); word_count, r4 and forbidden computed on return.
// `prompt_suffix` is appended verbatim to both prompts (reduced-confidence
// hint); empty for the normal path.
std::pair<CandidateAnswer, CandidateAnswer> generate_candidates(
    const std::vector<EvidenceSpan>& spans, const Conversation& conversation,
    const QuestionTypeRule& qtype_rule, const BackendRoutingTable& backends,
    const PromptLibrary& prompts, const GenerationSettings& settings,
    const RetryPolicy& retry = RetryPolicy{},
    const std::string& prompt_suffix = "");

// Both-refusals fallback; returns the forced text (re-enters selection as
// candidate A).
std::string force_answer(const std::vector<EvidenceSpan>& spans,
                         std::string_view query,
                         const BackendRoutingTable& backends,
                         const PromptLibrary& prompts,
                         const GenerationSettings& settings,
                         const RetryPolicy& retry = RetryPolicy{});

struct MicroAdjustOutcome {
  std::string text;
  bool edited = false;
  std::string reason;  // violation sent to the editor, empty when none
};

// Stage 4: single editing pass when word count < 50, > 150, or r4 < 0.28.
// The edit is kept only when it is not a refusal and has >= 30 words.
MicroAdjustOutcome micro_adjust(const CandidateAnswer& chosen,
                                const std::vector<EvidenceSpan>& spans,
                                const BackendRoutingTable& backends,
                                const PromptLibrary& prompts,
                                const GenerationSettings& settings,
                                const RetryPolicy& retry = RetryPolicy{});

// Helpers shared with the orchestrator.
std::string spans_as_bullet_list(const std::vector<EvidenceSpan>& spans);
std::string spans_truncated(const std::vector<EvidenceSpan>& spans,
                            std::size_t max_chars);
std::string passages_as_blocks(const std::vector<Passage>& passages);
CandidateAnswer make_candidate(char label, std::string answer_text,
                               double temperature,
                               const std::vector<EvidenceSpan>& spans);

inline constexpr std::size_t kMicroAdjustMinWords = 50;
inline constexpr std::size_t kMicroAdjustMaxWords = 150;
inline constexpr std::size_t kMicroAdjustEditMinWords = 30;

}  // namespace convrag
