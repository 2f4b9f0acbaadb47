#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "convrag/generation.hpp"
#include "convrag/model.hpp"
#include "convrag/prompts.hpp"
#include "convrag/textgen.hpp"

namespace convrag {

enum class JudgeView { kDocument, kSpan, kAnswer };
enum class Verdict { kAnswerable, kUnanswerable };
enum class GateOutcome { kAnswerable, kPartial, kUnanswerable };
enum class GateRoute {
  kFullPipeline,
  kReducedConfidencePipeline,
  kTemplatedRefusal,
};

std::string to_string(JudgeView view);
std::string to_string(Verdict verdict);
std::string to_string(GateOutcome outcome);
std::string to_string(GateRoute route);

struct JudgeVerdict {
  JudgeView judge = JudgeView::kDocument;
  Verdict verdict = Verdict::kAnswerable;
  double confidence = 0.5;      // clamped to [0, 1]
  bool parse_failed = false;    // defaulted verdict, logged in the trace
};

struct GateConfig {
  double threshold = 0.7;
  double override_threshold = 0.95;
  std::size_t passages_for_generation = 5;
  // "multi_judge" (three judges + vote) or "single_classifier"
  // (3-class classifier).
  std::string policy = "multi_judge";
};

struct GateDecision {
  std::array<JudgeVerdict, 3> verdicts;
  GateOutcome outcome = GateOutcome::kAnswerable;
  double aggregate_confidence = 0.0;
  GateRoute route = GateRoute::kFullPipeline;
};

inline constexpr std::size_t kRefusalMaxWords = 25;
inline constexpr const char* kStaticRefusal =
    "The requested information is not available in the provided documents.";

// Runs the document/span/answer judges. A judge whose reply cannot be
// parsed defaults to (answerable, 0.5) with parse_failed set.
std::array<JudgeVerdict, 3> run_judges(const std::vector<Passage>& passages,
                                       const std::vector<EvidenceSpan>& spans,
                                       std::string_view candidate_answer,
                                       std::string_view query,
                                       const BackendRoutingTable& backends,
                                       const PromptLibrary& prompts,
                                       const RetryPolicy& retry = RetryPolicy{});

// Confidence-weighted vote with dissenter override: the side with the larger
// confidence mass wins (tie -> answerable); a provisional answerable outcome
// flips when exactly one judge voted unanswerable with confidence >=
// override_threshold. aggregate_confidence = winning mass / total mass.
std::pair<GateOutcome, double> aggregate(
    const std::array<JudgeVerdict, 3>& verdicts,
    double override_threshold = 0.95);

// Routing: unanswerable at confidence >= threshold -> templated refusal;
// unanswerable below threshold -> reduced-confidence pipeline; partial ->
// reduced-confidence pipeline; answerable -> full pipeline.
GateRoute decide(GateOutcome outcome, double aggregate_confidence,
                 double threshold = 0.7);

// Single 3-class classifier alternative to the multi-judge gate.
struct ClassifierResult {
  GateOutcome outcome = GateOutcome::kAnswerable;
  double confidence = 0.5;
};
ClassifierResult classify_answerability(const std::vector<Passage>& passages,
                                        std::string_view query,
                                        const BackendRoutingTable& backends,
                                        const PromptLibrary& prompts,
                                        const RetryPolicy& retry = RetryPolicy{});

// Produces a <= 25-word unavailability statement. Backend output exceeding
// the cap is hard-truncated; an output containing "I don't know" is
// regenerated once before falling back to the static template, as does any
// backend failure.
std::string templated_refusal(std::string_view query,
                              const BackendRoutingTable& backends,
                              const PromptLibrary& prompts,
                              const RetryPolicy& retry = RetryPolicy{});

}  // namespace convrag
