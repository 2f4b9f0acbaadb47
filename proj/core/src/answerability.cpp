#include "convrag/answerability.hpp"

#include <algorithm>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

using nlohmann::json;

std::string to_string(JudgeView view) {
  switch (view) {
    case JudgeView::kDocument: return "document";
    case JudgeView::kSpan: return "span";
    case JudgeView::kAnswer: return "answer";
  }
  return "document";
}

std::string to_string(Verdict verdict) {
  return verdict == Verdict::kAnswerable ? "answerable" : "unanswerable";
}

std::string to_string(GateOutcome outcome) {
  switch (outcome) {
    case GateOutcome::kAnswerable: return "answerable";
    case GateOutcome::kPartial: return "partial";
    case GateOutcome::kUnanswerable: return "unanswerable";
  }
  return "answerable";
}

std::string to_string(GateRoute route) {
  switch (route) {
    case GateRoute::kFullPipeline: return "full_pipeline";
    case GateRoute::kReducedConfidencePipeline:
      return "reduced_confidence_pipeline";
    case GateRoute::kTemplatedRefusal: return "templated_refusal";
  }
  return "full_pipeline";
}

namespace {

json first_object_or_throw(std::string_view raw) {
  std::string cleaned = text::replace_all(std::string(raw), "```json", "\n");
  cleaned = text::replace_all(cleaned, "```", "\n");
  std::size_t start = cleaned.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < cleaned.size(); ++i) {
      char c = cleaned[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}') {
        if (--depth == 0) {
          json parsed =
              json::parse(cleaned.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;
        }
      }
    }
    start = cleaned.find('{', start + 1);
  }
  throw UnparseableOutput("no JSON object in gate judge output");
}

double parse_confidence(const json& obj) {
  auto it = obj.find("confidence");
  double value = 0.5;
  if (it != obj.end()) {
    if (it->is_number()) {
      value = it->get<double>();
    } else if (it->is_string()) {
      try {
        value = std::stod(it->get<std::string>());
      } catch (const std::exception&) {
        value = 0.5;
      }
    }
  }
  return std::clamp(value, 0.0, 1.0);
}

JudgeVerdict parse_gate_verdict(JudgeView view, std::string_view raw) {
  JudgeVerdict verdict;
  verdict.judge = view;
  try {
    json obj = first_object_or_throw(raw);
    auto it = obj.find("class");
    if (it == obj.end() || !it->is_string()) {
      throw UnparseableOutput("gate judge output lacks class");
    }
    auto value = text::lowercase(it->get<std::string>());
    verdict.verdict = value.find("unanswer") != std::string::npos
                          ? Verdict::kUnanswerable
                          : Verdict::kAnswerable;
    verdict.confidence = parse_confidence(obj);
  } catch (const UnparseableOutput&) {
    // Prefer attempting an answer over a silent refusal.
    verdict.verdict = Verdict::kAnswerable;
    verdict.confidence = 0.5;
    verdict.parse_failed = true;
  }
  return verdict;
}

}  // namespace

std::array<JudgeVerdict, 3> run_judges(const std::vector<Passage>& passages,
                                       const std::vector<EvidenceSpan>& spans,
                                       std::string_view candidate_answer,
                                       std::string_view query,
                                       const BackendRoutingTable& backends,
                                       const PromptLibrary& prompts,
                                       const RetryPolicy& retry) {
  auto ask = [&](const char* key, JudgeView view,
                 const std::map<std::string, std::string>& values) {
    const PromptTemplate tpl = prompts.get(key);
    GenRequest request;
    request.role = GenRole::kGateJudge;
    request.system_message = tpl.system_message;
    request.temperature = 0.0;
    request.prompt = render_template(tpl.body, values);
    return parse_gate_verdict(view, generate(request, backends, retry));
  };

  const std::string question(query);
  std::array<JudgeVerdict, 3> verdicts = {
      ask(prompt_keys::kGateDocument, JudgeView::kDocument,
          {{"question", question},
           {"passage_blocks", passages_as_blocks(passages)}}),
      ask(prompt_keys::kGateSpan, JudgeView::kSpan,
          {{"question", question}, {"facts", spans_as_bullet_list(spans)}}),
      ask(prompt_keys::kGateAnswer, JudgeView::kAnswer,
          {{"question", question}, {"answer", std::string(candidate_answer)}}),
  };
  return verdicts;
}

std::pair<GateOutcome, double> aggregate(
    const std::array<JudgeVerdict, 3>& verdicts, double override_threshold) {
  double answer_mass = 0.0;
  double unans_mass = 0.0;
  std::size_t unans_votes = 0;
  double max_unans_confidence = 0.0;
  for (const auto& v : verdicts) {
    if (v.verdict == Verdict::kAnswerable) {
      answer_mass += v.confidence;
    } else {
      unans_mass += v.confidence;
      ++unans_votes;
      max_unans_confidence = std::max(max_unans_confidence, v.confidence);
    }
  }

  // Ties go to answerable, matching the gate's observed acceptance bias.
  GateOutcome outcome = unans_mass > answer_mass ? GateOutcome::kUnanswerable
                                                 : GateOutcome::kAnswerable;

  if (outcome == GateOutcome::kAnswerable && unans_votes == 1 &&
      max_unans_confidence >= override_threshold) {
    outcome = GateOutcome::kUnanswerable;
  }

  const double total = answer_mass + unans_mass;
  const double winning =
      outcome == GateOutcome::kUnanswerable ? unans_mass : answer_mass;
  const double confidence = total > 0.0 ? winning / total : 0.0;
  return {outcome, confidence};
}

GateRoute decide(GateOutcome outcome, double aggregate_confidence,
                 double threshold) {
  switch (outcome) {
    case GateOutcome::kAnswerable:
      return GateRoute::kFullPipeline;
    case GateOutcome::kPartial:
      return GateRoute::kReducedConfidencePipeline;
    case GateOutcome::kUnanswerable:
      return aggregate_confidence >= threshold
                 ? GateRoute::kTemplatedRefusal
                 : GateRoute::kReducedConfidencePipeline;
  }
  return GateRoute::kFullPipeline;
}

ClassifierResult classify_answerability(const std::vector<Passage>& passages,
                                        std::string_view query,
                                        const BackendRoutingTable& backends,
                                        const PromptLibrary& prompts,
                                        const RetryPolicy& retry) {
  const PromptTemplate tpl = prompts.get(prompt_keys::kGateClassifier);
  GenRequest request;
  request.role = GenRole::kArbiter;
  request.system_message = tpl.system_message;
  request.temperature = 0.0;
  request.prompt = render_template(
      tpl.body, {{"question", std::string(query)},
                 {"passage_blocks", passages_as_blocks(passages)}});

  ClassifierResult result;
  try {
    json obj = first_object_or_throw(generate(request, backends, retry));
    std::string value;
    if (auto it = obj.find("class"); it != obj.end() && it->is_string()) {
      value = text::lowercase(it->get<std::string>());
    }
    if (value.find("unanswer") != std::string::npos) {
      result.outcome = GateOutcome::kUnanswerable;
    } else if (value.find("partial") != std::string::npos) {
      result.outcome = GateOutcome::kPartial;
    } else {
      result.outcome = GateOutcome::kAnswerable;
    }
    result.confidence = parse_confidence(obj);
  } catch (const UnparseableOutput&) {
    result.outcome = GateOutcome::kAnswerable;
    result.confidence = 0.5;
  }
  return result;
}

std::string templated_refusal(std::string_view query,
                              const BackendRoutingTable& backends,
                              const PromptLibrary& prompts,
                              const RetryPolicy& retry) {
  const PromptTemplate tpl = prompts.get(prompt_keys::kNoContext);
  GenRequest request;
  request.role = GenRole::kTriage;
  request.system_message = tpl.system_message;
  request.temperature = 0.0;
  request.prompt =
      render_template(tpl.body, {{"question", std::string(query)}});

  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string out;
    try {
      out = text::trim(generate(request, backends, retry));
    } catch (const BackendExhausted&) {
      return kStaticRefusal;
    }
    if (text::ifind(out, "I don't know") != std::string_view::npos ||
        text::ifind(out, "I do not know") != std::string_view::npos) {
      continue;  // regenerate once, then fall back
    }
    if (out.empty()) continue;
    return text::truncate_words(out, kRefusalMaxWords);
  }
  return kStaticRefusal;
}

}  // namespace convrag
