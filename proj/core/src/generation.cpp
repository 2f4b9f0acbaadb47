#include "convrag/generation.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"
#include "json_scan.hpp"

namespace convrag {

using nlohmann::json;

std::string to_string(QuestionType type) {
  switch (type) {
    case QuestionType::kKeyword: return "keyword";
    case QuestionType::kHowTo: return "howto";
    case QuestionType::kExplanation: return "explanation";
    case QuestionType::kComparative: return "comparative";
    case QuestionType::kSummarization: return "summarization";
    case QuestionType::kFactoid: return "factoid";
    case QuestionType::kDefault: return "default";
  }
  return "default";
}

// ---------------------------------------------------------------------------
// Triage
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::vector<std::string>>& conversational_phrases() {
  // Longest-first so multi-token phrases win over their prefixes.
  static const std::vector<std::vector<std::string>> phrases = {
      {"sounds", "good"}, {"thank", "you"}, {"got", "it"},
      {"thanks"},         {"okay"},         {"ok"},
      {"great"},          {"cool"},
  };
  return phrases;
}

}  // namespace

bool triage_conversational(std::string_view query) {
  auto tokens = text::normalize_tokens(query);
  if (tokens.empty()) return false;

  // The whole message must be a chain of conversational phrases.
  std::size_t pos = 0;
  while (pos < tokens.size()) {
    bool matched = false;
    for (const auto& phrase : conversational_phrases()) {
      if (pos + phrase.size() > tokens.size()) continue;
      if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + pos)) {
        pos += phrase.size();
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Question typing
// ---------------------------------------------------------------------------

namespace {

bool starts_with_any(const std::vector<std::string>& tokens,
                     std::initializer_list<const char*> leads) {
  if (tokens.empty()) return false;
  for (const char* lead : leads) {
    if (tokens[0] == lead) return true;
  }
  return false;
}

bool starts_with_bigram(const std::vector<std::string>& tokens,
                        const char* first, const char* second) {
  return tokens.size() >= 2 && tokens[0] == first && tokens[1] == second;
}

bool contains_substring(const std::string& lowered,
                        std::initializer_list<const char*> needles) {
  for (const char* needle : needles) {
    if (lowered.find(needle) != std::string::npos) return true;
  }
  return false;
}

bool contains_token(const std::vector<std::string>& tokens, const char* word) {
  return std::find(tokens.begin(), tokens.end(), word) != tokens.end();
}

}  // namespace

QuestionTypeRule classify_question(std::string_view query) {
  const auto tokens = text::normalize_tokens(query);
  const std::string lowered = text::lowercase(query);

  const bool interrogative_lead = starts_with_any(
      tokens, {"who", "what", "when", "where", "which", "why", "how", "is",
               "are", "was", "were", "do", "does", "did", "can", "could",
               "should", "would", "will"});

  if (!tokens.empty() && tokens.size() <= 4 && !interrogative_lead) {
    return {QuestionType::kKeyword, 90, "Interpret and answer"};
  }
  if (starts_with_bigram(tokens, "how", "do") ||
      starts_with_bigram(tokens, "how", "to") ||
      starts_with_bigram(tokens, "how", "can")) {
    return {QuestionType::kHowTo, 95, "Step-by-step"};
  }
  if (starts_with_any(tokens, {"why"}) ||
      contains_substring(lowered, {"explain"})) {
    return {QuestionType::kExplanation, 100, "Clear explanation"};
  }
  if (contains_substring(lowered, {"compare", "difference", "versus"}) ||
      contains_token(tokens, "vs")) {
    return {QuestionType::kComparative, 95, "Compare systematically"};
  }
  if (contains_substring(lowered, {"summarize", "summary", "overview"})) {
    return {QuestionType::kSummarization, 105, "Comprehensive summary"};
  }
  if (starts_with_any(tokens, {"who", "what", "when", "where", "which"}) ||
      starts_with_bigram(tokens, "how", "many") ||
      starts_with_bigram(tokens, "how", "much")) {
    return {QuestionType::kFactoid, 85, "Direct answer"};
  }
  return {QuestionType::kDefault, 90, "Complete answer"};
}

// ---------------------------------------------------------------------------
// Extractiveness
// ---------------------------------------------------------------------------

double r4_extractiveness(std::string_view answer,
                         const std::vector<EvidenceSpan>& spans) {
  auto answer_tokens = text::normalize_tokens(answer);
  if (answer_tokens.size() < 4) return 0.0;

  std::string concatenated;
  for (const auto& span : spans) {
    concatenated += span.sentence;
    concatenated += ' ';
  }
  auto span_grams = text::distinct_ngrams(text::normalize_tokens(concatenated), 4);
  auto answer_grams = text::distinct_ngrams(answer_tokens, 4);
  if (answer_grams.empty()) return 0.0;

  std::size_t shared = 0;
  for (const auto& gram : answer_grams) {
    if (span_grams.count(gram)) ++shared;
  }
  return static_cast<double>(shared) / static_cast<double>(answer_grams.size());
}

double phi(double r4, const SelectionConfig& cfg) {
  if (r4 < cfg.ideal_lower) return cfg.phi_under;
  if (r4 <= cfg.ideal_upper) return cfg.phi_ideal;
  if (r4 <= cfg.acceptable_upper) return cfg.phi_acceptable;
  return cfg.phi_over;
}

// ---------------------------------------------------------------------------
// Forbidden phrases
// ---------------------------------------------------------------------------

const std::vector<std::string>& forbidden_phrases() {
  static const std::vector<std::string> phrases = {
      "I don't know",       "I do not know",   "I'm not sure",
      "I am not sure",      "I'm uncertain",   "I cannot say",
      "It's unclear",       "It is unclear",   "I cannot answer",
      "Unable to answer",   "Cannot find information",
  };
  return phrases;
}

bool detect_forbidden(std::string_view answer) {
  for (const auto& phrase : forbidden_phrases()) {
    if (text::ifind(answer, phrase) != std::string_view::npos) return true;
  }
  return false;
}

namespace {

std::string remove_case_insensitive(std::string s, const std::string& phrase) {
  std::size_t pos = 0;
  while ((pos = text::ifind(s, phrase, pos)) != std::string::npos) {
    s.erase(pos, phrase.size());
  }
  return s;
}

bool is_dangling_conjunction(const std::string& word) {
  return word == "but" || word == "however" || word == "and" ||
         word == "yet" || word == "though" || word == "so";
}

}  // namespace

std::string strip_forbidden(std::string_view answer) {
  std::string s(answer);
  for (const auto& phrase : forbidden_phrases()) {
    s = remove_case_insensitive(std::move(s), phrase);
  }

  // Collapse whitespace and mend punctuation orphaned by the removals.
  std::string collapsed;
  collapsed.reserve(s.size());
  bool prev_space = false;
  for (char c : s) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (space) {
      if (!prev_space && !collapsed.empty()) collapsed.push_back(' ');
    } else {
      collapsed.push_back(c);
    }
    prev_space = space;
  }
  collapsed = text::replace_all(collapsed, " ,", ",");
  collapsed = text::replace_all(collapsed, " .", ".");
  collapsed = text::replace_all(collapsed, ",,", ",");
  collapsed = text::replace_all(collapsed, "..", ".");
  collapsed = text::trim(collapsed);

  // A removed leading phrase can leave ", but the fee is $5." behind.
  while (!collapsed.empty() &&
         (collapsed.front() == ',' || collapsed.front() == '.' ||
          collapsed.front() == ';' || collapsed.front() == ':')) {
    collapsed.erase(collapsed.begin());
    collapsed = text::trim(collapsed);
  }
  auto words = text::split_whitespace(collapsed);
  if (words.size() > 1 && is_dangling_conjunction(text::lowercase(words[0]))) {
    collapsed = text::trim(collapsed.substr(words[0].size()));
  }
  return collapsed;
}

bool is_refusal(std::string_view answer) {
  if (detect_forbidden(answer)) return true;
  static const std::vector<std::string> patterns = {
      "information is not available",
      "no information available",
      "not available in the provided",
      "does not contain information",
      "do not contain information",
      "not mentioned in the provided",
  };
  for (const auto& pattern : patterns) {
    if (text::ifind(answer, pattern) != std::string_view::npos) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Judge parsing
// ---------------------------------------------------------------------------

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
  throw UnparseableOutput("no JSON object in judge output");
}

double number_or(const json& obj, const char* field, double fallback) {
  auto it = obj.find(field);
  if (it == obj.end()) return fallback;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    try {
      return std::stod(it->get<std::string>());
    } catch (const std::exception&) {
      return fallback;
    }
  }
  return fallback;
}

}  // namespace

TechnicalJudgeResult parse_technical_judge(std::string_view raw) {
  json obj = first_object_or_throw(raw);
  TechnicalJudgeResult result;
  result.score_a = std::clamp(number_or(obj, "score_A", 0.0), 0.0, 10.0);
  result.score_b = std::clamp(number_or(obj, "score_B", 0.0), 0.0, 10.0);
  if (auto it = obj.find("winner"); it != obj.end() && it->is_string()) {
    result.winner = it->get<std::string>();
  }
  return result;
}

UserJudgeResult parse_user_judge(std::string_view raw) {
  json obj = first_object_or_throw(raw);
  UserJudgeResult result;
  if (auto it = obj.find("preferred"); it != obj.end() && it->is_string()) {
    auto value = text::lowercase(it->get<std::string>());
    result.preferred = value == "b" ? 'B' : 'A';
  }
  if (auto it = obj.find("confidence"); it != obj.end() && it->is_string()) {
    auto value = text::lowercase(it->get<std::string>());
    if (value == "high") result.confidence = JudgeConfidence::kHigh;
    else if (value == "low") result.confidence = JudgeConfidence::kLow;
    else result.confidence = JudgeConfidence::kMedium;
  }
  return result;
}

double confidence_weight(JudgeConfidence c, const SelectionConfig& cfg) {
  switch (c) {
    case JudgeConfidence::kHigh: return cfg.confidence_high;
    case JudgeConfidence::kMedium: return cfg.confidence_medium;
    case JudgeConfidence::kLow: return cfg.confidence_low;
  }
  return cfg.confidence_medium;
}

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

double selection_score(const CandidateAnswer& candidate,
                       const std::vector<EvidenceSpan>& spans,
                       double user_preference, double user_confidence_weight,
                       const SelectionConfig& cfg) {
  // r4 is always recomputed from the current text, never read from a cache.
  const double r4 = r4_extractiveness(candidate.text, spans);
  double score = cfg.technical_coeff * candidate.technical_score;
  score += cfg.preference_scale * user_confidence_weight * user_preference;
  score += phi(r4, cfg);
  if (detect_forbidden(candidate.text)) score -= cfg.forbidden_penalty;
  return score;
}

SelectionOutcome select(const CandidateAnswer& a, const CandidateAnswer& b,
                        const std::vector<EvidenceSpan>& spans,
                        const TechnicalJudgeResult& technical,
                        const std::optional<UserJudgeResult>& user,
                        const SelectionConfig& cfg) {
  CandidateAnswer scored_a = a;
  CandidateAnswer scored_b = b;
  scored_a.technical_score = std::clamp(technical.score_a, 0.0, 10.0);
  scored_b.technical_score = std::clamp(technical.score_b, 0.0, 10.0);

  SelectionOutcome outcome;
  outcome.judge_invoked = user.has_value();
  if (user) {
    const double c = confidence_weight(user->confidence, cfg);
    const double pref_a = user->preferred == 'A' ? 1.0 : -1.0;
    outcome.score_a = selection_score(scored_a, spans, pref_a, c, cfg);
    outcome.score_b = selection_score(scored_b, spans, -pref_a, c, cfg);
  } else {
    outcome.score_a = selection_score(scored_a, spans, 0.0, 0.0, cfg);
    outcome.score_b = selection_score(scored_b, spans, 0.0, 0.0, cfg);
    outcome.score_a += cfg.prior_a;
  }
  outcome.chosen = outcome.score_b > outcome.score_a ? 'B' : 'A';
  return outcome;
}

JudgeInvocationSchedule::JudgeInvocationSchedule(std::uint64_t seed, double rate)
    : rng_(static_cast<std::uint32_t>(seed)), rate_(rate) {}

bool JudgeInvocationSchedule::next() {
  // Raw 32-bit draws scaled to [0,1) keep the stream identical across
  // standard libraries.
  const double draw = static_cast<double>(rng_()) / 4294967296.0;
  return draw < rate_;
}

// ---------------------------------------------------------------------------
// Backend-facing stages
// ---------------------------------------------------------------------------

std::string spans_as_bullet_list(const std::vector<EvidenceSpan>& spans) {
  std::string out;
  for (const auto& span : spans) {
    out += "- ";
    out += span.sentence;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string spans_truncated(const std::vector<EvidenceSpan>& spans,
                            std::size_t max_chars) {
  std::string out;
  for (const auto& span : spans) {
    std::string sentence = span.sentence.substr(0, max_chars);
    out += "- ";
    out += sentence;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string passages_as_blocks(const std::vector<Passage>& passages) {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    out += "PASSAGE " + std::to_string(i + 1) + ":\n";
    out += passages[i].text;
    out += "\n\n";
  }
  return out;
}

CandidateAnswer make_candidate(char label, std::string answer_text,
                               double temperature,
                               const std::vector<EvidenceSpan>& spans) {
  CandidateAnswer c;
  c.label = label;
  c.text = std::move(answer_text);
  c.temperature = temperature;
  c.word_count = text::word_count(c.text);
  c.r4 = r4_extractiveness(c.text, spans);
  c.forbidden = detect_forbidden(c.text);
  return c;
}

namespace {

std::vector<EvidenceSpan> parse_spans(std::string_view raw,
                                      const std::vector<Passage>& passages,
                                      std::size_t max_spans) {
  json obj = first_object_or_throw(raw);
  auto it = obj.find("extractedSpans");
  if (it == obj.end() || !it->is_array()) {
    throw UnparseableOutput("span output lacks extractedSpans array");
  }
  std::vector<EvidenceSpan> spans;
  for (const auto& item : *it) {
    if (!item.is_object()) continue;
    auto sentence_it = item.find("sentence");
    if (sentence_it == item.end() || !sentence_it->is_string()) continue;
    std::string sentence = sentence_it->get<std::string>();
    if (text::trim(sentence).empty()) continue;

    EvidenceSpan span;
    span.sentence = std::move(sentence);
    if (auto id_it = item.find("passageId");
        id_it != item.end() && id_it->is_number_integer()) {
      auto index = id_it->get<long long>();
      if (index >= 1 && static_cast<std::size_t>(index) <= passages.size()) {
        span.passage_id = passages[static_cast<std::size_t>(index) - 1].passage_id;
      }
    }
    spans.push_back(std::move(span));
    if (spans.size() == max_spans) break;
  }
  return spans;
}

}  // namespace

SpanExtractionResult extract_spans(const std::vector<Passage>& passages,
                                   const Conversation& conversation,
                                   const BackendRoutingTable& backends,
                                   const PromptLibrary& prompts,
                                   const GenerationSettings& settings,
                                   const RetryPolicy& retry) {
  const PromptTemplate tpl = prompts.get(prompt_keys::kSpanExtraction);
  auto recent = history_window(conversation, settings.history_turns,
                               settings.history_turns);
  const std::string history = render_history_lines_capitalized(recent);
  const std::string blocks = passages_as_blocks(passages);

  auto build = [&](bool retry_pass) {
    GenRequest request;
    request.role = GenRole::kSpanExtractor;
    request.system_message = tpl.system_message;
    request.temperature = 0.0;
    request.prompt = render_template(
        tpl.body,
        {{"urgency_if_retry",
          retry_pass ? std::string("Answer MUST exist -- find it!\n") : ""},
         {"history", history},
         {"question", conversation.current_query().text},
         {"passage_blocks", blocks}});
    return request;
  };

  SpanExtractionResult result;
  for (int pass = 0; pass < 2; ++pass) {
    const bool retry_pass = pass == 1;
    result.retried = retry_pass;
    try {
      std::string raw = generate(build(retry_pass), backends, retry);
      auto spans = parse_spans(raw, passages, settings.max_spans);
      if (!spans.empty()) {
        result.spans = std::move(spans);
        result.parse_failed = false;
        return result;
      }
    } catch (const UnparseableOutput&) {
      result.parse_failed = true;
    }
  }
  // Both passes produced nothing usable; the caller applies its fallback.
  result.parse_failed = true;
  result.spans.clear();
  return result;
}

std::pair<CandidateAnswer, CandidateAnswer> generate_candidates(
    const std::vector<EvidenceSpan>& spans, const Conversation& conversation,
    const QuestionTypeRule& qtype_rule, const BackendRoutingTable& backends,
    const PromptLibrary& prompts, const GenerationSettings& settings,
    const RetryPolicy& retry, const std::string& prompt_suffix) {
  const PromptTemplate tpl = prompts.get(prompt_keys::kGeneration);
  auto recent = history_window(conversation, settings.history_turns,
                               settings.history_turns);

  std::string prompt = render_template(
      tpl.body,
      {{"facts", spans_as_bullet_list(spans)},
       {"history", render_history_lines_capitalized(recent)},
       {"question", conversation.current_query().text},
       {"qtype", to_string(qtype_rule.qtype)},
       {"style_hint", qtype_rule.style_hint},
       {"target_words", std::to_string(qtype_rule.target_words)}});
  if (!prompt_suffix.empty()) {
    prompt += '\n';
    prompt += prompt_suffix;
  }

  auto call = [&](double temperature) {
    GenRequest request;
    request.role = GenRole::kGenerator;
    request.system_message = tpl.system_message;
    request.prompt = prompt;
    request.temperature = temperature;
    return generate(request, backends, retry);
  };

  // The two drafts are independent; run them concurrently.
  auto future_b = std::async(std::launch::async, call, settings.temperature_b);
  std::string text_a = call(settings.temperature_a);
  std::string text_b = future_b.get();

  return {make_candidate('A', std::move(text_a), settings.temperature_a, spans),
          make_candidate('B', std::move(text_b), settings.temperature_b, spans)};
}

std::string force_answer(const std::vector<EvidenceSpan>& spans,
                         std::string_view query,
                         const BackendRoutingTable& backends,
                         const PromptLibrary& prompts,
                         const GenerationSettings& settings,
                         const RetryPolicy& retry) {
  const PromptTemplate tpl = prompts.get(prompt_keys::kForceAnswer);
  GenRequest request;
  request.role = GenRole::kMicroEditor;
  request.system_message = tpl.system_message;
  request.temperature = settings.force_answer_temperature;
  request.prompt = render_template(
      tpl.body, {{"facts", spans_as_bullet_list(spans)},
                 {"question", std::string(query)}});
  return generate(request, backends, retry);
}

MicroAdjustOutcome micro_adjust(const CandidateAnswer& chosen,
                                const std::vector<EvidenceSpan>& spans,
                                const BackendRoutingTable& backends,
                                const PromptLibrary& prompts,
                                const GenerationSettings& settings,
                                const RetryPolicy& retry) {
  MicroAdjustOutcome outcome;
  outcome.text = chosen.text;

  const std::size_t wc = text::word_count(chosen.text);
  const double r4 = r4_extractiveness(chosen.text, spans);
  std::string reason;
  if (wc < kMicroAdjustMinWords) {
    reason = "too short (" + std::to_string(wc) + " words, need >= 50)";
  } else if (wc > kMicroAdjustMaxWords) {
    reason = "too long (" + std::to_string(wc) + " words, need <= 150)";
  } else if (r4 < SelectionConfig{}.ideal_lower) {
    reason = "low extractiveness (r4 below 0.28); reuse exact phrases from the facts";
  } else {
    return outcome;  // all three predicates false
  }
  outcome.reason = reason;

  const PromptTemplate tpl = prompts.get(prompt_keys::kMicroAdjust);
  GenRequest request;
  request.role = GenRole::kMicroEditor;
  request.system_message = tpl.system_message;
  request.temperature = settings.micro_edit_temperature;
  request.prompt = render_template(
      tpl.body,
      {{"reason", reason},
       {"truncated_spans", spans_truncated(spans, settings.span_truncate_chars)},
       {"answer", chosen.text}});

  std::string edited;
  try {
    edited = generate(request, backends, retry);
  } catch (const BackendExhausted&) {
    return outcome;  // editing is best-effort; keep the original
  }

  edited = text::trim(edited);
  if (!is_refusal(edited) &&
      text::word_count(edited) >= kMicroAdjustEditMinWords) {
    outcome.text = edited;
    outcome.edited = true;
  }
  return outcome;
}

}  // namespace convrag
