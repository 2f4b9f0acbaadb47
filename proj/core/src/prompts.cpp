#include "convrag/prompts.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

namespace {

const char* kRewriteJsonSchema =
    "JSON: {\"class\": \"standalone|non-standalone\",\n"
    "       \"rewritten version\": \"...\"}";

PromptTemplate corpus_specific_template(const std::string& source,
                                        const std::string& preserve_rule) {
  PromptTemplate t;
  t.system_message = "You are rewriting queries for retrieval from " + source +
                     " using ELSER (sparse semantic search).";
  t.body =
      "CRITICAL RULES:\n"
      "1. ENTITY FORMS: include formal AND common names (e.g., \"Apple Inc. "
      "Apple\")\n"
      "2. PRONOUNS: resolve to exact entity\n"
      "3. " + preserve_rule + "\n"
      "4. FORMALIZATION: preserve conversational terms\n"
      "5. DISAMBIGUATION: qualifier only when ambiguous\n"
      "6. KEYWORDS: preserve who/what/when/where\n"
      "\n"
      "If standalone, return UNCHANGED.\n"
      "\n" + std::string(kRewriteJsonSchema) + "\n"
      "\n"
      "{history}\n"
      "user: {question}";
  return t;
}

std::unordered_map<std::string, PromptTemplate> make_builtins() {
  std::unordered_map<std::string, PromptTemplate> lib;

  lib[prompt_keys::kMinimal] = PromptTemplate{
      "Rewrite the final utterance into a single standalone utterance "
      "without needing history.",
      "Rules:\n"
      "- Do not rephrase or introduce new terms.\n"
      "- Stay close to the original.\n"
      "- If standalone: return THE SAME query.\n"
      "- Use assistant turns ONLY to resolve pronouns/references.\n"
      "\n" + std::string(kRewriteJsonSchema) + "\n"
      "\n"
      "{history}\n"
      "user: {question}"};

  lib[prompt_keys::kCorpusSpecificClapNq] = corpus_specific_template(
      "Wikipedia", "TEMPORAL: Wikipedia's natural phrasing");
  lib[prompt_keys::kCorpusSpecificFiqa] = corpus_specific_template(
      "a personal-finance forum",
      "PRESERVE: amounts, currencies, tickers, time horizons");
  lib[prompt_keys::kCorpusSpecificGovt] = corpus_specific_template(
      "government documents",
      "PRESERVE: program names, agency acronyms, form IDs, locations");
  lib[prompt_keys::kCorpusSpecificCloud] = corpus_specific_template(
      "technical cloud documentation",
      "PRESERVE: error codes, CLI commands/flags, config keys, service names");

  lib[prompt_keys::kCot] = PromptTemplate{
      "Expert query rewriter for IR systems.",
      "PROCESS (Chain-of-Thought):\n"
      "1. ANALYZE: entities, pronouns, ambiguity\n"
      "2. REASON: standalone? what history needed?\n"
      "3. REWRITE: resolve, add context, keep wording\n"
      "\n"
      "JSON: {\"reasoning\": \"<step-by-step>\",\n"
      "       \"class\": \"standalone|non-standalone\",\n"
      "       \"rewritten version\": \"<query>\"}\n"
      "\n"
      "{history}\n"
      "user: {question}"};

  lib[prompt_keys::kHyde] = PromptTemplate{
      "Generate hypothetical document passages for retrieval (HyDE "
      "strategy).",
      "TASK: Generate a 2-4 sentence passage that would answer the query. "
      "Used for retrieval only.\n"
      "\n"
      "JSON: {\"standalone_query\": \"<rewrite>\",\n"
      "       \"hypothetical_passage\": \"<2-4 sent>\"}\n"
      "\n"
      "Rules:\n"
      "- Write as a document answering the question\n"
      "- Include facts, names, dates when relevant\n"
      "- Use vocabulary from authoritative sources\n"
      "\n"
      "{history}\n"
      "user: {question}"};

  lib[prompt_keys::kAnchorKeyword] = PromptTemplate{
      "Rewrite into ONE standalone query for RETRIEVAL.\n"
      "Extract RETRIEVAL TERMS for ELSER:\n"
      "- anchors: entity names, acronyms, IDs, error codes, CLI flags (max "
      "8)\n"
      "- keywords: intent terms (max 12)",
      "Rules:\n"
      "- Do NOT invent new entities/facts\n"
      "- Preserve numbers/codes/tickers exactly\n"
      "- Query <= 28 words\n"
      "\n"
      "JSON: {\"class\": \"standalone|non-standalone\",\n"
      "       \"rewritten version\": \"...\",\n"
      "       \"anchors\": [\"...\"],\n"
      "       \"keywords\": [\"...\"]}\n"
      "\n"
      "{history}\n"
      "user: {question}"};

  lib[prompt_keys::kConversational] = PromptTemplate{
      "Friendly assistant.",
      "Brief friendly response to conversational message.\n"
      "\n"
      "History: {history}\n"
      "User: {question}\n"
      "\n"
      "Response (under 50 words):"};

  lib[prompt_keys::kNoContext] = PromptTemplate{
      "Helpful assistant.",
      "No information available for this question.\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "Short response (under 25 words) stating information is not "
      "available.\n"
      "Do NOT say \"I don't know\" -- say \"The information is not "
      "available\" or similar.\n"
      "\n"
      "Response:"};

  lib[prompt_keys::kSpanExtraction] = PromptTemplate{
      "Extract relevant sentences.",
      "Extract sentences answering the question.\n"
      "\n"
      "{urgency_if_retry}"
      "History: {history}\n"
      "Question: {question}\n"
      "\n"
      "{passage_blocks}"
      "Rules:\n"
      "1. Copy EXACT sentences\n"
      "2. Include: names, numbers, dates, key facts\n"
      "3. Max 8 sentences\n"
      "4. Prioritize earlier passages\n"
      "\n"
      "JSON format:\n"
      "{\"extractedSpans\": [{\"passageId\": 1, \"sentence\": \"exact "
      "text\"}]}"};

  lib[prompt_keys::kGeneration] = PromptTemplate{
      "Helpful, accurate assistant.",
      "Generate a natural answer using ONLY the facts below.\n"
      "\n"
      "FACTS:\n"
      "{facts}\n"
      "\n"
      "Conversation context: {history}\n"
      "\n"
      "Question: {question}\n"
      "Type: {qtype} -- {style_hint}\n"
      "\n"
      "CRITICAL RULES:\n"
      "-- Use ONLY information from FACTS above\n"
      "-- Copy exact phrases for: names, numbers, dates, technical terms\n"
      "-- Aim for ~35% verbatim overlap with facts\n"
      "-- Make it sound natural and complete\n"
      "-- NO outside knowledge\n"
      "-- NO hedging (seems, possibly, maybe)\n"
      "-- NO meta-phrases (based on, according to)\n"
      "\n"
      "Length: ~{target_words} words\n"
      "\n"
      "Answer:"};

  lib[prompt_keys::kTechnicalJudge] = PromptTemplate{
      "Judge assistant.",
      "Compare two answers for quality.\n"
      "\n"
      "Question: {question}\n"
      "Facts: {truncated_spans}\n"
      "\n"
      "A: {answer_a}\n"
      "   ({wc_a}w, {extr_a}% extractiveness)\n"
      "\n"
      "B: {answer_b}\n"
      "   ({wc_b}w, {extr_b}% extractiveness)\n"
      "\n"
      "Evaluate: Faithfulness, Completeness, Naturalness\n"
      "Ideal extractiveness: 28-45%\n"
      "\n"
      "JSON: {\"winner\": \"A|B\", \"score_A\": 0-10, \"score_B\": 0-10, "
      "\"reason\": \"brief\"}"};

  lib[prompt_keys::kUserJudge] = PromptTemplate{
      "User perspective.",
      "As a user, which answer do you prefer?\n"
      "\n"
      "Context: {recent_history}\n"
      "Question: {question}\n"
      "\n"
      "A: {answer_a}\n"
      "\n"
      "B: {answer_b}\n"
      "\n"
      "JSON: {\"preferred\": \"A|B\", \"confidence\": "
      "\"HIGH|MEDIUM|LOW\"}"};

  lib[prompt_keys::kForceAnswer] = PromptTemplate{
      "Always answers when facts exist.",
      "Answer using ONLY these facts. Do NOT say you cannot answer.\n"
      "\n"
      "Facts:\n"
      "{facts}\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "Direct answer using the facts:"};

  lib[prompt_keys::kMicroAdjust] = PromptTemplate{
      "Editor.",
      "Fix this answer: {reason}\n"
      "\n"
      "Facts:\n"
      "{truncated_spans}\n"
      "\n"
      "Current: {answer}\n"
      "\n"
      "Fix with minimal changes. Use exact phrases from facts.\n"
      "\n"
      "Fixed:"};

  lib[prompt_keys::kGateDocument] = PromptTemplate{
      "Relevance judge.",
      "Decide whether the retrieved passages are relevant enough to answer "
      "the question.\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "{passage_blocks}"
      "JSON: {\"class\": \"answerable|unanswerable\", \"confidence\": "
      "0.0-1.0}"};

  lib[prompt_keys::kGateSpan] = PromptTemplate{
      "Evidence judge.",
      "Decide whether the extracted evidence covers the question.\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "Evidence:\n"
      "{facts}\n"
      "\n"
      "JSON: {\"class\": \"answerable|unanswerable\", \"confidence\": "
      "0.0-1.0}"};

  lib[prompt_keys::kGateAnswer] = PromptTemplate{
      "Answer judge.",
      "Decide whether this answer adequately addresses the question.\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "Answer: {answer}\n"
      "\n"
      "JSON: {\"class\": \"answerable|unanswerable\", \"confidence\": "
      "0.0-1.0}"};

  lib[prompt_keys::kGateClassifier] = PromptTemplate{
      "Answerability classifier.",
      "Given the user question and retrieved passages, classify the "
      "answerability:\n"
      "- ANSWERABLE: Passages contain sufficient information to fully "
      "answer.\n"
      "- PARTIAL: Passages contain some relevant information but "
      "incomplete.\n"
      "- UNANSWERABLE: No relevant information in passages.\n"
      "\n"
      "Question: {question}\n"
      "\n"
      "{passage_blocks}"
      "Output: {\"class\": str, \"confidence\": float}"};

  return lib;
}

const std::unordered_map<std::string, PromptTemplate>& builtins() {
  static const auto lib = make_builtins();
  return lib;
}

PromptTemplate parse_template_file(const std::string& content) {
  // System message runs to the first blank line; the rest is the body.
  std::size_t split = content.find("\n\n");
  PromptTemplate t;
  if (split == std::string::npos) {
    t.body = content;
  } else {
    t.system_message = text::trim(content.substr(0, split));
    t.body = content.substr(split + 2);
  }
  // Strip one trailing newline left by editors.
  if (!t.body.empty() && t.body.back() == '\n') t.body.pop_back();
  return t;
}

}  // namespace

const PromptTemplate& PromptLibrary::builtin(std::string_view key) {
  auto it = builtins().find(std::string(key));
  if (it == builtins().end()) {
    throw Error("unknown prompt template key: " + std::string(key));
  }
  return it->second;
}

PromptTemplate PromptLibrary::get(std::string_view key) const {
  if (template_dir_) {
    std::ifstream in(*template_dir_ + "/" + std::string(key) + ".txt");
    if (in) {
      std::stringstream buffer;
      buffer << in.rdbuf();
      return parse_template_file(buffer.str());
    }
  }
  return builtin(key);
}

std::string render_template(std::string_view body,
                            const std::map<std::string, std::string>& values) {
  std::string out(body);
  for (const auto& [name, value] : values) {
    out = text::replace_all(out, "{" + name + "}", value);
  }
  return out;
}

std::string render_history_lines(const std::vector<Turn>& turns) {
  std::string out;
  for (const auto& turn : turns) {
    out += turn.role == Role::kUser ? "user: " : "assistant: ";
    out += turn.text;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string render_history_lines_capitalized(const std::vector<Turn>& turns) {
  std::string out;
  for (const auto& turn : turns) {
    out += turn.role == Role::kUser ? "User: " : "Assistant: ";
    out += turn.text;
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

}  // namespace convrag
