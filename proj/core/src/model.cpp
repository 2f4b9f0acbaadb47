#include "convrag/model.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

using nlohmann::json;

std::string to_string(Role role) {
  return role == Role::kUser ? "user" : "agent";
}

std::string to_string(Corpus corpus) {
  switch (corpus) {
    case Corpus::kClapNq: return "clapnq";
    case Corpus::kFiqa: return "fiqa";
    case Corpus::kGovt: return "govt";
    case Corpus::kCloud: return "cloud";
  }
  return "clapnq";
}

std::optional<Role> role_from_string(std::string_view s) {
  if (s == "user") return Role::kUser;
  // "assistant" appears in some upstream exports; treat it as agent.
  if (s == "agent" || s == "assistant") return Role::kAgent;
  return std::nullopt;
}

std::optional<Corpus> corpus_from_string(std::string_view s) {
  if (s == "clapnq") return Corpus::kClapNq;
  if (s == "fiqa") return Corpus::kFiqa;
  if (s == "govt") return Corpus::kGovt;
  if (s == "cloud") return Corpus::kCloud;
  return std::nullopt;
}

std::string to_string(Answerability a) {
  switch (a) {
    case Answerability::kAnswerable: return "answerable";
    case Answerability::kPartial: return "partial";
    case Answerability::kUnanswerable: return "unanswerable";
    case Answerability::kConversational: return "conversational";
  }
  return "answerable";
}

std::optional<Answerability> answerability_from_string(std::string_view s) {
  if (s == "answerable") return Answerability::kAnswerable;
  if (s == "partial" || s == "partially answerable") return Answerability::kPartial;
  if (s == "unanswerable") return Answerability::kUnanswerable;
  if (s == "conversational") return Answerability::kConversational;
  return std::nullopt;
}

bool RankedList::contains(std::string_view passage_id) const {
  return rank_of(passage_id) != 0;
}

std::size_t RankedList::rank_of(std::string_view passage_id) const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].passage_id == passage_id) return i + 1;
  }
  return 0;
}

void sort_ranked(RankedList& list) {
  std::stable_sort(list.entries.begin(), list.entries.end(),
                   [](const ScoredEntry& a, const ScoredEntry& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.passage_id < b.passage_id;
                   });
}

std::vector<Turn> history_window(const Conversation& conversation,
                                 std::size_t max_user, std::size_t max_agent) {
  const auto& turns = conversation.turns;
  if (turns.size() <= 1) return {};

  // History excludes the current query (the final turn).
  const std::size_t history_len = turns.size() - 1;
  std::vector<bool> keep(history_len, false);

  std::size_t users = 0;
  std::size_t agents = 0;
  for (std::size_t i = history_len; i-- > 0;) {
    if (turns[i].role == Role::kUser && users < max_user) {
      keep[i] = true;
      ++users;
    } else if (turns[i].role == Role::kAgent && agents < max_agent) {
      keep[i] = true;
      ++agents;
    }
  }

  std::vector<Turn> window;
  for (std::size_t i = 0; i < history_len; ++i) {
    if (keep[i]) window.push_back(turns[i]);
  }
  return window;
}

namespace {

json parse_record(std::string_view line) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw MalformedRecord("record is not a JSON object");
  }
  return record;
}

std::string require_string(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw MalformedRecord(std::string("missing or non-string field: ") + field);
  }
  return it->get<std::string>();
}

Passage passage_from_json(const json& record, bool require_corpus) {
  Passage p;
  p.passage_id = require_string(record, "passage_id");
  if (auto it = record.find("doc_id"); it != record.end() && it->is_string()) {
    p.doc_id = it->get<std::string>();
  }
  if (auto it = record.find("corpus"); it != record.end() && it->is_string()) {
    auto corpus = corpus_from_string(it->get<std::string>());
    if (!corpus) throw MalformedRecord("unknown corpus: " + it->get<std::string>());
    p.corpus = *corpus;
  } else if (require_corpus) {
    throw MalformedRecord("missing or non-string field: corpus");
  }
  p.text = require_string(record, "text");
  return p;
}

}  // namespace

Conversation validate_conversation(std::string_view json_line) {
  json record = parse_record(json_line);

  Conversation conv;
  conv.id = require_string(record, "id");

  std::string corpus_name = require_string(record, "corpus");
  auto corpus = corpus_from_string(corpus_name);
  if (!corpus) throw MalformedRecord("unknown corpus: " + corpus_name);
  conv.corpus = *corpus;

  auto turns_it = record.find("turns");
  if (turns_it == record.end() || !turns_it->is_array()) {
    throw MalformedRecord("missing or non-array field: turns");
  }

  std::size_t index = 0;
  bool has_user = false;
  for (const auto& raw_turn : *turns_it) {
    if (!raw_turn.is_object()) throw MalformedRecord("turn is not an object");
    std::string role_name = require_string(raw_turn, "role");
    auto role = role_from_string(role_name);
    if (!role) throw BadRole("unknown role: " + role_name);
    std::string turn_text = require_string(raw_turn, "text");
    if (text::trim(turn_text).empty()) {
      throw MalformedRecord("turn text empty after trimming");
    }
    if (*role == Role::kUser) has_user = true;
    conv.turns.push_back(Turn{*role, std::move(turn_text), index++});
  }

  if (conv.turns.empty() || !has_user) {
    throw EmptyConversation("conversation has no user turn");
  }
  if (conv.turns.back().role != Role::kUser) {
    throw BadRole("last turn must be a user turn");
  }

  if (auto it = record.find("answerability");
      it != record.end() && it->is_string()) {
    conv.answerability = answerability_from_string(it->get<std::string>());
  }
  return conv;
}

Passage parse_passage(std::string_view json_line) {
  return passage_from_json(parse_record(json_line), /*require_corpus=*/true);
}

std::vector<Conversation> load_conversations_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open conversations file: " + path);
  std::vector<Conversation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(validate_conversation(line));
  }
  return out;
}

std::vector<Passage> load_passages_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open passage file: " + path);
  std::vector<Passage> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(parse_passage(line));
  }
  return out;
}

ReferencedConversation validate_referenced_conversation(
    std::string_view json_line) {
  ReferencedConversation out;
  out.conversation = validate_conversation(json_line);

  json record = parse_record(json_line);
  if (auto it = record.find("reference_passages");
      it != record.end() && it->is_array()) {
    for (const auto& raw : *it) {
      if (!raw.is_object()) throw MalformedRecord("reference passage is not an object");
      Passage p = passage_from_json(raw, /*require_corpus=*/false);
      p.corpus = out.conversation.corpus;
      out.reference_passages.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<ReferencedConversation> load_referenced_conversations_jsonl(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open conversations file: " + path);
  std::vector<ReferencedConversation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    out.push_back(validate_referenced_conversation(line));
  }
  return out;
}

void write_run_lines(std::ostream& out, const std::string& query_id,
                     const RankedList& list, std::size_t top_k) {
  const std::size_t n = std::min(top_k, list.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = list.entries[i];
    out << query_id << " Q0 " << e.passage_id << ' ' << (i + 1) << ' '
        << text::format_fixed(e.score, 6) << ' ' << list.source_label << '\n';
  }
}

}  // namespace convrag
