#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace convrag {

enum class Role { kUser, kAgent };

enum class Corpus { kClapNq, kFiqa, kGovt, kCloud };

inline constexpr Corpus kAllCorpora[] = {Corpus::kClapNq, Corpus::kFiqa,
                                         Corpus::kGovt, Corpus::kCloud};

std::string to_string(Role role);
std::string to_string(Corpus corpus);
std::optional<Role> role_from_string(std::string_view s);
std::optional<Corpus> corpus_from_string(std::string_view s);

struct Turn {
  Role role = Role::kUser;
  std::string text;
  std::size_t turn_index = 0;
};

enum class Answerability { kAnswerable, kPartial, kUnanswerable, kConversational };
std::string to_string(Answerability a);
std::optional<Answerability> answerability_from_string(std::string_view s);

// One evaluated turn: the full user/agent history with the final user turn
// as the current query. Immutable after construction.
struct Conversation {
  std::string id;
  Corpus corpus = Corpus::kClapNq;
  std::vector<Turn> turns;
  // Optional gold label carried on the record (used by evaluation only).
  std::optional<Answerability> answerability;

  const Turn& current_query() const { return turns.back(); }
};

struct Passage {
  std::string passage_id;
  std::string doc_id;
  Corpus corpus = Corpus::kClapNq;
  std::string text;
};

struct ScoredEntry {
  std::string passage_id;
  double score = 0.0;
};

// Ordered retrieval/fusion output. Entries are sorted by score descending
// with ties broken by passage_id ascending; rank of entry i is i+1.
struct RankedList {
  std::string source_label;
  std::vector<ScoredEntry> entries;

  bool contains(std::string_view passage_id) const;
  // 1-based rank, or 0 when absent.
  std::size_t rank_of(std::string_view passage_id) const;
};

// Sorts entries into the canonical order (score desc, passage_id asc).
void sort_ranked(RankedList& list);

// Last `max_user` user turns and last `max_agent` agent turns preceding the
// current query, merged back into chronological order.
std::vector<Turn> history_window(const Conversation& conversation,
                                 std::size_t max_user, std::size_t max_agent);

// Parses one JSONL record into a validated Conversation.
// Throws MalformedRecord, EmptyConversation, BadRole.
Conversation validate_conversation(std::string_view json_line);

// Parses one JSONL record into a Passage. Throws MalformedRecord.
Passage parse_passage(std::string_view json_line);

// Whole-file loaders; blank lines are skipped.
std::vector<Conversation> load_conversations_jsonl(const std::string& path);
std::vector<Passage> load_passages_jsonl(const std::string& path);

// Reference passages attached to a conversation record (Task B input).
struct ReferencedConversation {
  Conversation conversation;
  std::vector<Passage> reference_passages;
};
ReferencedConversation validate_referenced_conversation(
    std::string_view json_line);
std::vector<ReferencedConversation> load_referenced_conversations_jsonl(
    const std::string& path);

// TREC-style run line: `query_id Q0 passage_id rank score source_label`.
void write_run_lines(std::ostream& out, const std::string& query_id,
                     const RankedList& list, std::size_t top_k);

}  // namespace convrag
