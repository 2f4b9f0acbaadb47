#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "convrag/model.hpp"

namespace convrag {

enum class RetrieverKind { kReferenceLexical, kRemote };
enum class RerankerKind { kNone, kRemote };

struct RetrieverBinding {
  RetrieverKind kind = RetrieverKind::kReferenceLexical;
  std::size_t top_n = 100;
  std::string endpoint;  // remote only
};

struct RerankerBinding {
  RerankerKind kind = RerankerKind::kNone;
  std::string endpoint;
  std::size_t candidate_depth = 100;
};

// Deterministic in-memory lexical index scored with BM25 (k1=1.2, b=0.75)
// over lowercased, punctuation-stripped, whitespace tokens. Immutable after
// build; safe to query concurrently.
class LexicalIndex {
 public:
  struct TermStats {
    std::size_t doc_frequency = 0;
    // (doc ordinal, term frequency) pairs in insertion order.
    std::vector<std::pair<std::size_t, std::size_t>> postings;
  };

  static constexpr double kBm25K1 = 1.2;
  static constexpr double kBm25B = 0.75;

  std::size_t size() const { return docs_.size(); }
  double average_length() const;
  const TermStats* stats(const std::string& term) const;
  const Passage& passage(std::string_view passage_id) const;
  bool has_passage(std::string_view passage_id) const;

  // BM25 top_n retrieval, ties broken by passage_id ascending.
  // Throws EmptyQuery when top_n < 1 or the query has no tokens at all.
  RankedList retrieve(const std::string& query, std::size_t top_n) const;

 private:
  friend LexicalIndex index_build(const std::vector<Passage>& passages);

  struct Doc {
    Passage passage;
    std::size_t length = 0;
  };
  std::vector<Doc> docs_;
  std::unordered_map<std::string, std::size_t> id_to_ordinal_;
  std::unordered_map<std::string, TermStats> terms_;
  std::size_t total_length_ = 0;
};

// Throws DuplicatePassageId.
LexicalIndex index_build(const std::vector<Passage>& passages);

// Remote search client speaking the engine's minimal JSON contract:
//   POST <endpoint>/search {"query": str, "top_n": int}
//     -> {"results": [{"passage_id": str, "score": num}]}
//   POST <endpoint>/rerank {"query": str, "passages":
//        [{"passage_id": str, "text": str}]}
//     -> {"scores": [{"passage_id": str, "score": num}]}
// Transport failures are retried (3 attempts, exponential backoff) before
// surfacing BackendUnavailable.
class RemoteSearchClient {
 public:
  explicit RemoteSearchClient(std::string endpoint);
  ~RemoteSearchClient();
  RemoteSearchClient(RemoteSearchClient&&) noexcept;
  RemoteSearchClient& operator=(RemoteSearchClient&&) noexcept;

  RankedList search(const std::string& query, std::size_t top_n) const;
  RankedList rerank(const std::string& query,
                    const std::vector<Passage>& candidates) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Resolves a retrieval query against either backend kind.
class Retriever {
 public:
  Retriever(RetrieverBinding binding, const LexicalIndex* index);

  RankedList retrieve(const std::string& query, std::size_t top_n) const;
  const RetrieverBinding& binding() const { return binding_; }

 private:
  RetrieverBinding binding_;
  const LexicalIndex* index_;  // reference backend only, not owned
  std::shared_ptr<RemoteSearchClient> remote_;
};

// kNone passes candidates through unchanged. kRemote re-scores via the
// endpoint; candidates dropped from the response are appended as a
// lowest-score tail so the output passage set always equals the input set.
RankedList rerank(const RerankerBinding& binding, const std::string& query,
                  const RankedList& candidates,
                  const std::vector<Passage>& candidate_passages);

}  // namespace convrag
