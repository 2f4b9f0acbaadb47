#include "convrag/retrieval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

using nlohmann::json;

double LexicalIndex::average_length() const {
  if (docs_.empty()) return 0.0;
  return static_cast<double>(total_length_) / static_cast<double>(docs_.size());
}

const LexicalIndex::TermStats* LexicalIndex::stats(
    const std::string& term) const {
  auto it = terms_.find(term);
  return it == terms_.end() ? nullptr : &it->second;
}

const Passage& LexicalIndex::passage(std::string_view passage_id) const {
  auto it = id_to_ordinal_.find(std::string(passage_id));
  if (it == id_to_ordinal_.end()) {
    throw Error("unknown passage id: " + std::string(passage_id));
  }
  return docs_[it->second].passage;
}

bool LexicalIndex::has_passage(std::string_view passage_id) const {
  return id_to_ordinal_.count(std::string(passage_id)) != 0;
}

RankedList LexicalIndex::retrieve(const std::string& query,
                                  std::size_t top_n) const {
  if (top_n < 1) throw EmptyQuery("retrieve: top_n must be >= 1");
  auto terms = text::normalize_tokens(query);
  if (terms.empty()) throw EmptyQuery("retrieve: query has no tokens");

  // Duplicate query terms accumulate, matching per-occurrence BM25 summation.
  std::unordered_map<std::size_t, double> scores;
  const double n_docs = static_cast<double>(docs_.size());
  const double avgdl = average_length();
  for (const auto& term : terms) {
    const TermStats* ts = stats(term);
    if (!ts) continue;
    const double df = static_cast<double>(ts->doc_frequency);
    const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
    for (const auto& [ordinal, tf_count] : ts->postings) {
      const double tf = static_cast<double>(tf_count);
      const double dl = static_cast<double>(docs_[ordinal].length);
      const double denom =
          tf + kBm25K1 * (1.0 - kBm25B + kBm25B * dl / (avgdl > 0 ? avgdl : 1.0));
      scores[ordinal] += idf * tf * (kBm25K1 + 1.0) / denom;
    }
  }

  RankedList out;
  out.source_label = "bm25";
  out.entries.reserve(scores.size());
  for (const auto& [ordinal, score] : scores) {
    out.entries.push_back(ScoredEntry{docs_[ordinal].passage.passage_id, score});
  }
  sort_ranked(out);
  if (out.entries.size() > top_n) out.entries.resize(top_n);
  return out;
}

LexicalIndex index_build(const std::vector<Passage>& passages) {
  LexicalIndex index;
  for (const auto& p : passages) {
    if (index.id_to_ordinal_.count(p.passage_id)) {
      throw DuplicatePassageId("duplicate passage id: " + p.passage_id);
    }
    const std::size_t ordinal = index.docs_.size();
    index.id_to_ordinal_[p.passage_id] = ordinal;

    auto tokens = text::normalize_tokens(p.text);
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& token : tokens) ++tf[token];
    for (const auto& [term, count] : tf) {
      auto& stats = index.terms_[term];
      ++stats.doc_frequency;
      stats.postings.emplace_back(ordinal, count);
    }
    index.total_length_ += tokens.size();
    index.docs_.push_back(LexicalIndex::Doc{p, tokens.size()});
  }
  return index;
}

// ---------------------------------------------------------------------------
// Remote client
// ---------------------------------------------------------------------------

struct RemoteSearchClient::Impl {
  std::string host;
  std::string path_prefix;

  json post(const std::string& path, const json& body) const {
    httplib::Client client(host);
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(30, 0);

    const int attempts = 3;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      auto res = client.Post(path_prefix + path, body.dump(),
                             "application/json");
      if (res && res->status == 200) {
        json parsed = json::parse(res->body, nullptr, false);
        if (!parsed.is_discarded()) return parsed;
        throw BackendUnavailable("remote returned invalid JSON from " + path);
      }
      if (attempt < attempts) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(100 * (1 << (attempt - 1))));
      }
    }
    throw BackendUnavailable("remote search endpoint unreachable: " + host +
                             path_prefix + path);
  }
};

namespace {

// Splits "http://host:port/prefix" into client host and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  std::string rest = endpoint;
  std::size_t scheme = rest.find("://");
  std::size_t path_start =
      rest.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {rest, ""};
  std::string prefix = rest.substr(path_start);
  if (prefix == "/") prefix.clear();
  return {rest.substr(0, path_start), prefix};
}

}  // namespace

RemoteSearchClient::RemoteSearchClient(std::string endpoint)
    : impl_(std::make_unique<Impl>()) {
  auto [host, prefix] = split_endpoint(endpoint);
  impl_->host = std::move(host);
  impl_->path_prefix = std::move(prefix);
}

RemoteSearchClient::~RemoteSearchClient() = default;
RemoteSearchClient::RemoteSearchClient(RemoteSearchClient&&) noexcept = default;
RemoteSearchClient& RemoteSearchClient::operator=(RemoteSearchClient&&) noexcept =
    default;

RankedList RemoteSearchClient::search(const std::string& query,
                                      std::size_t top_n) const {
  if (text::trim(query).empty()) throw EmptyQuery("remote search: empty query");
  json body = {{"query", query}, {"top_n", top_n}};
  json response = impl_->post("/search", body);

  RankedList out;
  out.source_label = "remote";
  if (auto it = response.find("results"); it != response.end() && it->is_array()) {
    for (const auto& item : *it) {
      if (!item.is_object() || !item.contains("passage_id")) continue;
      out.entries.push_back(ScoredEntry{
          item["passage_id"].get<std::string>(),
          item.value("score", 0.0)});
    }
  }
  sort_ranked(out);
  if (out.entries.size() > top_n) out.entries.resize(top_n);
  return out;
}

RankedList RemoteSearchClient::rerank(
    const std::string& query, const std::vector<Passage>& candidates) const {
  json passages = json::array();
  for (const auto& p : candidates) {
    passages.push_back({{"passage_id", p.passage_id}, {"text", p.text}});
  }
  json body = {{"query", query}, {"passages", passages}};
  json response = impl_->post("/rerank", body);

  RankedList out;
  out.source_label = "remote_rerank";
  if (auto it = response.find("scores"); it != response.end() && it->is_array()) {
    for (const auto& item : *it) {
      if (!item.is_object() || !item.contains("passage_id")) continue;
      out.entries.push_back(ScoredEntry{
          item["passage_id"].get<std::string>(),
          item.value("score", 0.0)});
    }
  }
  sort_ranked(out);
  return out;
}

// ---------------------------------------------------------------------------
// Bindings
// ---------------------------------------------------------------------------

Retriever::Retriever(RetrieverBinding binding, const LexicalIndex* index)
    : binding_(std::move(binding)), index_(index) {
  if (binding_.kind == RetrieverKind::kRemote) {
    remote_ = std::make_shared<RemoteSearchClient>(binding_.endpoint);
  } else if (!index_) {
    throw Error("reference retriever requires an index");
  }
}

RankedList Retriever::retrieve(const std::string& query,
                               std::size_t top_n) const {
  if (binding_.kind == RetrieverKind::kRemote) {
    return remote_->search(query, top_n);
  }
  return index_->retrieve(query, top_n);
}

RankedList rerank(const RerankerBinding& binding, const std::string& query,
                  const RankedList& candidates,
                  const std::vector<Passage>& candidate_passages) {
  if (candidates.entries.empty()) {
    throw EmptyInput("rerank: empty candidate list");
  }
  if (binding.kind == RerankerKind::kNone) return candidates;

  RemoteSearchClient client(binding.endpoint);
  RankedList scored = client.rerank(query, candidate_passages);

  // Preserve the candidate set exactly: anything the endpoint dropped (or
  // invented) is reconciled against the input.
  RankedList out;
  out.source_label = "reranked";
  double min_score = 0.0;
  std::vector<ScoredEntry> kept;
  for (const auto& e : scored.entries) {
    if (!candidates.contains(e.passage_id)) continue;
    kept.push_back(e);
    min_score = std::min(min_score, e.score);
  }
  out.entries = std::move(kept);
  sort_ranked(out);

  double tail_score = out.entries.empty() ? 0.0 : out.entries.back().score;
  const std::size_t kept_count = out.entries.size();
  for (const auto& e : candidates.entries) {
    if (std::none_of(out.entries.begin(), out.entries.begin() + kept_count,
                     [&](const ScoredEntry& kept_entry) {
                       return kept_entry.passage_id == e.passage_id;
                     })) {
      tail_score -= 1.0;
      out.entries.push_back(ScoredEntry{e.passage_id, tail_score});
    }
  }
  return out;
}

}  // namespace convrag
