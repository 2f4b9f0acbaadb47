#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "convrag/model.hpp"

namespace convrag {

// Binary relevance judgments keyed by query id (one evaluated turn per id),
// with optional per-turn answerability labels.
struct Qrels {
  std::map<std::string, std::set<std::string>> relevant;
  std::map<std::string, Answerability> labels;

  // Parses TREC qrels lines: `query_id 0 passage_id relevance`.
  static Qrels from_trec_file(const std::string& path);
  static Qrels from_trec_text(const std::string& content);
};

// |top-k ∩ gold| / |gold|. Throws EmptyGold.
double recall_at_k(const RankedList& ranking,
                   const std::set<std::string>& gold, std::size_t k);

// Binary-gain nDCG with log2(rank+1) discount; ideal DCG spans
// min(|gold|, k) positions. Throws EmptyGold.
double ndcg_at_k(const RankedList& ranking, const std::set<std::string>& gold,
                 std::size_t k);

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// LCS-based ROUGE-L over lowercased whitespace tokens. Empty candidate or
// reference yields all zeros.
RougeScore rouge_l(const std::string& candidate, const std::string& reference);

// n / sum(1/v_i); 0 whenever any value is 0. Values must be non-negative.
double harmonic_mean(const std::vector<double>& values);

// One-sided paired bootstrap testing mean(a) > mean(b): resamples turn
// indices with replacement and returns the fraction of resamples where
// mean(a) - mean(b) <= 0. Deterministic given the seed.
// Throws LengthMismatch when sizes differ or n < 2.
double paired_bootstrap(const std::vector<double>& scores_a,
                        const std::vector<double>& scores_b,
                        std::size_t iterations, std::uint64_t seed);

struct MetricReport {
  // metric name -> per-query-id values (insertion order = evaluation order).
  std::map<std::string, std::map<std::string, double>> per_turn;
  std::map<std::string, double> macro;
  // metric name -> corpus name -> mean.
  std::map<std::string, std::map<std::string, double>> per_domain;
  // label -> p-value, for optional significance entries.
  std::map<std::string, double> significance;
  std::size_t evaluated_turns = 0;

  std::string to_json_string(int indent = 2) const;
  std::string to_text() const;
};

}  // namespace convrag
