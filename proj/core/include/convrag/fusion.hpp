#pragma once

#include <map>
#include <string>
#include <vector>

#include "convrag/model.hpp"

namespace convrag {

// Per-corpus nested fusion parameters. Weights need not sum to 1: reciprocal
// rank fusion is scale-sensitive per term and only the final ordering is
// consumed downstream.
struct FusionProfile {
  Corpus corpus = Corpus::kClapNq;
  double k_final = 20.0;
  double w_minimal = 0.55;
  double w_corpus_specific = 0.40;
  double w_weak_consensus = 0.05;
  double k_internal = 40.0;
};

struct HybridParams {
  double k = 60.0;
  double alpha = 0.5;
};

// Retriever+reranker fusion:
//   Score(d) = 1/(k + r_E(d)) + alpha/(k + r_R(d))
// A passage absent from one list contributes 0 for that term.
RankedList hybrid_fuse(const RankedList& retriever_list,
                       const RankedList& reranker_list,
                       const HybridParams& params);

// Weighted reciprocal rank fusion:
//   Score(d) = sum_s w_s / (k + rank_s(d))  over lists containing d.
// Output sorted by score descending, ties broken by passage_id ascending.
// Throws EmptyInput when `lists` is empty.
RankedList weighted_rrf(const std::vector<RankedList>& lists,
                        const std::vector<double>& weights, double k);

// Two-level fusion. Level 1 pre-aggregates the three high-variance strategy
// lists into a Weak Consensus ranking with equal weights and k_internal;
// Level 2 fuses [minimal, corpus_specific, weak] with the profile weights
// and k_final. Level 2 consumes the 1-based positions of the Level-1 output,
// not its scores.
RankedList nested_fuse(const RankedList& minimal,
                       const RankedList& corpus_specific,
                       const RankedList& hyde, const RankedList& cot,
                       const RankedList& anchor, const FusionProfile& profile);

// Built-in per-corpus default profiles (k_internal = 40 throughout):
//   clapnq: k_final=20 w=0.55/0.40/0.05
//   fiqa:   k_final=60 w=0.45/0.40/0.15
//   govt:   k_final=40 w=0.65/0.25/0.10
//   cloud:  k_final=20 w=0.65/0.30/0.05
std::map<Corpus, FusionProfile> default_profiles();

// Profiles from a JSON object {"<corpus>": {"k_final":..,"w_minimal":..,
// "w_corpus_specific":..,"w_weak_consensus":..,"k_internal":..}, ...}.
// Missing corpora (or an empty object) fall back to the built-in defaults;
// present corpora may override any subset of fields.
// Throws BadProfile on a negative weight or non-positive k.
std::map<Corpus, FusionProfile> load_profiles(const std::string& json_text);

}  // namespace convrag
