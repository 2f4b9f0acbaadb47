#include "convrag/fusion.hpp"

#include <map>

#include "json.hpp"

#include "convrag/errors.hpp"

namespace convrag {

using nlohmann::json;

namespace {

RankedList from_score_map(const std::map<std::string, double>& scores,
                          std::string label) {
  RankedList out;
  out.source_label = std::move(label);
  out.entries.reserve(scores.size());
  for (const auto& [passage_id, score] : scores) {
    out.entries.push_back(ScoredEntry{passage_id, score});
  }
  sort_ranked(out);
  return out;
}

}  // namespace

RankedList hybrid_fuse(const RankedList& retriever_list,
                       const RankedList& reranker_list,
                       const HybridParams& params) {
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < retriever_list.entries.size(); ++i) {
    scores[retriever_list.entries[i].passage_id] +=
        1.0 / (params.k + static_cast<double>(i + 1));
  }
  for (std::size_t i = 0; i < reranker_list.entries.size(); ++i) {
    scores[reranker_list.entries[i].passage_id] +=
        params.alpha / (params.k + static_cast<double>(i + 1));
  }
  return from_score_map(scores, "hybrid_rrf");
}

RankedList weighted_rrf(const std::vector<RankedList>& lists,
                        const std::vector<double>& weights, double k) {
  if (lists.empty()) throw EmptyInput("weighted_rrf: no input lists");
  if (lists.size() != weights.size()) {
    throw EmptyInput("weighted_rrf: list/weight count mismatch");
  }
  std::map<std::string, double> scores;
  for (std::size_t s = 0; s < lists.size(); ++s) {
    const auto& entries = lists[s].entries;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      scores[entries[i].passage_id] +=
          weights[s] / (k + static_cast<double>(i + 1));
    }
  }
  return from_score_map(scores, "weighted_rrf");
}

RankedList nested_fuse(const RankedList& minimal,
                       const RankedList& corpus_specific,
                       const RankedList& hyde, const RankedList& cot,
                       const RankedList& anchor,
                       const FusionProfile& profile) {
  RankedList weak =
      weighted_rrf({hyde, cot, anchor}, {1.0, 1.0, 1.0}, profile.k_internal);
  weak.source_label = "weak_consensus";

  RankedList fused = weighted_rrf(
      {minimal, corpus_specific, weak},
      {profile.w_minimal, profile.w_corpus_specific, profile.w_weak_consensus},
      profile.k_final);
  fused.source_label = "nested_rrf";
  return fused;
}

std::map<Corpus, FusionProfile> default_profiles() {
  std::map<Corpus, FusionProfile> out;
  out[Corpus::kClapNq] = FusionProfile{Corpus::kClapNq, 20.0, 0.55, 0.40, 0.05, 40.0};
  out[Corpus::kFiqa] = FusionProfile{Corpus::kFiqa, 60.0, 0.45, 0.40, 0.15, 40.0};
  out[Corpus::kGovt] = FusionProfile{Corpus::kGovt, 40.0, 0.65, 0.25, 0.10, 40.0};
  out[Corpus::kCloud] = FusionProfile{Corpus::kCloud, 20.0, 0.65, 0.30, 0.05, 40.0};
  return out;
}

std::map<Corpus, FusionProfile> load_profiles(const std::string& json_text) {
  auto profiles = default_profiles();

  json config = json::parse(json_text, nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    throw BadProfile("profile config is not a JSON object");
  }

  for (auto it = config.begin(); it != config.end(); ++it) {
    auto corpus = corpus_from_string(it.key());
    if (!corpus) throw BadProfile("unknown corpus in profile config: " + it.key());
    if (!it.value().is_object()) {
      throw BadProfile("profile for " + it.key() + " is not an object");
    }
    FusionProfile& p = profiles[*corpus];
    const json& block = it.value();
    auto read = [&block](const char* field, double& target) {
      if (auto f = block.find(field); f != block.end()) {
        if (!f->is_number()) throw BadProfile(std::string("non-numeric ") + field);
        target = f->get<double>();
      }
    };
    read("k_final", p.k_final);
    read("w_minimal", p.w_minimal);
    read("w_corpus_specific", p.w_corpus_specific);
    read("w_weak_consensus", p.w_weak_consensus);
    read("k_internal", p.k_internal);
  }

  for (const auto& [corpus, p] : profiles) {
    if (p.k_final <= 0.0 || p.k_internal <= 0.0) {
      throw BadProfile("non-positive k for corpus " + to_string(corpus));
    }
    if (p.w_minimal < 0.0 || p.w_corpus_specific < 0.0 ||
        p.w_weak_consensus < 0.0) {
      throw BadProfile("negative weight for corpus " + to_string(corpus));
    }
  }
  return profiles;
}

}  // namespace convrag
