#include "convrag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

using nlohmann::json;

Qrels Qrels::from_trec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedRecord("cannot open qrels file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_trec_text(buffer.str());
}

Qrels Qrels::from_trec_text(const std::string& content) {
  Qrels qrels;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    auto fields = text::split_whitespace(line);
    if (fields.size() != 4) {
      throw MalformedRecord("qrels line must have 4 fields: " + line);
    }
    int relevance = 0;
    try {
      relevance = std::stoi(fields[3]);
    } catch (const std::exception&) {
      throw MalformedRecord("non-numeric relevance: " + line);
    }
    if (relevance > 0) qrels.relevant[fields[0]].insert(fields[2]);
  }
  return qrels;
}

double recall_at_k(const RankedList& ranking,
                   const std::set<std::string>& gold, std::size_t k) {
  if (gold.empty()) throw EmptyGold("recall_at_k: empty gold set");
  const std::size_t n = std::min(k, ranking.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.count(ranking.entries[i].passage_id)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

double ndcg_at_k(const RankedList& ranking, const std::set<std::string>& gold,
                 std::size_t k) {
  if (gold.empty()) throw EmptyGold("ndcg_at_k: empty gold set");
  const std::size_t n = std::min(k, ranking.entries.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.count(ranking.entries[i].passage_id)) {
      dcg += 1.0 / std::log2(static_cast<double>(i + 1) + 1.0);
    }
  }
  const std::size_t ideal_positions = std::min(gold.size(), k);
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_positions; ++i) {
    idcg += 1.0 / std::log2(static_cast<double>(i + 1) + 1.0);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

RougeScore rouge_l(const std::string& candidate,
                   const std::string& reference) {
  auto cand = text::split_whitespace(text::lowercase(candidate));
  auto ref = text::split_whitespace(text::lowercase(reference));
  if (cand.empty() || ref.empty()) return {};

  // Classic LCS DP, rolling rows.
  std::vector<std::size_t> prev(ref.size() + 1, 0);
  std::vector<std::size_t> cur(ref.size() + 1, 0);
  for (std::size_t i = 1; i <= cand.size(); ++i) {
    for (std::size_t j = 1; j <= ref.size(); ++j) {
      if (cand[i - 1] == ref[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  const double lcs = static_cast<double>(prev[ref.size()]);

  RougeScore score;
  score.precision = lcs / static_cast<double>(cand.size());
  score.recall = lcs / static_cast<double>(ref.size());
  score.f1 = (score.precision + score.recall) > 0.0
                 ? 2.0 * score.precision * score.recall /
                       (score.precision + score.recall)
                 : 0.0;
  return score;
}

double harmonic_mean(const std::vector<double>& values) {
  if (values.empty()) throw EmptyInput("harmonic_mean: no values");
  double denom = 0.0;
  for (double v : values) {
    if (v == 0.0) return 0.0;
    denom += 1.0 / v;
  }
  return static_cast<double>(values.size()) / denom;
}

double paired_bootstrap(const std::vector<double>& scores_a,
                        const std::vector<double>& scores_b,
                        std::size_t iterations, std::uint64_t seed) {
  if (scores_a.size() != scores_b.size()) {
    throw LengthMismatch("paired_bootstrap: length mismatch");
  }
  const std::size_t n = scores_a.size();
  if (n < 2) throw LengthMismatch("paired_bootstrap: need at least 2 pairs");

  std::vector<double> diffs(n);
  for (std::size_t i = 0; i < n; ++i) diffs[i] = scores_a[i] - scores_b[i];

  // Raw engine output keeps resampling identical across platforms; the
  // modulo bias is immaterial at these sizes.
  std::mt19937_64 rng(seed);
  std::size_t at_or_below_zero = 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += diffs[rng() % n];
    }
    if (sum <= 0.0) ++at_or_below_zero;
  }
  return static_cast<double>(at_or_below_zero) /
         static_cast<double>(iterations);
}

std::string MetricReport::to_json_string(int indent) const {
  json report;
  report["evaluated_turns"] = evaluated_turns;
  report["macro"] = macro;
  if (!per_domain.empty()) report["per_domain"] = per_domain;
  if (!significance.empty()) report["significance"] = significance;
  json turns = json::object();
  for (const auto& [metric, values] : per_turn) {
    turns[metric] = values;
  }
  report["per_turn"] = turns;
  return report.dump(indent);
}

std::string MetricReport::to_text() const {
  std::ostringstream out;
  out << "evaluated turns: " << evaluated_turns << '\n';
  out << "macro means:\n";
  for (const auto& [metric, value] : macro) {
    out << "  " << metric;
    for (std::size_t pad = metric.size(); pad < 16; ++pad) out << ' ';
    out << text::format_fixed(value, 4) << '\n';
  }
  if (!per_domain.empty()) {
    out << "per-domain means:\n";
    for (const auto& [metric, by_domain] : per_domain) {
      out << "  " << metric << ":\n";
      for (const auto& [domain, value] : by_domain) {
        out << "    " << domain;
        for (std::size_t pad = domain.size(); pad < 8; ++pad) out << ' ';
        out << text::format_fixed(value, 4) << '\n';
      }
    }
  }
  for (const auto& [label, p] : significance) {
    out << "significance " << label << ": p=" << text::format_fixed(p, 4)
        << '\n';
  }
  return out.str();
}

}  // namespace convrag
