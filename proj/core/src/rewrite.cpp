#include "convrag/rewrite.hpp"

#include <algorithm>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"
#include "json_scan.hpp"

namespace convrag {

using nlohmann::json;

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kMinimal: return "minimal";
    case StrategyKind::kCorpusSpecific: return "corpus_specific";
    case StrategyKind::kCot: return "cot";
    case StrategyKind::kHyde: return "hyde";
    case StrategyKind::kAnchorKeyword: return "anchor_keyword";
  }
  return "minimal";
}

std::size_t agent_turns_for(StrategyKind kind, Corpus corpus) {
  switch (kind) {
    case StrategyKind::kMinimal:
    case StrategyKind::kCot:
    case StrategyKind::kHyde:
      return 3;
    case StrategyKind::kCorpusSpecific:
      return corpus == Corpus::kFiqa ? 0 : 3;
    case StrategyKind::kAnchorKeyword:
      return 1;
  }
  return 3;
}

namespace {

std::string template_key_for(StrategyKind strategy, Corpus corpus) {
  switch (strategy) {
    case StrategyKind::kMinimal:
      return prompt_keys::kMinimal;
    case StrategyKind::kCot:
      return prompt_keys::kCot;
    case StrategyKind::kHyde:
      return prompt_keys::kHyde;
    case StrategyKind::kAnchorKeyword:
      return prompt_keys::kAnchorKeyword;
    case StrategyKind::kCorpusSpecific:
      switch (corpus) {
        case Corpus::kClapNq: return prompt_keys::kCorpusSpecificClapNq;
        case Corpus::kFiqa: return prompt_keys::kCorpusSpecificFiqa;
        case Corpus::kGovt: return prompt_keys::kCorpusSpecificGovt;
        case Corpus::kCloud: return prompt_keys::kCorpusSpecificCloud;
      }
      throw UnknownCorpus("corpus_specific: unrecognized corpus");
  }
  throw Error("unknown rewrite strategy");
}

std::vector<std::string> string_array(const json& obj, const char* field,
                                      std::size_t cap) {
  std::vector<std::string> out;
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_array()) return out;
  for (const auto& item : *it) {
    if (!item.is_string()) continue;
    out.push_back(item.get<std::string>());
    if (out.size() == cap) break;
  }
  return out;
}

}  // namespace

RenderedPrompt build_prompt(StrategyKind strategy,
                            const Conversation& conversation,
                            const PromptLibrary& prompts) {
  const auto key = template_key_for(strategy, conversation.corpus);
  const PromptTemplate tpl = prompts.get(key);

  auto window = history_window(
      conversation, kRewriteUserTurns,
      agent_turns_for(strategy, conversation.corpus));

  RenderedPrompt out;
  out.system_message = tpl.system_message;
  out.prompt = render_template(
      tpl.body, {{"history", render_history_lines(window)},
                 {"question", conversation.current_query().text}});
  return out;
}

RewriteResult parse_rewrite(StrategyKind strategy,
                            std::string_view raw_model_output) {
  json obj = detail::first_json_object(raw_model_output);

  RewriteResult result;
  result.strategy = strategy;

  if (auto it = obj.find("class"); it != obj.end() && it->is_string()) {
    result.standalone_class = it->get<std::string>() == "standalone"
                                  ? StandaloneClass::kStandalone
                                  : StandaloneClass::kNonStandalone;
  }

  const char* rewrite_field =
      strategy == StrategyKind::kHyde ? "standalone_query" : "rewritten version";
  auto rewritten = obj.find(rewrite_field);
  if (rewritten == obj.end() || !rewritten->is_string() ||
      text::trim(rewritten->get<std::string>()).empty()) {
    throw MissingField(std::string("rewrite output lacks field: ") +
                       rewrite_field);
  }
  result.rewritten = rewritten->get<std::string>();

  if (strategy == StrategyKind::kHyde) {
    if (auto it = obj.find("hypothetical_passage");
        it != obj.end() && it->is_string()) {
      result.hypothetical_passage = it->get<std::string>();
    }
  }
  if (strategy == StrategyKind::kCot) {
    if (auto it = obj.find("reasoning"); it != obj.end() && it->is_string()) {
      result.reasoning = it->get<std::string>();
    }
  }
  if (strategy == StrategyKind::kAnchorKeyword) {
    result.anchors = string_array(obj, "anchors", kMaxAnchors);
    result.keywords = string_array(obj, "keywords", kMaxKeywords);
  }
  return result;
}

std::string serialize_rewrite(const RewriteResult& result) {
  json obj;
  obj["class"] = result.standalone_class == StandaloneClass::kStandalone
                     ? "standalone"
                     : "non-standalone";
  if (result.strategy == StrategyKind::kHyde) {
    obj["standalone_query"] = result.rewritten;
    obj["hypothetical_passage"] = result.hypothetical_passage;
  } else {
    obj["rewritten version"] = result.rewritten;
  }
  if (result.strategy == StrategyKind::kCot) {
    obj["reasoning"] = result.reasoning;
  }
  if (result.strategy == StrategyKind::kAnchorKeyword) {
    obj["anchors"] = result.anchors;
    obj["keywords"] = result.keywords;
  }
  return obj.dump();
}

std::string assemble_query(const RewriteResult& result,
                           std::string_view original_query) {
  const std::string rewrite = text::trim(result.rewritten.empty()
                                             ? std::string(original_query)
                                             : result.rewritten);
  switch (result.strategy) {
    case StrategyKind::kMinimal:
    case StrategyKind::kCorpusSpecific:
    case StrategyKind::kCot:
      return rewrite;
    case StrategyKind::kHyde: {
      auto passage = text::trim(result.hypothetical_passage);
      if (passage.empty()) return rewrite;
      return rewrite + " " + passage;
    }
    case StrategyKind::kAnchorKeyword: {
      // Priority under the 28-word cap: rewrite, then anchors, then keywords.
      std::string combined = rewrite;
      auto append_all = [&combined](const std::vector<std::string>& items) {
        for (const auto& item : items) {
          auto trimmed = text::trim(item);
          if (trimmed.empty()) continue;
          if (!combined.empty()) combined += ' ';
          combined += trimmed;
        }
      };
      append_all(result.anchors);
      append_all(result.keywords);
      return text::truncate_words(combined, kAnchorQueryMaxWords);
    }
  }
  return rewrite;
}

}  // namespace convrag
