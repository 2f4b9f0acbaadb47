#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag::detail {

// Finds the first balanced-brace region that parses as a JSON object,
// tolerating code fences and surrounding prose. Models rarely return the
// bare object the prompts ask for. Throws UnparseableOutput.
inline nlohmann::json first_json_object(std::string_view raw) {
  std::string cleaned = text::replace_all(std::string(raw), "```json", "\n");
  cleaned = text::replace_all(cleaned, "```JSON", "\n");
  cleaned = text::replace_all(cleaned, "```", "\n");

  std::size_t start = cleaned.find('{');
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < cleaned.size(); ++i) {
      char c = cleaned[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          auto parsed = nlohmann::json::parse(
              cleaned.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) return parsed;
          break;  // balanced but malformed; try the next '{'
        }
      }
    }
    start = cleaned.find('{', start + 1);
  }
  throw UnparseableOutput("no JSON object found in model output");
}

}  // namespace convrag::detail
