#include "convrag/textgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "convrag/errors.hpp"
#include "convrag/text.hpp"

namespace convrag {

using nlohmann::json;

std::string to_string(GenRole role) {
  switch (role) {
    case GenRole::kRewriter: return "rewriter";
    case GenRole::kSpanExtractor: return "span_extractor";
    case GenRole::kGenerator: return "generator";
    case GenRole::kTechnicalJudge: return "technical_judge";
    case GenRole::kUserJudge: return "user_judge";
    case GenRole::kMicroEditor: return "micro_editor";
    case GenRole::kGateJudge: return "gate_judge";
    case GenRole::kArbiter: return "arbiter";
    case GenRole::kTriage: return "triage";
  }
  return "generator";
}

std::optional<GenRole> gen_role_from_string(std::string_view s) {
  if (s == "rewriter") return GenRole::kRewriter;
  if (s == "span_extractor") return GenRole::kSpanExtractor;
  if (s == "generator") return GenRole::kGenerator;
  if (s == "technical_judge") return GenRole::kTechnicalJudge;
  if (s == "user_judge") return GenRole::kUserJudge;
  if (s == "micro_editor") return GenRole::kMicroEditor;
  if (s == "gate_judge") return GenRole::kGateJudge;
  if (s == "arbiter") return GenRole::kArbiter;
  if (s == "triage") return GenRole::kTriage;
  return std::nullopt;
}

std::string ScriptedBackend::complete(const GenRequest& request) {
  for (const auto& rule : rules_) {
    if (rule.role && *rule.role != request.role) continue;
    if (rule.prompt_hash) {
      if (text::fnv1a_hex(request.prompt) != *rule.prompt_hash) continue;
    }
    if (rule.contains) {
      if (request.prompt.find(*rule.contains) == std::string::npos) continue;
    }
    return rule.response;
  }
  auto preview = request.prompt.substr(0, 80);
  throw ScriptMiss("no scripted rule for role " + to_string(request.role) +
                   ", prompt: " + preview);
}

RemoteBackend::RemoteBackend(std::string endpoint, std::string model,
                             std::string api_key_env)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_env_(std::move(api_key_env)) {}

std::string RemoteBackend::complete(const GenRequest& request) {
  std::string host = endpoint_;
  std::string path = "/";
  std::size_t scheme = host.find("://");
  std::size_t path_start = host.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start != std::string::npos) {
    path = host.substr(path_start);
    host = host.substr(0, path_start);
  }

  httplib::Client client(host);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(120, 0);
  if (!api_key_env_.empty()) {
    if (const char* key = std::getenv(api_key_env_.c_str())) {
      client.set_default_headers(
          {{"Authorization", std::string("Bearer ") + key}});
    }
  }

  json body = {{"model", model_},
               {"system", request.system_message},
               {"prompt", request.prompt},
               {"temperature", std::clamp(request.temperature, 0.0, 2.0)}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res || res->status >= 500) {
    throw TransientBackendError("generation endpoint unavailable: " + endpoint_);
  }
  if (res->status != 200) {
    throw BackendUnavailable("generation endpoint returned status " +
                             std::to_string(res->status));
  }
  json parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("text") ||
      !parsed["text"].is_string()) {
    throw BackendUnavailable("generation endpoint returned malformed body");
  }
  return parsed["text"].get<std::string>();
}

double backoff_delay_seconds(std::size_t attempt, double base_seconds,
                             double factor) {
  if (attempt == 0) return 0.0;
  return base_seconds * std::pow(factor, static_cast<double>(attempt - 1));
}

void BackendRoutingTable::bind(GenRole role,
                               std::shared_ptr<TextBackend> backend) {
  bindings_[role] = std::move(backend);
}

TextBackend& BackendRoutingTable::backend_for(GenRole role) const {
  auto it = bindings_.find(role);
  if (it == bindings_.end() || !it->second) {
    throw RoleUnbound("no backend bound for role " + to_string(role));
  }
  return *it->second;
}

bool BackendRoutingTable::is_bound(GenRole role) const {
  auto it = bindings_.find(role);
  return it != bindings_.end() && it->second != nullptr;
}

std::string generate(const GenRequest& request,
                     const BackendRoutingTable& table,
                     const RetryPolicy& policy) {
  TextBackend& backend = table.backend_for(request.role);
  const std::size_t max_attempts = std::max<std::size_t>(request.max_attempts, 1);

  std::mt19937_64 jitter_rng(policy.jitter_seed != 0 ? policy.jitter_seed
                                                     : std::random_device{}());
  std::string last_error;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    try {
      return backend.complete(request);
    } catch (const TransientBackendError& e) {
      last_error = e.what();
      if (attempt == max_attempts) break;
      double delay = backoff_delay_seconds(attempt, policy.base_seconds,
                                           policy.factor);
      if (policy.jitter) {
        // Full jitter: scale by U(0,1], never sleeping a hard zero.
        double u = (static_cast<double>(jitter_rng()) + 1.0) /
                   (static_cast<double>(std::mt19937_64::max()) + 1.0);
        delay *= u;
      }
      auto duration = std::chrono::duration<double>(delay);
      if (policy.sleep_fn) {
        policy.sleep_fn(duration);
      } else {
        std::this_thread::sleep_for(duration);
      }
    }
  }
  throw BackendExhausted("backend failed after " +
                         std::to_string(max_attempts) +
                         " attempts: " + last_error);
}

}  // namespace convrag
