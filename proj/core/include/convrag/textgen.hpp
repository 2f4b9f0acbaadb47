#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace convrag {

// Pipeline roles. Each role is bound to a backend; model identities are
// opaque configuration strings.
enum class GenRole {
  kRewriter,
  kSpanExtractor,
  kGenerator,
  kTechnicalJudge,
  kUserJudge,
  kMicroEditor,
  kGateJudge,
  kArbiter,
  kTriage,
};

std::string to_string(GenRole role);
std::optional<GenRole> gen_role_from_string(std::string_view s);

struct GenRequest {
  GenRole role = GenRole::kGenerator;
  std::string system_message;
  std::string prompt;
  double temperature = 0.0;  // clamped to [0, 2] on dispatch
  std::size_t max_attempts = 5;
};

// A text-generation backend. Implementations throw TransientBackendError for
// retryable transport failures; anything else propagates immediately.
class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual std::string complete(const GenRequest& request) = 0;
};

// Deterministic backend for desk-scale runs. Rules are matched in order;
// a rule fires when its role filter (if any) matches and either the exact
// FNV-1a prompt hash or a substring of the prompt matches.
class ScriptedBackend : public TextBackend {
 public:
  struct Rule {
    std::optional<GenRole> role;
    std::optional<std::string> prompt_hash;  // fnv1a_hex of the full prompt
    std::optional<std::string> contains;     // substring of the prompt
    std::string response;
  };

  explicit ScriptedBackend(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  // Throws ScriptMiss when no rule matches (an incomplete test script).
  std::string complete(const GenRequest& request) override;

 private:
  std::vector<Rule> rules_;
};

// Remote backend speaking the engine's generation contract:
//   POST endpoint {"model","system","prompt","temperature"} -> {"text"}
// The API key (if any) is read from `api_key_env` and sent as a bearer token.
class RemoteBackend : public TextBackend {
 public:
  RemoteBackend(std::string endpoint, std::string model,
                std::string api_key_env = "");
  std::string complete(const GenRequest& request) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_env_;
};

struct RetryPolicy {
  double base_seconds = 0.5;
  double factor = 2.0;
  bool jitter = true;
  std::uint64_t jitter_seed = 0;  // 0: nondeterministic seed
  // Test hook; defaults to a real sleep.
  std::function<void(std::chrono::duration<double>)> sleep_fn;
};

// Un-jittered delay before retrying after `attempt` failures (attempt >= 1):
// base * factor^(attempt-1). Full jitter scales this by U(0,1].
double backoff_delay_seconds(std::size_t attempt, double base_seconds,
                             double factor);

// Maps roles to backends plus the opaque model name reported to remotes.
class BackendRoutingTable {
 public:
  void bind(GenRole role, std::shared_ptr<TextBackend> backend);
  TextBackend& backend_for(GenRole role) const;  // throws RoleUnbound
  bool is_bound(GenRole role) const;

 private:
  std::map<GenRole, std::shared_ptr<TextBackend>> bindings_;
};

// Dispatches a request through the routing table, retrying transient
// failures with exponential backoff until max_attempts is exhausted.
// Throws RoleUnbound or BackendExhausted.
std::string generate(const GenRequest& request,
                     const BackendRoutingTable& table,
                     const RetryPolicy& policy = RetryPolicy{});

}  // namespace convrag
