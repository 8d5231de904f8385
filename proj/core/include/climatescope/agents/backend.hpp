#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include "climatescope/agents/evidence_store.hpp"
#include "climatescope/agents/message.hpp"
#include "climatescope/agents/planning.hpp"
#include "climatescope/agents/registry.hpp"

namespace climatescope::agents {

/// Produces the next message for `agent`. The pipeline assigns seq, sender
/// and step id; a backend only fills kind, body, artifacts and error.
/// Failures are reported by throwing BackendError.
class ReasoningBackend {
 public:
  virtual ~ReasoningBackend() = default;
  virtual std::string name() const = 0;
  virtual Message respond(const AgentProfile& agent, const Transcript& transcript,
                          const Plan& plan) = 0;
};

/// Message kind an agent posts at this point of the transcript.
MessageKind expected_kind(const AgentProfile& agent, const Transcript& transcript,
                          const Plan& plan);

/// Deterministic templates keyed on the current plan step and the agent's
/// capability. Tool artifacts are summarized verbatim.
class RuleBackend final : public ReasoningBackend {
 public:
  explicit RuleBackend(EvidenceStore evidence = {});

  std::string name() const override { return "rules"; }
  Message respond(const AgentProfile& agent, const Transcript& transcript,
                  const Plan& plan) override;

  const EvidenceStore& evidence() const noexcept { return evidence_; }

 private:
  EvidenceStore evidence_;
};

inline constexpr const char* kDefaultCredentialVariable = "CLIMATESCOPE_API_KEY";

struct HttpBackendConfig {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model = "gpt-4o";
  std::string credential_variable = kDefaultCredentialVariable;
  std::chrono::milliseconds timeout{30000};
  std::size_t window = 12;  // most recent messages sent as context
};

/// Chat-completion client. The credential is read from the environment
/// variable named in the config; ConfigError is raised at construction when
/// it is unset or the endpoint is malformed, before any request is made.
class HttpBackend final : public ReasoningBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  std::string name() const override { return "http"; }
  Message respond(const AgentProfile& agent, const Transcript& transcript,
                  const Plan& plan) override;

  /// Request body for one turn; exposed for testing.
  std::string request_body(const AgentProfile& agent, const Transcript& transcript,
                           const Plan& plan) const;

 private:
  struct Impl;
  HttpBackendConfig config_;
  std::unique_ptr<Impl> impl_;
};

/// Number of outbound requests attempted by any HttpBackend in this process.
std::size_t network_request_count() noexcept;

}  // namespace climatescope::agents
