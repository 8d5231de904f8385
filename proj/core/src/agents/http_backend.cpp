#include <atomic>
#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "climatescope/agents/backend.hpp"
#include "climatescope/error.hpp"

namespace climatescope::agents {

namespace {

std::atomic<std::size_t> g_requests{0};

std::string_view role_of(int sender) { return sender == kUser ? "user" : "assistant"; }

}  // namespace

std::size_t network_request_count() noexcept { return g_requests.load(); }

struct HttpBackend::Impl {
  std::string credential;
  std::string path;
  std::unique_ptr<httplib::Client> client;
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  static const std::regex url(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(:[0-9]{1,5})?(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw ConfigError(fmt::format("malformed endpoint '{}'", config_.endpoint));
  }
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (m[1] == "https") {
    throw ConfigError("this build has no TLS support; use an http:// endpoint");
  }
#endif
  if (config_.credential_variable.empty()) {
    throw ConfigError("credential environment variable name is empty");
  }
  const char* credential = std::getenv(config_.credential_variable.c_str());
  if (credential == nullptr || *credential == '\0') {
    throw ConfigError(
        fmt::format("credential variable {} is not set", config_.credential_variable));
  }
  if (config_.timeout.count() <= 0) {
    throw ConfigError("backend timeout must be positive");
  }
  impl_->credential = credential;
  impl_->path = m[4].matched ? m[4].str() : "/v1/chat/completions";
  impl_->client = std::make_unique<httplib::Client>(m[1].str() + "://" + m[2].str() + m[3].str());
  impl_->client->set_connection_timeout(config_.timeout);
  impl_->client->set_read_timeout(config_.timeout);
  impl_->client->set_write_timeout(config_.timeout);
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::request_body(const AgentProfile& agent, const Transcript& transcript,
                                      const Plan& plan) const {
  nlohmann::json messages = nlohmann::json::array();
  std::string system = fmt::format("You are {} ({}). {}", agent.name, agent.agent_class,
                                   agent.role_description);
  system += fmt::format(" Reply with the body of a '{}' message.",
                        to_string(expected_kind(agent, transcript, plan)));
  messages.push_back({{"role", "system"}, {"content", system}});
  const auto& all = transcript.messages;
  const std::size_t first = all.size() > config_.window ? all.size() - config_.window : 0;
  for (std::size_t i = first; i < all.size(); ++i) {
    const auto& msg = all[i];
    messages.push_back({{"role", role_of(msg.sender)},
                        {"content", fmt::format("[agent {} | {}] {}", msg.sender,
                                                to_string(msg.kind), msg.body)}});
  }
  nlohmann::json body = {{"model", config_.model}, {"messages", messages}, {"temperature", 0}};
  return body.dump();
}

Message HttpBackend::respond(const AgentProfile& agent, const Transcript& transcript,
                             const Plan& plan) {
  const auto body = request_body(agent, transcript, plan);
  const httplib::Headers headers{{"Authorization", "Bearer " + impl_->credential}};
  ++g_requests;
  const auto res = impl_->client->Post(impl_->path, headers, body, "application/json");
  if (!res) {
    throw BackendError(fmt::format("request to {} failed: {}", config_.endpoint,
                                   httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(fmt::format("backend returned HTTP {}", res->status));
  }
  std::string content;
  try {
    const auto reply = nlohmann::json::parse(res->body);
    content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(fmt::format("malformed backend reply: {}", e.what()));
  }
  return {0, 0, expected_kind(agent, transcript, plan), {}, std::move(content), {}, false};
}

}  // namespace climatescope::agents
