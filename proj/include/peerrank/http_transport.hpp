#pragma once

// Live chat-completion transport. Kept out of gateway.hpp so the test
// suite never compiles (or accidentally exercises) network code; only the
// CLI's `collect --live` path includes this header.

#include <cstdlib>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "peerrank/gateway.hpp"

namespace peerrank {

/// POSTs a single-user-message chat completion to
/// {base_url}{path} with body {model, messages, temperature} and reads
/// choices[0].message.content. The bearer token is read from the
/// environment variable named in the endpoint config at send time and is
/// never written to any artifact.
class HttpTransport : public Transport {
 public:
  TransportResult send(const EndpointConfig& endpoint, const std::string&,
                       const std::string& prompt) override {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(static_cast<int>(endpoint.timeout_s), 0);
    client.set_read_timeout(static_cast<int>(endpoint.timeout_s), 0);

    httplib::Headers headers;
    if (!endpoint.credential_env.empty()) {
      const char* token = std::getenv(endpoint.credential_env.c_str());
      if (!token)
        return {false, "",
                "credential variable " + endpoint.credential_env + " is unset",
                false};
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    nlohmann::ordered_json body;
    body["model"] = endpoint.model;
    body["messages"] =
        nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = endpoint.temperature;

    auto res = client.Post(endpoint.path, headers, body.dump(),
                           "application/json");
    if (!res)
      return {false, "", "connection to " + endpoint.base_url + " failed",
              true};
    if (res->status == 429 || res->status >= 500)
      return {false, "", "HTTP " + std::to_string(res->status), true};
    if (res->status != 200)
      return {false, "", "HTTP " + std::to_string(res->status), false};
    try {
      auto j = nlohmann::ordered_json::parse(res->body);
      return {true, j.at("choices").at(0).at("message").at("content")
                        .get<std::string>(),
              "", false};
    } catch (const nlohmann::json::exception& e) {
      return {false, "", std::string("unexpected response shape: ") + e.what(),
              false};
    }
  }
};

}  // namespace peerrank
