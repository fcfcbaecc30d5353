#include <thread>

#include <httplib.h>

#include "medxplain/backends.hpp"
#include "medxplain/error.hpp"

namespace medxplain {

using nlohmann::json;

HttpTransport::HttpTransport(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.base_url.empty()) throw ConfigError("http endpoint needs a base_url");
}

json HttpTransport::post(std::string_view endpoint, const json& body) {
  const std::string payload = body.dump();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);

  std::string last_error;
  const int attempts = 1 + std::max(0, endpoint_.retry.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(endpoint_.retry.backoff_base * (1LL << (attempt - 1)));
    }
    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!endpoint_.bearer_token.empty()) {
      headers.emplace("Authorization", "Bearer " + endpoint_.bearer_token);
    }

    auto res = client.Post(std::string(endpoint), headers, payload, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    json parsed = json::parse(res->body, nullptr, false);
    if (res->status != 200) {
      std::string msg = "HTTP " + std::to_string(res->status);
      if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
        msg += ": " + parsed["error"].get<std::string>();
      }
      throw BackendUnavailable(std::string(endpoint) + " rejected request: " + msg);
    }
    if (parsed.is_discarded()) {
      throw BackendUnavailable("protocol error: " + std::string(endpoint) + " returned invalid JSON");
    }
    return parsed;
  }
  throw BackendUnavailable(std::string(endpoint) + " unavailable after " + std::to_string(attempts) +
                           " attempts (" + last_error + ")");
}

}  // namespace medxplain
