#include <fstream>

#include "medxplain/backends.hpp"
#include "medxplain/error.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

using nlohmann::json;

std::string request_hash(std::string_view endpoint, const json& body) {
  // json objects keep keys sorted, so dump() is canonical.
  return util::hex64(util::fnv1a64(body.dump(), util::fnv1a64(endpoint)));
}

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner, std::filesystem::path fixture)
    : inner_(std::move(inner)), fixture_(std::move(fixture)) {
  if (fixture_.has_parent_path()) std::filesystem::create_directories(fixture_.parent_path());
}

json RecordingTransport::post(std::string_view endpoint, const json& body) {
  json response = inner_->post(endpoint, body);
  const json line{{"endpoint", endpoint}, {"request_hash", request_hash(endpoint, body)},
                  {"response", response}};
  std::lock_guard lock(mutex_);
  std::ofstream out(fixture_, std::ios::app);
  if (!out) throw BackendUnavailable("cannot append to fixture " + fixture_.string());
  out << line.dump() << '\n';
  return response;
}

ReplayTransport::ReplayTransport(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw ConfigError("cannot open replay fixture: " + fixture.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("endpoint") || !j.contains("request_hash") ||
        !j.contains("response") || !j["endpoint"].is_string() || !j["request_hash"].is_string()) {
      throw ParseError(fixture.string() + ":" + std::to_string(lineno) + ": malformed fixture line");
    }
    responses_[j["endpoint"].get<std::string>() + " " + j["request_hash"].get<std::string>()] =
        j["response"];
  }
}

json ReplayTransport::post(std::string_view endpoint, const json& body) {
  const auto key = std::string(endpoint) + " " + request_hash(endpoint, body);
  const auto it = responses_.find(key);
  if (it == responses_.end()) {
    throw BackendUnavailable("no recorded response for " + std::string(endpoint) + " request " +
                             request_hash(endpoint, body));
  }
  return it->second;
}

}  // namespace medxplain
