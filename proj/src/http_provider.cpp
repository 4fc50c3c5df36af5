#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "tkgf/pllm_client.hpp"

namespace tkgf {

HttpProvider::HttpProvider(std::string endpoint, std::string token, double timeout_seconds)
    : endpoint_(std::move(endpoint)), token_(std::move(token)), timeout_seconds_(timeout_seconds) {}

std::unique_ptr<HttpProvider> HttpProvider::from_environment(double timeout_seconds) {
  const char* endpoint = std::getenv("TKGF_PLLM_ENDPOINT");
  if (!endpoint || !*endpoint)
    throw PllmError(PllmErrorKind::unavailable, "provider unavailable: TKGF_PLLM_ENDPOINT is not set");
  const char* token = std::getenv("TKGF_PLLM_TOKEN");
  return std::make_unique<HttpProvider>(endpoint, token ? token : "", timeout_seconds);
}

PLLMResponse HttpProvider::complete(const PLLMRequest& request) {
  // Split "http://host:port/path" into the client base and the request path.
  const auto scheme_end = endpoint_.find("://");
  const auto path_start = endpoint_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : endpoint_.substr(path_start);

  httplib::Client client(base);
  const auto secs = static_cast<time_t>(timeout_seconds_);
  const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const nlohmann::json body{{"model", request.model_name},
                            {"prompt", request.prompt},
                            {"top_p", request.top_p},
                            {"temperature", request.temperature},
                            {"max_tokens", request.max_tokens}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout)
      throw PllmError(PllmErrorKind::timeout, "PLLM request timed out: " + httplib::to_string(err));
    throw PllmError(PllmErrorKind::unavailable, "PLLM endpoint unreachable: " + httplib::to_string(err));
  }
  if (res->status != 200)
    throw PllmError(PllmErrorKind::provider_error, "PLLM endpoint returned HTTP " + std::to_string(res->status));
  try {
    const auto j = nlohmann::json::parse(res->body);
    PLLMResponse out;
    out.text = j.at("text").get<std::string>();
    out.provider_meta["status"] = std::to_string(res->status);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw PllmError(PllmErrorKind::provider_error, std::string("malformed PLLM response: ") + e.what());
  }
}

}  // namespace tkgf
