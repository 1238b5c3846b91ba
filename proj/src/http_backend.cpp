#include "lrl/http_backend.hpp"

#include <cstdlib>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lrl/error.hpp"

namespace lrl {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendOptions opts) : opts_(std::move(opts)) {
  const auto& url = opts_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || !(url.starts_with("http://") || url.starts_with("https://"))) {
    throw ConfigError("backend URL must start with http:// or https://: '" + url + "'");
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  origin_ = path_begin == std::string::npos ? url : url.substr(0, path_begin);
  path_prefix_ = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (opts_.model.empty()) throw ConfigError("backend model name is required");
  if (opts_.api_key.empty()) {
    if (const char* k = std::getenv("LRL_API_KEY")) {
      opts_.api_key = k;
    } else if (const char* k2 = std::getenv("OPENAI_API_KEY")) {
      opts_.api_key = k2;
    }
  }
}

std::string HttpBackend::identity() const { return "http:" + opts_.base_url + "#" + opts_.model; }

std::string HttpBackend::post(const std::string& endpoint, const std::string& body, std::string& request_id) const {
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(opts_.timeout_seconds);
  client.set_connection_timeout(std::min<time_t>(secs, 30));
  client.set_read_timeout(secs);
  client.set_write_timeout(secs);
  httplib::Headers headers;
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);
  auto res = client.Post(path_prefix_ + endpoint, headers, body, "application/json");
  if (!res) {
    throw BackendUnreachable("cannot reach " + origin_ + path_prefix_ + endpoint + ": " +
                                 httplib::to_string(res.error()),
                             "");
  }
  request_id = res->get_header_value("x-request-id");
  if (request_id.empty()) {
    try {
      const auto j = json::parse(res->body);
      if (j.is_object() && j.contains("id") && j.at("id").is_string()) request_id = j.at("id").get<std::string>();
    } catch (const json::exception&) {
    }
  }
  if (res->status != 200) {
    const bool transient = res->status == 408 || res->status == 429 || res->status >= 500;
    throw BackendError("HTTP " + std::to_string(res->status) + " from " + endpoint + ": " + res->body.substr(0, 300),
                       request_id, transient);
  }
  return res->body;
}

std::string HttpBackend::generate(const std::string& prompt, int max_tokens) {
  json req = {{"model", opts_.model}, {"max_tokens", max_tokens}, {"temperature", 0}};
  std::string endpoint;
  if (opts_.chat) {
    req["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    endpoint = "/chat/completions";
  } else {
    req["prompt"] = prompt;
    endpoint = "/completions";
  }
  std::string request_id;
  const auto body = post(endpoint, req.dump(), request_id);
  try {
    const auto j = json::parse(body);
    const auto& choice = j.at("choices").at(0);
    if (opts_.chat) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected generation response: ") + e.what(), request_id, false);
  }
}

ScoreResult HttpBackend::score(const std::string& text) {
  json req = {{"model", opts_.model}, {"prompt", text},        {"max_tokens", opts_.score_max_tokens},
              {"echo", true},         {"logprobs", 1},         {"temperature", 0}};
  std::string request_id;
  const auto body = post("/completions", req.dump(), request_id);
  ScoreResult out;
  try {
    const auto j = json::parse(body);
    const auto& lp = j.at("choices").at(0).at("logprobs");
    if (lp.is_null()) throw BackendError("endpoint returned no logprobs for echo scoring", request_id, false);
    const auto& values = lp.at("token_logprobs");
    const json* offsets = lp.contains("text_offset") ? &lp.at("text_offset") : nullptr;
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (offsets && k < offsets->size() && (*offsets)[k].get<std::size_t>() >= text.size()) break;
      if (values[k].is_null()) continue;  // first token has no context
      out.token_logprobs.push_back(values[k].get<double>());
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("unexpected scoring response: ") + e.what(), request_id, false);
  }
  if (out.token_logprobs.empty()) throw BackendError("scoring returned no token log-probabilities", request_id, false);
  for (double v : out.token_logprobs) out.nll -= v;
  return out;
}

}  // namespace lrl
