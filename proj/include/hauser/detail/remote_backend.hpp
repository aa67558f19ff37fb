#pragma once

#include <chrono>

#include "hauser/classifier.hpp"
#include "httplib.h"

namespace hauser {

inline RemoteBackend::RemoteBackend(BackendConfig cfg) : cfg_(std::move(cfg)), gate_(cfg_.max_in_flight) {
  cfg_.validate();
}

inline RemoteBackend::~RemoteBackend() = default;

inline nlohmann::json RemoteBackend::call(const std::string& method, const std::string& path,
                                          const nlohmann::json* body) {
  using Kind = gateway_error::Kind;
  detail::InFlightGate::Slot slot(gate_);
  httplib::Client client(cfg_.endpoint);
  const auto sec = cfg_.timeout_ms / 1000;
  const auto usec = (cfg_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const auto t0 = std::chrono::steady_clock::now();
  httplib::Result res = method == "GET"
                            ? client.Get(path)
                            : client.Post(path, body->dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && elapsed >= cfg_.timeout_ms * 9 / 10);
    throw gateway_error(timed_out ? Kind::timeout : Kind::transport,
                        path + ": " + httplib::to_string(err));
  }
  if (res->status != 200) {
    std::string msg = "HTTP " + std::to_string(res->status);
    try {
      auto j = nlohmann::json::parse(res->body);
      if (j.contains("error") && j["error"].is_string()) msg += ": " + j["error"].get<std::string>();
    } catch (const std::exception&) {
    }
    throw gateway_error(Kind::server, path + ": " + msg, res->status);
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    if (!j.is_object()) throw std::runtime_error("response is not a JSON object");
    return j;
  } catch (const std::exception& e) {
    throw gateway_error(Kind::malformed_response, path + ": " + e.what());
  }
}

namespace detail {

inline double probability_field(const nlohmann::json& j, const char* name, const std::string& path) {
  if (!j.contains(name) || !j[name].is_number()) {
    throw gateway_error(gateway_error::Kind::malformed_response,
                        path + ": missing numeric field '" + name + "'");
  }
  return j[name].get<double>();
}

}  // namespace detail

inline NliDistribution RemoteBackend::nli(const std::string& premise, const std::string& hypothesis) {
  const nlohmann::json body{{"premise", premise}, {"hypothesis", hypothesis}};
  const auto j = call("POST", "/v1/nli", &body);
  NliDistribution d{detail::probability_field(j, "entailment", "/v1/nli"),
                    detail::probability_field(j, "neutral", "/v1/nli"),
                    detail::probability_field(j, "contradiction", "/v1/nli")};
  if (!d.valid()) {
    throw gateway_error(gateway_error::Kind::malformed_response, "/v1/nli: not a probability distribution");
  }
  return d;
}

inline SentimentDistribution RemoteBackend::sentiment(const std::string& text) {
  const nlohmann::json body{{"text", text}};
  const auto j = call("POST", "/v1/sentiment", &body);
  SentimentDistribution d{detail::probability_field(j, "positive", "/v1/sentiment"),
                          detail::probability_field(j, "negative", "/v1/sentiment")};
  if (!d.valid()) {
    throw gateway_error(gateway_error::Kind::malformed_response,
                        "/v1/sentiment: not a probability distribution");
  }
  return d;
}

inline ModelIds RemoteBackend::model_ids() {
  const auto j = call("GET", "/v1/health", nullptr);
  if (!j.contains("nli_model") || !j["nli_model"].is_string() || !j.contains("sentiment_model") ||
      !j["sentiment_model"].is_string()) {
    throw gateway_error(gateway_error::Kind::malformed_response, "/v1/health: missing model ids");
  }
  return {j["nli_model"].get<std::string>(), j["sentiment_model"].get<std::string>()};
}

}  // namespace hauser
