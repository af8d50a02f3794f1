#ifndef FEATNORM_HTTP_BACKEND_HPP
#define FEATNORM_HTTP_BACKEND_HPP

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "featnorm/elicitation.hpp"
#include "featnorm/rng.hpp"

namespace featnorm {

struct HttpBackendConfig {
  std::string endpoint;         // e.g. https://api.example.com/v1/completions
  std::string api_key_env = "FEATNORM_API_KEY";
  int max_attempts = 5;
  double initial_backoff_s = 1.0;  // doubles per attempt, with jitter
  double requests_per_minute = 60.0;
};

// Live text-completion client: POSTs OpenAI-style completion requests,
// retries with exponential backoff and jitter, and enforces a global
// requests-per-minute cap across worker threads.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config)
      : config_(std::move(config)), jitter_(0x9d2c5680u) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    api_key_ = key ? key : "";
    auto scheme_end = config_.endpoint.find("://");
    if (scheme_end == std::string::npos)
      throw ArgError("endpoint must include scheme: " + config_.endpoint);
    auto path_start = config_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = config_.endpoint;
      path_ = "/";
    } else {
      base_ = config_.endpoint.substr(0, path_start);
      path_ = config_.endpoint.substr(path_start);
    }
  }

  std::string complete(const std::string& prompt, const CompletionParams& params) override {
    nlohmann::json body = {
        {"model", params.model},
        {"prompt", prompt},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
      if (attempt > 0) backoff(attempt);
      throttle();
      httplib::Client client(base_);
      client.set_connection_timeout(30);
      client.set_read_timeout(120);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      auto res = client.Post(path_, headers, payload, "application/json");
      if (!res) {
        last_error = "connection failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 429 || res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw BackendError("completion request failed with HTTP " +
                           std::to_string(res->status) + ": " + res->body.substr(0, 200));
      try {
        auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("unexpected completion response: ") + e.what());
      }
    }
    throw BackendError("completion request failed after " +
                       std::to_string(config_.max_attempts) + " attempts; last error: " +
                       last_error);
  }

 private:
  void throttle() {
    if (config_.requests_per_minute <= 0) return;
    const auto interval =
        std::chrono::duration<double>(60.0 / config_.requests_per_minute);
    std::unique_lock<std::mutex> lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    if (have_last_ && now < last_request_ + interval) {
      const auto wake = last_request_ + interval;
      lock.unlock();
      std::this_thread::sleep_until(wake);
      lock.lock();
    }
    last_request_ = std::chrono::steady_clock::now();
    have_last_ = true;
  }

  void backoff(int attempt) {
    double delay = config_.initial_backoff_s;
    for (int i = 1; i < attempt; ++i) delay *= 2.0;
    double jitter;
    {
      std::lock_guard<std::mutex> lock(mu_);
      jitter = jitter_.uniform01() * 0.5 * delay;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(delay + jitter));
  }

  HttpBackendConfig config_;
  std::string api_key_;
  std::string base_;
  std::string path_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point last_request_;
  bool have_last_ = false;
  Rng jitter_;
};

}  // namespace featnorm

#endif
