// SPDX-License-Identifier: Apache-2.0

#include "retro/proposer/proposer.hpp"

#include <chrono>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "retro/errors.hpp"

namespace retro {

void ScriptedProposer::push_response(std::string text) {
  std::lock_guard<std::mutex> lock(mutex_);
  fifo_.push_back(std::move(text));
}

void ScriptedProposer::add_rule(std::string key, std::string response) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto &[existing, queue] : rules_) {
    if (existing == key) {
      queue.push_back(std::move(response));
      return;
    }
  }
  rules_.emplace_back(std::move(key),
                      std::deque<std::string>{std::move(response)});
}

std::string ScriptedProposer::propose(const std::string &prompt) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto &[key, queue] : rules_) {
    if (!queue.empty() && prompt.find(key) != std::string::npos) {
      std::string out = std::move(queue.front());
      queue.pop_front();
      transcript_.emplace_back(prompt, out);
      return out;
    }
  }
  if (!fifo_.empty()) {
    std::string out = std::move(fifo_.front());
    fifo_.pop_front();
    transcript_.emplace_back(prompt, out);
    return out;
  }
  throw ScriptExhausted("scripted proposer has no response for the prompt");
}

std::size_t ScriptedProposer::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::size_t n = fifo_.size();
  for (const auto &[key, queue] : rules_) n += queue.size();
  return n;
}

std::vector<std::pair<std::string, std::string>> ScriptedProposer::transcript()
    const {
  std::lock_guard<std::mutex> lock(mutex_);
  return transcript_;
}

HttpProposer::HttpProposer(ProposerConfig config)
    : config_(std::move(config)) {
  const std::string &url = config_.endpoint;
  std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw EndpointError("endpoint is not a URL: " + url);
  }
  std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) {
    host_ = url;
    path_ = "/";
  } else {
    host_ = url.substr(0, slash);
    path_ = url.substr(slash);
  }
}

std::string HttpProposer::propose(const std::string &prompt) {
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", config_.temperature},
      {"messages",
       nlohmann::json::array(
           {{{"role", "user"}, {"content", prompt}}})},
  };
  std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  bool timed_out = false;
  std::string last_error;
  int attempts = config_.max_retries < 0 ? 1 : config_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
    }
    // One client per call keeps propose() safe across threads.
    httplib::Client cli(host_);
    cli.set_connection_timeout(config_.timeout_seconds, 0);
    cli.set_read_timeout(config_.timeout_seconds, 0);
    cli.set_write_timeout(config_.timeout_seconds, 0);

    httplib::Result res = cli.Post(path_, headers, payload, "application/json");
    if (!res) {
      timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                  res.error() == httplib::Error::Read ||
                  res.error() == httplib::Error::Write;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server returned status " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw EndpointError("endpoint rejected the request with status " +
                          std::to_string(res->status));
    }

    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") ||
        reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content")) {
      throw EndpointError("endpoint returned a malformed completion body");
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
  }

  if (timed_out) {
    throw TimeoutError("endpoint did not answer within " +
                       std::to_string(config_.timeout_seconds) + " s after " +
                       std::to_string(attempts) + " attempts");
  }
  throw EndpointError("endpoint unreachable after " +
                      std::to_string(attempts) +
                      " attempts: " + last_error);
}

}  // namespace retro
