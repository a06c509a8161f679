// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_PROPOSER_PROPOSER_HPP
#define RETRO_PROPOSER_PROPOSER_HPP

#include <cstddef>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace retro {

struct ProposerConfig {
  std::string endpoint;  // e.g. http://host:port/v1/chat/completions
  std::string api_key;
  std::string model = "default";
  double temperature = 0.7;
  int max_retries = 3;
  int timeout_seconds = 60;
  int backoff_ms = 250;  // doubled per retry
};

// Text-completion backend. propose() must be safe to call from multiple
// threads.
class Proposer {
public:
  virtual ~Proposer() = default;
  virtual std::string propose(const std::string &prompt) = 0;
};

// Deterministic stand-in for tests and offline runs. Responses are served
// from keyed queues first (first rule whose key is a substring of the
// prompt), then from a shared FIFO. Throws ScriptExhausted when nothing is
// left to say.
class ScriptedProposer : public Proposer {
public:
  void push_response(std::string text);
  void add_rule(std::string key, std::string response);

  std::string propose(const std::string &prompt) override;

  std::size_t remaining() const;
  // (prompt, response) pairs in service order, for auditing runs.
  std::vector<std::pair<std::string, std::string>> transcript() const;

private:
  mutable std::mutex mutex_;
  std::deque<std::string> fifo_;
  std::vector<std::pair<std::string, std::deque<std::string>>> rules_;
  std::vector<std::pair<std::string, std::string>> transcript_;
};

// Chat-completion client over HTTP. Sends {"model", "temperature",
// "messages": [{"role": "user", "content": prompt}]} and returns
// choices[0].message.content. Transport failures and 5xx responses are
// retried with exponential backoff; 4xx responses and malformed bodies fail
// immediately. Throws EndpointError or TimeoutError.
class HttpProposer : public Proposer {
public:
  explicit HttpProposer(ProposerConfig config);
  std::string propose(const std::string &prompt) override;

  const ProposerConfig &config() const { return config_; }

private:
  ProposerConfig config_;
  std::string host_;  // scheme://authority
  std::string path_;
};

}  // namespace retro

#endif  // RETRO_PROPOSER_PROPOSER_HPP
