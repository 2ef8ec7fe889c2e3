// core/include/tspl/vlm.hpp

// Copyright 2026  The tspl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef TSPL_VLM_HPP_
#define TSPL_VLM_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tspl/labeler.hpp"
#include "tspl/plot.hpp"

namespace tspl {

/// OpenAI-compatible chat completions endpoint.
struct VlmEndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o";
  /// Environment variable holding the bearer token. The key itself is never
  /// stored in configs, manifests or logs.
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  double timeout_seconds = 60.0;
  int max_retries = 4;
  int max_concurrency = 4;
  double backoff_initial_seconds = 1.0;
  double backoff_max_seconds = 30.0;
  PlotOptions plot;

  void validate() const;
  /// Digest of the fields that change answers (model, temperature, plot).
  std::string hash() const;
};

/// Reads config.api_key_env. Throws UsageError when it is unset or empty.
std::string resolve_api_key(const VlmEndpointConfig& config);

/// JSON request body: model, temperature and one user message holding the
/// prompt text and the image as a data:image/png;base64 URL.
std::string chat_request_body(const std::string& model, double temperature,
                              const std::string& prompt, std::span<const std::uint8_t> png);

/// choices[0].message.content. Throws ServiceError on any other shape.
std::string chat_response_content(const std::string& body);

class VlmClient {
 public:
  VlmClient(VlmEndpointConfig config, std::string api_key);

  /// One completion. 401/403 raise AuthError at once; 429, 5xx and transport
  /// errors are retried max_retries times with exponential backoff, then
  /// raise ServiceError.
  std::string complete(const std::string& prompt, std::span<const std::uint8_t> png) const;

  const VlmEndpointConfig& config() const { return config_; }

 private:
  VlmEndpointConfig config_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
};

struct VlmStats {
  std::size_t requests = 0;
  std::size_t cache_hits = 0;
  std::size_t parse_failures = 0;
};

/// Pseudo labels from a vision-language model. Each sample gets a fresh
/// option order from its label stream; answers are cached in a JSONL file
/// keyed on (sample id, model, permutation), so re-runs send no requests.
/// Unparseable answers become LabelFailures and are cached like any other
/// answer, so they are never re-queried.
class VlmTeacher final : public Teacher {
 public:
  /// Resolves the API key immediately (UsageError when missing).
  explicit VlmTeacher(VlmEndpointConfig config,
                      std::optional<std::filesystem::path> cache_path = std::nullopt);

  std::string id() const override { return "vlm:" + client_.config().model; }
  std::string config_hash() const override { return client_.config().hash(); }
  /// Labels come from one fixed seed, as a single labeling pass would.
  bool stochastic() const override { return false; }
  LabelOutcome label(const TimeSeries& ts, Rng& rng) override;
  /// Up to max_concurrency requests in flight. Results do not depend on
  /// completion order. The cache file is rewritten sorted at the end.
  LabelSet label_all(std::span<const TimeSeries> samples, std::uint64_t seed) override;

  VlmStats stats() const;

 private:
  std::string cache_key(std::uint64_t id, std::span<const int> perm) const;
  void store(const std::string& key, std::uint64_t id, std::span<const int> perm,
             const std::string& response);
  void rewrite_cache() const;

  VlmClient client_;
  std::optional<std::filesystem::path> cache_path_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> cache_;
  std::map<std::string, std::string> cache_lines_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<std::size_t> parse_failures_{0};
};

/// In-process HTTP server speaking the chat completions protocol, for tests
/// and offline runs. Samples are recognised by the SHA-256 of their encoded
/// plot.
class MockVlmServer {
 public:
  enum class Mode {
    kTruthful,  // answers the option number of the registered true class
    kConstant,  // answers constant_answer to every sample not registered as malformed
  };

  struct Options {
    Mode mode = Mode::kTruthful;
    std::string constant_answer = "(0)";
    /// Reply text for samples registered as malformed and, in truthful mode,
    /// for unknown images.
    std::string malformed_answer = "I cannot tell";
    /// When set, requests must carry "Authorization: Bearer <key>" or get 401.
    std::optional<std::string> required_key;
    /// The first n requests get HTTP 503.
    std::size_t transient_failures = 0;
    PlotOptions plot;
  };

  explicit MockVlmServer(Options options);
  ~MockVlmServer();
  MockVlmServer(const MockVlmServer&) = delete;
  MockVlmServer& operator=(const MockVlmServer&) = delete;

  /// Starts listening on 127.0.0.1 (port 0 picks a free port).
  void start(int port = 0);
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();
  int port() const { return port_; }
  std::string base_url() const;

  void register_sample(const TimeSeries& ts, bool malformed = false);

  std::size_t requests() const { return requests_; }
  std::size_t malformed_served() const { return malformed_served_; }
  std::size_t transient_served() const { return transient_served_; }

 private:
  struct Impl;
  std::string answer(const std::string& body);

  Options options_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::mutex mu_;
  std::map<std::string, std::pair<SignalClass, bool>> known_;
  std::atomic<std::size_t> requests_{0};
  std::atomic<std::size_t> malformed_served_{0};
  std::atomic<std::size_t> transient_served_{0};
};

}  // namespace tspl

#endif  // TSPL_VLM_HPP_
