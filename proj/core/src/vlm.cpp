// core/src/vlm.cpp

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

#include "tspl/vlm.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <regex>
#include <thread>

#include <nlohmann/json.hpp>

#include "tspl/error.hpp"
#include "tspl/hash.hpp"

namespace tspl {

using json = nlohmann::json;

void VlmEndpointConfig::validate() const {
  if (model.empty()) throw UsageError("vlm: model name is empty");
  if (api_key_env.empty()) throw UsageError("vlm: API key variable name is empty");
  if (!(temperature >= 0.0)) throw UsageError("vlm: temperature must be >= 0");
  if (max_retries < 0) throw UsageError("vlm: max retries must be >= 0");
  if (max_concurrency < 1) throw UsageError("vlm: max concurrency must be >= 1");
  if (!(timeout_seconds > 0.0)) throw UsageError("vlm: timeout must be positive");
  if (!(backoff_initial_seconds >= 0.0) || !(backoff_max_seconds >= 0.0))
    throw UsageError("vlm: backoff must be >= 0");
  static const std::regex kUrl(R"(^https?://[^/\s]+(/\S*)?$)");
  if (!std::regex_match(base_url, kUrl)) throw UsageError("vlm: malformed base URL '" + base_url + "'");
}

std::string VlmEndpointConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "vlm/1 model=%s temperature=%.17g plot=%zux%zu/%zu", model.c_str(),
                temperature, plot.width, plot.height, plot.line_width);
  return sha256_hex(std::string_view(buf)).substr(0, 16);
}

std::string resolve_api_key(const VlmEndpointConfig& config) {
  const char* v = std::getenv(config.api_key_env.c_str());
  if (v == nullptr || *v == '\0')
    throw UsageError("vlm: environment variable " + config.api_key_env + " is not set");
  return v;
}

std::string chat_request_body(const std::string& model, double temperature,
                              const std::string& prompt, std::span<const std::uint8_t> png) {
  json body = {
      {"model", model},
      {"temperature", temperature},
      {"messages",
       json::array({{{"role", "user"},
                     {"content", json::array({{{"type", "text"}, {"text", prompt}},
                                              {{"type", "image_url"},
                                               {"image_url",
                                                {{"url", "data:image/png;base64," +
                                                             base64_encode(png)}}}}})}}})}};
  return body.dump();
}

std::string chat_response_content(const std::string& body) {
  try {
    const json j = json::parse(body);
    const json& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ServiceError("vlm: response content is not text");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw ServiceError(std::string("vlm: unexpected response body: ") + e.what());
  }
}

VlmClient::VlmClient(VlmEndpointConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {
  config_.validate();
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  std::regex_match(config_.base_url, m, kUrl);
  scheme_host_port_ = m[1].str();
  path_ = m[2].str();
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
}

std::string VlmClient::complete(const std::string& prompt, std::span<const std::uint8_t> png) const {
  const std::string body = chat_request_body(config_.model, config_.temperature, prompt, png);
  const httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double wait = std::min(config_.backoff_max_seconds,
                                   config_.backoff_initial_seconds * std::ldexp(1.0, attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    auto res = cli.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403)
      throw AuthError("vlm: endpoint rejected the credentials from " + config_.api_key_env +
                      " (HTTP " + std::to_string(res->status) + ")");
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw ServiceError("vlm: endpoint returned HTTP " + std::to_string(res->status));
    return chat_response_content(res->body);
  }
  throw ServiceError("vlm: giving up after " + std::to_string(config_.max_retries + 1) +
                     " attempts (" + last_error + ")");
}

VlmTeacher::VlmTeacher(VlmEndpointConfig config, std::optional<std::filesystem::path> cache_path)
    : client_(config, resolve_api_key(config)), cache_path_(std::move(cache_path)) {
  if (!cache_path_ || !std::filesystem::exists(*cache_path_)) return;
  std::ifstream in(*cache_path_);
  if (!in) throw IoError("cannot read VLM cache " + cache_path_->string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string key = j.at("key").get<std::string>();
      cache_[key] = j.at("response").get<std::string>();
      cache_lines_[key] = line;
    } catch (const json::exception& e) {
      throw IoError("VLM cache " + cache_path_->string() + " line " + std::to_string(n) + ": " +
                    e.what());
    }
  }
}

std::string VlmTeacher::cache_key(std::uint64_t id, std::span<const int> perm) const {
  std::string key = std::to_string(id) + "|" + client_.config().model + "|";
  for (int p : perm) key += static_cast<char>('0' + p);
  return key;
}

void VlmTeacher::store(const std::string& key, std::uint64_t id, std::span<const int> perm,
                       const std::string& response) {
  const std::string line = json{{"key", key},
                                {"sample_id", id},
                                {"model", client_.config().model},
                                {"permutation", std::vector<int>(perm.begin(), perm.end())},
                                {"response", response}}
                               .dump();
  std::lock_guard lock(mu_);
  if (cache_.count(key)) return;
  cache_[key] = response;
  cache_lines_[key] = line;
  if (!cache_path_) return;
  if (cache_path_->has_parent_path()) std::filesystem::create_directories(cache_path_->parent_path());
  std::ofstream out(*cache_path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to VLM cache " + cache_path_->string());
  out << line << '\n';
}

void VlmTeacher::rewrite_cache() const {
  if (!cache_path_) return;
  std::lock_guard lock(mu_);
  if (cache_path_->has_parent_path()) std::filesystem::create_directories(cache_path_->parent_path());
  auto tmp = *cache_path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& [key, line] : cache_lines_) out << line << '\n';
    if (!out) throw IoError("error writing " + tmp.string());
  }
  std::filesystem::rename(tmp, *cache_path_);
}

LabelOutcome VlmTeacher::label(const TimeSeries& ts, Rng& rng) {
  const std::vector<int> perm = random_permutation(rng);
  const std::string key = cache_key(ts.id, perm);
  std::optional<std::string> response;
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) response = it->second;
  }
  if (response) {
    ++cache_hits_;
  } else {
    const auto png = render_plot(ts.values, client_.config().plot);
    ++requests_;
    response = client_.complete(build_prompt(perm), png);
    store(key, ts.id, perm, *response);
  }

  LabelOutcome out;
  const AnswerParse parsed = parse_answer(*response, perm);
  if (const auto* failure = std::get_if<ParseFailure>(&parsed)) {
    ++parse_failures_;
    out.failure = LabelFailure{ts.id,
                               failure->kind == ParseFailure::Kind::kNoNumber ? "no_number"
                                                                              : "out_of_range",
                               *response};
    return out;
  }
  LabelRecord r;
  r.sample_id = ts.id;
  r.label = std::get<SignalClass>(parsed);
  r.teacher = id();
  r.option_permutation = perm;
  r.raw_response = *response;
  out.record = std::move(r);
  return out;
}

LabelSet VlmTeacher::label_all(std::span<const TimeSeries> samples, std::uint64_t seed) {
  std::vector<LabelOutcome> outcomes(samples.size());
  std::vector<std::exception_ptr> errors(samples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  const auto worker = [&] {
    for (std::size_t i = next++; i < samples.size() && !abort; i = next++) {
      try {
        Rng rng(derive_seed(seed, "label", samples[i].id));
        outcomes[i] = label(samples[i], rng);
      } catch (...) {
        errors[i] = std::current_exception();
        abort = true;
      }
    }
  };
  {
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(client_.config().max_concurrency),
                                         std::max<std::size_t>(1, samples.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  rewrite_cache();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  LabelSet out;
  out.teacher = id();
  out.config_hash = config_hash();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (outcomes[i].record) {
      outcomes[i].record->correct = outcomes[i].record->label == samples[i].gt_class;
      out.records.push_back(std::move(*outcomes[i].record));
    } else if (outcomes[i].failure) {
      out.failures.push_back(std::move(*outcomes[i].failure));
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; };
  std::sort(out.records.begin(), out.records.end(), by_id);
  std::sort(out.failures.begin(), out.failures.end(), by_id);
  return out;
}

VlmStats VlmTeacher::stats() const { return {requests_, cache_hits_, parse_failures_}; }

// Mock server.

struct MockVlmServer::Impl {
  httplib::Server server;
  std::thread thread;
};

MockVlmServer::MockVlmServer(Options options)
    : options_(std::move(options)), impl_(std::make_unique<Impl>()) {}

MockVlmServer::~MockVlmServer() { stop(); }

void MockVlmServer::start(int port) {
  if (impl_->thread.joinable()) throw UsageError("mock VLM server already running");
  impl_->server.Post(R"(.*/chat/completions)", [this](const httplib::Request& req,
                                                      httplib::Response& res) {
    const std::size_t index = requests_++;
    if (options_.required_key &&
        req.get_header_value("Authorization") != "Bearer " + *options_.required_key) {
      res.status = 401;
      res.set_content(R"({"error":{"message":"invalid api key"}})", "application/json");
      return;
    }
    if (index < options_.transient_failures) {
      ++transient_served_;
      res.status = 503;
      res.set_content(R"({"error":{"message":"overloaded"}})", "application/json");
      return;
    }
    std::string content;
    try {
      content = answer(req.body);
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(json{{"error", {{"message", e.what()}}}}.dump(), "application/json");
      return;
    }
    json reply = {{"id", "mock-" + std::to_string(index)},
                  {"object", "chat.completion"},
                  {"model", "mock"},
                  {"choices", json::array({{{"index", 0},
                                            {"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    port_ = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw IoError("mock VLM server: cannot bind 127.0.0.1:" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockVlmServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

void MockVlmServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockVlmServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

void MockVlmServer::register_sample(const TimeSeries& ts, bool malformed) {
  const std::string key = sha256_hex(base64_encode(render_plot(ts.values, options_.plot)));
  std::lock_guard lock(mu_);
  known_[key] = {ts.gt_class, malformed};
}

std::string MockVlmServer::answer(const std::string& body) {
  const json j = json::parse(body);
  std::string prompt, image;
  for (const auto& part : j.at("messages").at(0).at("content")) {
    const std::string type = part.at("type").get<std::string>();
    if (type == "text") prompt = part.at("text").get<std::string>();
    if (type == "image_url") image = part.at("image_url").at("url").get<std::string>();
  }
  static const std::string kPrefix = "data:image/png;base64,";
  if (image.rfind(kPrefix, 0) != 0) throw ValidationError("request has no PNG image");
  std::optional<std::pair<SignalClass, bool>> entry;
  {
    std::lock_guard lock(mu_);
    if (auto it = known_.find(sha256_hex(std::string_view(image).substr(kPrefix.size())));
        it != known_.end())
      entry = it->second;
  }
  if (entry && entry->second) {
    ++malformed_served_;
    return options_.malformed_answer;
  }
  if (options_.mode == Mode::kConstant) return options_.constant_answer;
  if (!entry) {
    ++malformed_served_;
    return options_.malformed_answer;
  }

  static const std::regex kOption(R"(\((\d+)\) ([a-z ]+?)(?= \(\d+\)|$))");
  const std::string want(class_name(entry->first));
  for (std::sregex_iterator it(prompt.begin(), prompt.end(), kOption), end; it != end; ++it)
    if ((*it)[2].str() == want) return "(" + (*it)[1].str() + ")";
  throw ValidationError("prompt does not list the option '" + want + "'");
}

}  // namespace tspl
