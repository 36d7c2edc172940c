#pragma once

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "invplan/oracle.hpp"

/// @file
/// Chat-completion backend. One request per judgment, retried with
/// exponential backoff; the API key comes from the environment variable
/// named in the configuration and never appears in logs.

namespace invplan {

class RemoteOracle : public Oracle {
 public:
  /// `trace`, when non-null, receives one JSON line per wire call.
  explicit RemoteOracle(OracleConfig cfg, std::ostream* trace = nullptr)
      : cfg_(std::move(cfg)), trace_(trace) {
    cfg_.validate();
    split_base_url(cfg_.remote.base_url, host_, path_prefix_);
  }

  std::vector<std::string> propose(PromptKind kind, const Slots& slots,
                                   int num) override {
    stats_.propose_calls.fetch_add(1);
    Slots filled = slots;
    for (const std::string& name : template_slots(kind)) {
      if (name == "num" && !filled.count("num")) {
        filled["num"] = std::to_string(num);
      }
    }
    const std::string content = complete(render_prompt(kind, filled));
    return dedup_proposals(parse_list(content), num);
  }

  LikelihoodJudgment judge(PromptKind kind, const Slots& slots) override {
    stats_.judge_calls.fetch_add(1);
    if (!is_likelihood_kind(kind)) {
      throw UnsupportedPromptKind(std::string("judge called with template ") +
                                  prompt_id(kind));
    }
    const std::string content = complete(render_prompt(kind, slots));
    return parse_judgment(content);
  }

  const char* name() const override { return "remote"; }

  long tokens_used() const { return tokens_used_.load(); }

  /// Extracts the first JSON list of strings in the reply; falls back to
  /// treating non-empty lines as entries.
  static std::vector<std::string> parse_list(const std::string& content) {
    const std::size_t open = content.find('[');
    if (open != std::string::npos) {
      const std::size_t close = content.find(']', open);
      if (close != std::string::npos) {
        try {
          nlohmann::json arr =
              nlohmann::json::parse(content.substr(open, close - open + 1));
          std::vector<std::string> out;
          for (const nlohmann::json& item : arr) {
            if (item.is_string()) out.push_back(item.get<std::string>());
          }
          return out;
        } catch (const nlohmann::json::exception&) {
          // fall through to line splitting
        }
      }
    }
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= content.size()) {
      std::size_t end = content.find('\n', start);
      if (end == std::string::npos) end = content.size();
      std::string line = normalize_whitespace(content.substr(start, end - start));
      if (!line.empty()) out.push_back(std::move(line));
      start = end + 1;
    }
    return out;
  }

  /// Reads an A/B or Likely/Unlikely verdict, or a bare probability.
  LikelihoodJudgment parse_judgment(const std::string& content) const {
    const std::string text = lowercase(normalize_whitespace(content));
    if (text.empty()) throw MalformedResponse("empty completion");
    if (text.front() == 'a' && (text.size() == 1 || !std::isalnum(
                                    static_cast<unsigned char>(text[1])))) {
      return LikelihoodJudgment::verdict(true, JudgmentSource::Remote);
    }
    if (text.front() == 'b' && (text.size() == 1 || !std::isalnum(
                                    static_cast<unsigned char>(text[1])))) {
      return LikelihoodJudgment::verdict(false, JudgmentSource::Remote);
    }
    // "unlikely" contains "likely", so it must be checked first.
    if (text.find("unlikely") != std::string::npos) {
      return LikelihoodJudgment::verdict(false, JudgmentSource::Remote);
    }
    if (text.find("likely") != std::string::npos) {
      return LikelihoodJudgment::verdict(true, JudgmentSource::Remote);
    }
    try {
      std::size_t used = 0;
      const double p = std::stod(text, &used);
      if (used == text.size() && p >= 0.0 && p <= 1.0) {
        return LikelihoodJudgment::probability(p, JudgmentSource::Remote);
      }
    } catch (const std::exception&) {
      // fall through
    }
    throw MalformedResponse("completion is neither a verdict nor a probability: " +
                            text.substr(0, 80));
  }

 private:
  static void split_base_url(const std::string& url, std::string& host,
                             std::string& path_prefix) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
      throw ConfigError("remote base_url needs a scheme: " + url);
    }
    const std::size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) {
      host = url;
      path_prefix = "";
    } else {
      host = url.substr(0, path);
      path_prefix = url.substr(path);
      while (!path_prefix.empty() && path_prefix.back() == '/') {
        path_prefix.pop_back();
      }
    }
  }

  std::string api_key() const {
    const char* value = std::getenv(cfg_.remote.api_key_env_name.c_str());
    return value ? value : "";
  }

  void trace_line(const nlohmann::json& record) {
    if (!trace_) return;
    std::lock_guard<std::mutex> lock(trace_mutex_);
    *trace_ << record.dump() << "\n";
  }

  /// Sends one chat completion, retrying transient failures (connection
  /// errors, 429, 5xx) with exponential backoff.
  std::string complete(const std::string& prompt) {
    nlohmann::json body{
        {"model", cfg_.remote.model_name},
        {"messages", nlohmann::json::array(
                         {{{"role", "user"}, {"content", prompt}}})},
        {"temperature", cfg_.remote.temperature}};
    if (cfg_.seed != 0) body["seed"] = cfg_.seed;
    const std::string payload = body.dump();
    const std::string url = path_prefix_ + "/chat/completions";

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.remote.max_retries; ++attempt) {
      if (attempt > 0) {
        const auto delay = std::chrono::milliseconds(
            cfg_.remote.retry_base_ms * (1L << (attempt - 1)));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(host_);
      client.set_connection_timeout(30);
      client.set_read_timeout(120);
      httplib::Headers headers;
      const std::string key = api_key();
      if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

      httplib::Result result =
          client.Post(url, headers, payload, "application/json");
      if (!result) {
        last_error = "connection failed: " + httplib::to_string(result.error());
        trace_line({{"url", host_ + url}, {"attempt", attempt},
                    {"error", last_error}});
        continue;
      }
      trace_line({{"url", host_ + url}, {"attempt", attempt},
                  {"status", result->status}, {"request", payload},
                  {"response", result->body}});
      if (result->status == 429 || result->status >= 500) {
        last_error = "status " + std::to_string(result->status);
        continue;
      }
      if (result->status != 200) {
        throw RemoteUnavailable("endpoint rejected the request with status " +
                                std::to_string(result->status));
      }
      try {
        nlohmann::json doc = nlohmann::json::parse(result->body);
        if (doc.contains("usage") && doc["usage"].contains("total_tokens")) {
          tokens_used_.fetch_add(doc["usage"]["total_tokens"].get<long>());
        }
        return doc.at("choices").at(0).at("message").at("content")
            .get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw MalformedResponse(std::string("completion body unusable: ") +
                                e.what());
      }
    }
    throw RemoteUnavailable("gave up after " +
                            std::to_string(cfg_.remote.max_retries + 1) +
                            " attempts; last error: " + last_error);
  }

  OracleConfig cfg_;
  std::ostream* trace_;
  std::mutex trace_mutex_;
  std::string host_;
  std::string path_prefix_;
  std::atomic<long> tokens_used_{0};
};

}  // namespace invplan
