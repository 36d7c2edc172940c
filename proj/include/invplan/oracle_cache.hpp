#pragma once

#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "invplan/oracle.hpp"

/// @file
/// Memoizing decorator around any oracle backend. At most one underlying
/// call runs per distinct canonical request; responses can be persisted to
/// an append-only file and replayed in later processes.

namespace invplan {

class CachingOracle : public Oracle {
 public:
  /// Wraps `inner` without taking ownership. When `persist_path` is
  /// non-empty, warm entries are loaded from it and new responses appended.
  explicit CachingOracle(Oracle& inner, std::string persist_path = "")
      : inner_(inner), persist_path_(std::move(persist_path)) {
    if (!persist_path_.empty()) load_persisted();
  }

  std::vector<std::string> propose(PromptKind kind, const Slots& slots,
                                   int num) override {
    stats_.propose_calls.fetch_add(1);
    // Distinct num caps are distinct requests: the truncated response differs.
    const std::string key = canonical_request("propose", kind, slots) +
                            "|num=" + std::to_string(num);
    return proposals_.get_or_call(key, [&] {
      std::vector<std::string> response = inner_.propose(kind, slots, num);
      persist("propose", key, nlohmann::json(response));
      return response;
    });
  }

  LikelihoodJudgment judge(PromptKind kind, const Slots& slots) override {
    stats_.judge_calls.fetch_add(1);
    const std::string key = canonical_request("judge", kind, slots);
    return judgments_.get_or_call(key, [&] {
      LikelihoodJudgment response = inner_.judge(kind, slots);
      nlohmann::json stored;
      if (response.numeric) {
        stored = *response.numeric;
      } else {
        stored = response.likely ? "likely" : "unlikely";
      }
      persist("judge", key, stored);
      return response;
    });
  }

  const char* name() const override { return "cache"; }

  std::size_t entry_count() const {
    return proposals_.size() + judgments_.size();
  }

 private:
  /// One memo table. get_or_call guarantees a single in-flight computation
  /// per key; failures propagate to every waiter and are then forgotten so a
  /// later call can retry.
  template <typename T>
  class Memo {
   public:
    template <typename Fn>
    T get_or_call(const std::string& key, Fn&& fn) {
      std::shared_future<T> fut;
      std::promise<T> promise;
      bool owner = false;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = futures_.find(key);
        if (it != futures_.end()) {
          fut = it->second;
        } else {
          fut = promise.get_future().share();
          futures_.emplace(key, fut);
          owner = true;
        }
      }
      if (owner) {
        try {
          promise.set_value(fn());
        } catch (...) {
          promise.set_exception(std::current_exception());
          std::lock_guard<std::mutex> lock(mutex_);
          futures_.erase(key);
        }
      }
      return fut.get();
    }

    void put(const std::string& key, T value) {
      std::promise<T> promise;
      promise.set_value(std::move(value));
      std::lock_guard<std::mutex> lock(mutex_);
      futures_.emplace(key, promise.get_future().share());
    }

    std::size_t size() const {
      std::lock_guard<std::mutex> lock(mutex_);
      return futures_.size();
    }

   private:
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_future<T>> futures_;
  };

  void persist(const char* op, const std::string& key, nlohmann::json response) {
    if (persist_path_.empty()) return;
    nlohmann::json record{{"op", op},
                          {"key_digest", request_digest(key)},
                          {"key", key},
                          {"response", std::move(response)}};
    std::lock_guard<std::mutex> lock(file_mutex_);
    std::ofstream out(persist_path_, std::ios::app);
    if (!out) throw InputError("cannot append to cache file: " + persist_path_);
    out << record.dump() << "\n";
  }

  void load_persisted() {
    std::ifstream in(persist_path_);
    if (!in) return;  // a missing file simply starts a fresh cache
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw InputError("cache file " + persist_path_ + " line " +
                         std::to_string(line_no) + " is not valid JSON: " + e.what());
      }
      const std::string op = record.at("op").get<std::string>();
      const std::string key = record.at("key").get<std::string>();
      const nlohmann::json& response = record.at("response");
      if (op == "propose") {
        proposals_.put(key, response.get<std::vector<std::string>>());
      } else if (op == "judge") {
        LikelihoodJudgment j;
        if (response.is_number()) {
          j = LikelihoodJudgment::probability(response.get<double>(),
                                              JudgmentSource::Scripted);
        } else {
          j = LikelihoodJudgment::verdict(response.get<std::string>() == "likely");
        }
        judgments_.put(key, j);
      } else {
        throw InputError("cache file " + persist_path_ + " line " +
                         std::to_string(line_no) + " has unknown op '" + op + "'");
      }
    }
  }

  Oracle& inner_;
  std::string persist_path_;
  Memo<std::vector<std::string>> proposals_;
  Memo<LikelihoodJudgment> judgments_;
  std::mutex file_mutex_;
};

}  // namespace invplan
