#pragma once

#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "invplan/oracle.hpp"

/// @file
/// Fixture-backed oracle. Responses are keyed by the canonical request, so a
/// fixture pins an exact conditional table and runs are reproducible.

namespace invplan {

/// Serves propose/judge responses from a fixture. Lookup misses raise
/// FixtureMiss unless the fixture opts into a default-Unlikely fallback
/// (proposals then fall back to an empty list).
class ScriptedOracle : public Oracle {
 public:
  ScriptedOracle() = default;

  // Movable so the factory functions below can return by value; call stats
  // and the miss log start fresh on the new instance.
  ScriptedOracle(ScriptedOracle&& other) noexcept
      : proposals_(std::move(other.proposals_)),
        judgments_(std::move(other.judgments_)),
        default_unlikely_(other.default_unlikely_) {}

  /// Fixture file: {"format_version": 1, "default_unlikely": bool,
  /// "entries": [{"kind": id, "slots": {...}, "response": ...}]}.
  /// A judge response is "likely", "unlikely", or a number; a propose
  /// response is an array of strings. Unknown fields are ignored.
  static ScriptedOracle from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open fixture file: " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("fixture " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc, path);
  }

  static ScriptedOracle from_json(const nlohmann::json& doc,
                                  const std::string& origin = "<memory>") {
    if (!doc.is_object() || !doc.contains("entries")) {
      throw InputError("fixture " + origin + " lacks an entries array");
    }
    ScriptedOracle oracle;
    oracle.default_unlikely_ = doc.value("default_unlikely", false);
    for (const nlohmann::json& entry : doc.at("entries")) {
      const PromptKind kind = prompt_kind_from_id(entry.at("kind").get<std::string>());
      Slots slots;
      for (const auto& [name, value] : entry.at("slots").items()) {
        slots[name] = value.get<std::string>();
      }
      const nlohmann::json& response = entry.at("response");
      if (response.is_array()) {
        std::vector<std::string> texts;
        for (const nlohmann::json& t : response) texts.push_back(t.get<std::string>());
        oracle.add_propose(kind, slots, texts);
      } else if (response.is_number()) {
        oracle.add_judge(kind, slots,
                         LikelihoodJudgment::probability(response.get<double>(),
                                                         JudgmentSource::Scripted));
      } else if (response.is_string()) {
        const std::string text = lowercase(response.get<std::string>());
        if (text != "likely" && text != "unlikely") {
          throw InputError("fixture " + origin + " has unknown verdict '" +
                           response.get<std::string>() + "'");
        }
        oracle.add_judge(kind, slots, LikelihoodJudgment::verdict(text == "likely"));
      } else {
        throw InputError("fixture " + origin + " has an unusable response type");
      }
    }
    return oracle;
  }

  void add_propose(PromptKind kind, const Slots& slots,
                   std::vector<std::string> response) {
    proposals_[canonical_request("propose", kind, slots)] = std::move(response);
  }

  void add_judge(PromptKind kind, const Slots& slots, LikelihoodJudgment response) {
    response.source = JudgmentSource::Scripted;
    judgments_[canonical_request("judge", kind, slots)] = response;
  }

  void set_default_unlikely(bool enabled) { default_unlikely_ = enabled; }

  std::vector<std::string> propose(PromptKind kind, const Slots& slots,
                                   int num) override {
    stats_.propose_calls.fetch_add(1);
    render_prompt(kind, with_num(kind, slots, num));  // enforce slot coverage
    const std::string key = canonical_request("propose", kind, slots);
    auto it = proposals_.find(key);
    if (it == proposals_.end()) {
      record_miss(key);
      if (default_unlikely_) return {};
      throw FixtureMiss("fixture has no propose entry for " + key);
    }
    return dedup_proposals(it->second, num);
  }

  LikelihoodJudgment judge(PromptKind kind, const Slots& slots) override {
    stats_.judge_calls.fetch_add(1);
    if (!is_likelihood_kind(kind)) {
      throw UnsupportedPromptKind(std::string("judge called with template ") +
                                  prompt_id(kind));
    }
    render_prompt(kind, slots);  // enforce slot coverage
    const std::string key = canonical_request("judge", kind, slots);
    auto it = judgments_.find(key);
    if (it == judgments_.end()) {
      record_miss(key);
      if (default_unlikely_) return LikelihoodJudgment::verdict(false);
      throw FixtureMiss("fixture has no judge entry for " + key);
    }
    return it->second;
  }

  const char* name() const override { return "scripted"; }

  /// Canonical requests that missed, for fixture authoring.
  std::vector<std::string> misses() const {
    std::lock_guard<std::mutex> lock(miss_mutex_);
    return misses_;
  }

 private:
  static Slots with_num(PromptKind kind, Slots slots, int num) {
    for (const std::string& name : template_slots(kind)) {
      if (name == "num" && !slots.count("num")) {
        slots["num"] = std::to_string(num);
      }
    }
    return slots;
  }

  void record_miss(const std::string& key) const {
    std::lock_guard<std::mutex> lock(miss_mutex_);
    misses_.push_back(key);
  }

  // Lookup tables are immutable after construction, so reads are safe
  // without locking; only the miss log mutates afterwards.
  std::map<std::string, std::vector<std::string>> proposals_;
  std::map<std::string, LikelihoodJudgment> judgments_;
  bool default_unlikely_ = false;

  mutable std::mutex miss_mutex_;
  mutable std::vector<std::string> misses_;
};

}  // namespace invplan
