#pragma once

#include <atomic>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "invplan/prompts.hpp"
#include "invplan/types.hpp"

/// @file
/// The oracle interface every backend implements, plus the judgment and
/// configuration types shared by all of them.

namespace invplan {

enum class JudgmentSource { Scripted, Remote, Exact };

inline const char* to_string(JudgmentSource s) {
  switch (s) {
    case JudgmentSource::Scripted: return "scripted";
    case JudgmentSource::Remote: return "remote";
    case JudgmentSource::Exact: return "exact";
  }
  throw InternalError("unknown JudgmentSource");
}

/// Either a binary verdict or an exact numeric probability.
struct LikelihoodJudgment {
  bool likely = false;
  std::optional<double> numeric;
  JudgmentSource source = JudgmentSource::Scripted;

  static LikelihoodJudgment verdict(bool is_likely,
                                    JudgmentSource src = JudgmentSource::Scripted) {
    LikelihoodJudgment j;
    j.likely = is_likely;
    j.source = src;
    return j;
  }

  static LikelihoodJudgment probability(double p,
                                        JudgmentSource src = JudgmentSource::Exact) {
    if (p < 0.0 || p > 1.0) {
      throw InternalError("judgment probability out of [0,1]");
    }
    LikelihoodJudgment j;
    j.numeric = p;
    j.source = src;
    return j;
  }
};

enum class OracleBackend { Scripted, Remote, Gridworld };

struct RemoteConfig {
  std::string base_url = "http://localhost:8080";
  std::string model_name = "default";
  std::string api_key_env_name = "INVPLAN_API_KEY";
  double temperature = 0.0;
  int max_retries = 3;
  int retry_base_ms = 250;
};

struct OracleConfig {
  OracleBackend backend = OracleBackend::Scripted;
  RemoteConfig remote;
  double likely_value = 0.9;
  double unlikely_value = 0.1;
  unsigned long long seed = 0;

  void validate() const {
    if (!(0.0 < unlikely_value && unlikely_value < likely_value &&
          likely_value < 1.0)) {
      throw ConfigError("verdict values must satisfy 0 < unlikely < likely < 1");
    }
  }
};

inline double to_probability(const LikelihoodJudgment& j, const OracleConfig& cfg) {
  if (j.numeric) return *j.numeric;
  return j.likely ? cfg.likely_value : cfg.unlikely_value;
}

/// Call counters; shared state, so all fields are atomic.
struct OracleStats {
  std::atomic<long> propose_calls{0};
  std::atomic<long> judge_calls{0};

  long total() const { return propose_calls.load() + judge_calls.load(); }
};

/// A backend answering generative requests. Implementations must be safe for
/// concurrent calls.
class Oracle {
 public:
  virtual ~Oracle() = default;

  /// Candidate texts for a sampling/extraction/model-proposal template.
  virtual std::vector<std::string> propose(PromptKind kind, const Slots& slots,
                                           int num) = 0;

  /// Verdict for a likelihood template.
  virtual LikelihoodJudgment judge(PromptKind kind, const Slots& slots) = 0;

  virtual const char* name() const = 0;

  const OracleStats& stats() const { return stats_; }

 protected:
  OracleStats stats_;
};

/// Trims ends and collapses internal whitespace runs to single spaces.
inline std::string normalize_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // leading whitespace is dropped
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out += ' ';
      out += c;
      in_space = false;
    }
  }
  return out;
}

inline std::string lowercase(const std::string& text) {
  std::string out = text;
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Canonical request text: operation, template id, and slots sorted by name
/// with whitespace-normalized values. Equal requests canonicalize equally
/// regardless of slot order or incidental spacing.
inline std::string canonical_request(const char* op, PromptKind kind,
                                     const Slots& slots) {
  std::string out = std::string(op) + "|" + prompt_id(kind);
  for (const auto& [name, value] : slots) {  // std::map iterates sorted
    out += "|" + name + "=" + normalize_whitespace(value);
  }
  return out;
}

/// Stable 64-bit FNV-1a digest of a canonical request, as fixed-width hex.
inline std::string request_digest(const std::string& canonical) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* kHex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
    h >>= 4;
  }
  return out;
}

/// Removes duplicate proposals (case-insensitive after whitespace
/// normalization) and truncates to `num`. Order of first occurrence wins.
inline std::vector<std::string> dedup_proposals(std::vector<std::string> texts,
                                                int num) {
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (std::string& text : texts) {
    std::string key = lowercase(normalize_whitespace(text));
    if (key.empty()) continue;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(std::move(key));
    out.push_back(std::move(text));
    if (num > 0 && out.size() == static_cast<std::size_t>(num)) break;
  }
  return out;
}

}  // namespace invplan
