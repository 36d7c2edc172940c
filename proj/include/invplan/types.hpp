#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

/// @file
/// Shared vocabulary: variable references, discrete distributions, and the
/// error taxonomy used across the library and the command-line harness.

namespace invplan {

/// Broad failure categories. The numeric value doubles as the process exit
/// code, so the assignments here are part of the CLI contract.
enum class ErrorCategory {
  Config = 2,      // bad flags, bad configuration values
  Extraction = 3,  // story/question could not be turned into a timeline
  Oracle = 4,      // backend unavailable, fixture miss, malformed response
  Input = 5,       // malformed episode/scenario/trace files
  Internal = 6,    // invariant violations that indicate a bug
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::Config, w) {}
};
struct ExtractionFailure : Error {
  explicit ExtractionFailure(const std::string& w) : Error(ErrorCategory::Extraction, w) {}
};
struct OracleError : Error {
  explicit OracleError(const std::string& w) : Error(ErrorCategory::Oracle, w) {}
};
struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorCategory::Input, w) {}
};
struct InternalError : Error {
  explicit InternalError(const std::string& w) : Error(ErrorCategory::Internal, w) {}
};

struct IllegalAdjustment : ConfigError {
  explicit IllegalAdjustment(const std::string& w) : ConfigError(w) {}
};
struct WindowExhausted : ConfigError {
  explicit WindowExhausted(const std::string& w) : ConfigError(w) {}
};
struct RecursionDepthExceeded : ConfigError {
  explicit RecursionDepthExceeded(const std::string& w) : ConfigError(w) {}
};
struct MissingSlot : OracleError {
  explicit MissingSlot(const std::string& w) : OracleError(w) {}
};
struct UnsupportedPromptKind : OracleError {
  explicit UnsupportedPromptKind(const std::string& w) : OracleError(w) {}
};
struct FixtureMiss : OracleError {
  explicit FixtureMiss(const std::string& w) : OracleError(w) {}
};
struct RemoteUnavailable : OracleError {
  explicit RemoteUnavailable(const std::string& w) : OracleError(w) {}
};
struct MalformedResponse : OracleError {
  explicit MalformedResponse(const std::string& w) : OracleError(w) {}
};
struct EmptyProposal : OracleError {
  explicit EmptyProposal(const std::string& w) : OracleError(w) {}
};
struct InvalidTrajectory : InputError {
  explicit InvalidTrajectory(const std::string& w) : InputError(w) {}
};
struct ScenarioError : InputError {
  explicit ScenarioError(const std::string& w) : InputError(w) {}
};
struct UnknownTraceElement : InputError {
  explicit UnknownTraceElement(const std::string& w) : InputError(w) {}
};
struct NonConvergence : InternalError {
  explicit NonConvergence(const std::string& w) : InternalError(w) {}
};

/// Kinds of variables a model can mention. State, Action and Utterance are
/// observable; the rest are latent mental variables.
enum class VariableKind {
  State,
  Observation,
  Belief,
  Action,
  Utterance,
  Goal,
  InteractiveState,
};

inline const char* to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::State: return "state";
    case VariableKind::Observation: return "observation";
    case VariableKind::Belief: return "belief";
    case VariableKind::Action: return "action";
    case VariableKind::Utterance: return "utterance";
    case VariableKind::Goal: return "goal";
    case VariableKind::InteractiveState: return "interactive_state";
  }
  throw InternalError("unknown VariableKind");
}

inline VariableKind variable_kind_from_string(const std::string& text) {
  if (text == "state") return VariableKind::State;
  if (text == "observation") return VariableKind::Observation;
  if (text == "belief") return VariableKind::Belief;
  if (text == "action") return VariableKind::Action;
  if (text == "utterance") return VariableKind::Utterance;
  if (text == "goal") return VariableKind::Goal;
  if (text == "interactive_state") return VariableKind::InteractiveState;
  throw InputError("unknown variable kind: " + text);
}

inline bool is_latent(VariableKind kind) {
  switch (kind) {
    case VariableKind::State:
    case VariableKind::Action:
    case VariableKind::Utterance:
      return false;
    default:
      return true;
  }
}

/// Identifies one variable instance. Timesteps are 1-based story steps.
/// A Goal persists across the whole episode, so two Goal refs that differ
/// only in timestep refer to the same variable.
struct VariableRef {
  VariableKind kind = VariableKind::State;
  int timestep = 0;
  std::string agent;
  int level = 0;

  /// Comparison key; Goal refs normalise the timestep away.
  std::tuple<int, int, std::string, int> key() const {
    const int t = kind == VariableKind::Goal ? 0 : timestep;
    return {static_cast<int>(kind), t, agent, level};
  }

  friend bool operator==(const VariableRef& a, const VariableRef& b) {
    return a.key() == b.key();
  }
  friend bool operator!=(const VariableRef& a, const VariableRef& b) {
    return !(a == b);
  }
  friend bool operator<(const VariableRef& a, const VariableRef& b) {
    return a.key() < b.key();
  }

  std::string str() const {
    std::string out = to_string(kind);
    if (kind != VariableKind::Goal) out += "@" + std::to_string(timestep);
    if (!agent.empty()) out += ":" + agent;
    if (level > 0) out += ":l" + std::to_string(level);
    return out;
  }
};

/// A discrete distribution over textual hypotheses. `support[i]` carries
/// probability `probs[i]`; the two vectors always have equal length.
struct Distribution {
  std::vector<std::string> support;
  std::vector<double> probs;

  /// Shannon entropy in nats, with 0 * ln 0 taken as 0.
  double entropy_nats() const {
    double h = 0.0;
    for (double p : probs) {
      if (p > 0.0) h -= p * std::log(p);
    }
    return h;
  }

  /// Index of the largest probability; the lowest index wins ties.
  std::size_t argmax_index() const {
    if (probs.empty()) throw InternalError("argmax of empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
      if (probs[i] > probs[best]) best = i;
    }
    return best;
  }

  void validate(double tol = 1e-9) const {
    if (support.size() != probs.size()) {
      throw InternalError("distribution support/probs size mismatch");
    }
    double sum = 0.0;
    for (double p : probs) {
      if (p < -tol || p > 1.0 + tol) throw InternalError("probability out of range");
      sum += p;
    }
    if (!support.empty() && std::abs(sum - 1.0) > tol) {
      throw InternalError("distribution does not sum to 1");
    }
  }

  static Distribution uniform(std::vector<std::string> support) {
    Distribution d;
    d.probs.assign(support.size(), support.empty() ? 0.0 : 1.0 / support.size());
    d.support = std::move(support);
    return d;
  }
};

}  // namespace invplan
