#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "invplan/engine.hpp"
#include "invplan/oracle_cache.hpp"

/// @file
/// Automated model discovery: turn a story and question into a timeline and
/// query, start from a minimal model, grow it one variable or one timestep at
/// a time while the posterior stays too uncertain, and answer from the most
/// useful model found.

namespace invplan {

struct DiscoveryConfig {
  double alpha = 0.02;    // complexity cost per latent variable instance
  double u_min = -0.693;  // utility threshold; -ln 2, a fair binary coin
  int max_level = 4;
  unsigned seed = 0;
  int default_num_hypotheses = 3;
  bool reduce = true;
  bool use_cache = true;  // memoize backend calls within one discovery run

  void validate() const {
    if (alpha <= 0.0) throw ConfigError("alpha must be positive");
    if (max_level < 0) throw ConfigError("max_level must be non-negative");
  }
};

/// Confidence/cost breakdown for one evaluated model.
struct UtilityReport {
  double reward = 0.0;  // -H(posterior), nats
  double cost = 0.0;    // alpha * |M|
  double utility = 0.0; // reward - cost, exactly
  Distribution posterior;
  ModelSpec model;
};

inline UtilityReport utility(const Distribution& posterior,
                             const ModelSpec& spec,
                             const DiscoveryConfig& cfg) {
  cfg.validate();
  UtilityReport report;
  report.reward = -posterior.entropy_nats();
  report.cost = cfg.alpha * model_complexity(spec);
  report.utility = report.reward - report.cost;
  report.posterior = posterior;
  report.model = spec;
  return report;
}

enum class TerminationReason { ThresholdMet, SpaceExhausted };

inline const char* to_string(TerminationReason reason) {
  return reason == TerminationReason::ThresholdMet ? "threshold_met"
                                                   : "space_exhausted";
}

/// One accepted model along the discovery path.
struct DiscoveryStep {
  ModelSpec model;
  UtilityReport report;
  std::optional<Adjustment> adjustment;  // empty for a window's initial model
  std::vector<std::string> warnings;
};

struct DiscoveryTrace {
  std::string question;
  std::vector<DiscoveryStep> steps;  // accepted path, in order
  std::string final_answer;
  UtilityReport final_report;  // the model the answer was read from
  TerminationReason terminated_by = TerminationReason::SpaceExhausted;
  std::string clamped;     // "<kind>: <text>" when side information was pinned
  int models_evaluated = 0;  // accepted and rejected alike
  long factor_evaluations = 0;
  long backend_propose_calls = 0;  // cache misses that reached the backend
  long backend_judge_calls = 0;
};

/// Menu handed to the variable-identification template.
inline constexpr const char* kVariableMenu =
    "[\"State\", \"Observation\", \"Belief\", \"Action\", \"Utterance\", "
    "\"Goal\"]";

/// In-context example for the initial-model template. Constant so that
/// fixtures and caches key on stable request text.
inline constexpr const char* kModelExampleQuestion =
    "Where will Grace look for the watering can?";
inline constexpr const char* kModelExampleAnswer =
    "[\"State\", \"Observation\", \"Belief\"]";

namespace detail {

inline std::string join(const std::vector<std::string>& items,
                        const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

/// Detect templates answer ["A", "evidence"] or ["B", ""].
inline std::string detect_evidence(Oracle& oracle, PromptKind kind,
                                   const Slots& slots) {
  const std::vector<std::string> response = oracle.propose(kind, slots, 2);
  if (response.size() >= 2 && (response[0] == "A" || response[0] == "a")) {
    return response[1];
  }
  return "";
}

}  // namespace detail

/// Everything extraction learns about one story/question pair. `level` is the
/// nesting depth of the question ("does A think that B thinks...").
struct ExtractionResult {
  Timeline timeline;
  Query query;
  int level = 0;
};

/// Builds the timeline and query from raw text via the extraction templates.
/// Timeline steps are delimited by the queried character's actions; the
/// detected state text anchors the first step and carries forward. Runs once
/// per query; everything downstream reuses the result.
inline ExtractionResult extract_information(
    Oracle& oracle, const std::string& story, const std::string& question,
    const std::vector<std::string>& candidates) {
  if (story.empty() || question.empty()) {
    throw ExtractionFailure("story and question must be non-empty");
  }
  const std::string choices = detail::join(candidates, "; ");

  const std::vector<std::string> main_agent = oracle.propose(
      PromptKind::IdentifyMainAgent,
      {{"question", question}, {"choices", choices}}, 1);
  if (main_agent.empty() || main_agent[0].empty()) {
    throw ExtractionFailure("could not identify the queried character");
  }
  const std::string agent = main_agent[0];

  ExtractionResult out;
  Timeline& tl = out.timeline;
  tl.target_agent = agent;
  tl.agents =
      oracle.propose(PromptKind::IdentifyAllAgents, {{"story", story}}, 8);
  if (std::find(tl.agents.begin(), tl.agents.end(), agent) == tl.agents.end()) {
    tl.agents.insert(tl.agents.begin(), agent);
  }

  const std::vector<std::string> actions = oracle.propose(
      PromptKind::ExtractActionsOfAgent,
      {{"inf_agent", agent}, {"story", story}}, 64);
  if (actions.empty()) {
    throw ExtractionFailure("no actions of " + agent +
                            " found to anchor the timeline");
  }

  const std::string state_text = detail::detect_evidence(
      oracle, PromptKind::DetectState, {{"story", story}});
  for (std::size_t i = 0; i < actions.size(); ++i) {
    TimelineStep step;
    if (i == 0) step.state = state_text;
    step.action = actions[i];
    tl.steps.push_back(std::move(step));
  }

  const std::pair<PromptKind, VariableKind> kDetectors[] = {
      {PromptKind::DetectAction, VariableKind::Action},
      {PromptKind::DetectBelief, VariableKind::Belief},
      {PromptKind::DetectGoal, VariableKind::Goal},
      {PromptKind::DetectObservation, VariableKind::Observation},
  };
  for (const auto& [kind, var] : kDetectors) {
    const std::string evidence = detail::detect_evidence(
        oracle, kind, {{"character", agent}, {"story", story}});
    if (!evidence.empty()) tl.evidence.emplace_back(to_string(var), evidence);
  }
  if (!state_text.empty()) {
    tl.evidence.emplace_back(to_string(VariableKind::State), state_text);
  }

  VariableKind target_kind = VariableKind::Belief;
  const std::vector<std::string> kind_answer = oracle.propose(
      PromptKind::IdentifyInferredVariable,
      {{"variables", kVariableMenu}, {"choices", choices}}, 1);
  if (!kind_answer.empty()) {
    try {
      target_kind = variable_kind_from_string(lowercase(
          normalize_whitespace(kind_answer[0])));
    } catch (const InputError&) {
      // keep the belief default
    }
  }
  // A "state" answer means the candidates describe the world; the agent's
  // belief is the latent that ranges over those descriptions.
  if (target_kind == VariableKind::State) target_kind = VariableKind::Belief;

  const std::vector<std::string> higher = oracle.propose(
      PromptKind::DetectHigherOrder, {{"question", question}}, 1);
  out.level =
      (!higher.empty() && lowercase(normalize_whitespace(higher[0])) == "yes")
          ? 1
          : 0;

  const std::vector<std::string> extra = oracle.propose(
      PromptKind::ExtractExtraInfo, {{"question", question}}, 1);
  std::string extra_info;
  if (!extra.empty() && normalize_whitespace(extra[0]) != "NONE") {
    extra_info = extra[0];
  }

  Query& q = out.query;
  q.question = question;
  q.candidates = candidates;
  q.extra_info = extra_info;
  q.target.kind = target_kind;
  q.target.level = 0;
  const int t = tl.num_steps();
  q.target.timestep = (target_kind == VariableKind::Action ||
                       target_kind == VariableKind::Utterance)
                          ? t + 1
                          : t;
  q.target.agent = agent;
  // Nested questions bottom out in the other character's mind on odd depths.
  if (out.level > 0 && out.level % 2 == 1) {
    for (const std::string& other : tl.agents) {
      if (other != agent) { q.target.agent = other; break; }
    }
  }
  return out;
}

/// Minimal model over the last timestep, with variables picked by the
/// initial-proposal template. Unrecognized proposals fall back to
/// state+observation+belief, noted in `note`. The query target is always
/// forced to be a latent of the model.
inline ModelSpec propose_initial_model(Oracle& oracle, const Timeline& timeline,
                                       const Query& query, int level,
                                       std::string* note = nullptr) {
  std::vector<std::string> vars;
  vars = oracle.propose(PromptKind::ProposeInitialModel,
                        {{"example_question", kModelExampleQuestion},
                         {"example_answer", kModelExampleAnswer},
                         {"question", query.question}},
                        6);
  bool state = false, obs = false, belief = false, action = false, goal = false;
  for (const std::string& raw : vars) {
    const std::string v = lowercase(normalize_whitespace(raw));
    if (v.find("state") != std::string::npos) state = true;
    if (v.find("observation") != std::string::npos) obs = true;
    if (v.find("belief") != std::string::npos) belief = true;
    if (v.find("action") != std::string::npos) action = true;
    if (v.find("goal") != std::string::npos) goal = true;
  }
  if (!(state || obs || belief || action || goal)) {
    if (note) *note = "initial proposal unparsable; using state, observation, belief";
    obs = belief = true;
  }
  if (obs && !belief) belief = true;  // an observation only feeds a belief
  switch (query.target.kind) {
    case VariableKind::Belief: belief = true; break;
    case VariableKind::Observation: obs = belief = true; break;
    case VariableKind::Goal: goal = true; break;
    default: break;
  }

  StepConfig cfg;
  cfg.channel = Channel::Action;
  cfg.belief = belief ? (level >= 1 ? BeliefMode::OfInteractiveState
                                    : BeliefMode::OfState)
                      : BeliefMode::None;
  cfg.observation = obs && belief;
  cfg.goal = goal ? GoalMode::ChannelPlusGoal
                  : (action ? GoalMode::ChannelOnly : GoalMode::ChannelIrrelevant);

  ModelSpec spec;
  spec.window_start = spec.window_end = std::max(1, timeline.num_steps());
  spec.steps = {cfg};
  spec.agent = timeline.target_agent;
  spec.level = level;
  spec.validate();
  return spec;
}

/// Widens the window by one earlier step, which receives the initial
/// per-step structure; variable adjustment then restarts.
inline ModelSpec adjust_timestep(const ModelSpec& spec,
                                 const StepConfig& initial_cfg) {
  if (spec.window_start <= 1) {
    throw WindowExhausted("the model window already starts at the first step");
  }
  ModelSpec out = spec;
  out.window_start -= 1;
  out.steps.insert(out.steps.begin(), initial_cfg);
  return out;
}

namespace detail {

inline VariableKind clamp_kind_for(const std::string& text) {
  const std::string t = lowercase(text);
  if (t.find("believ") != std::string::npos ||
      t.find("think") != std::string::npos ||
      t.find("assume") != std::string::npos) {
    return VariableKind::Belief;
  }
  return VariableKind::Goal;
}

}  // namespace detail

/// A caller-supplied replacement for one variable's sampled hypothesis set,
/// e.g. a human correcting what the backend proposed.
struct HypothesisOverride {
  VariableRef var;
  std::vector<std::string> texts;
};

class ModelDiscovery {
 public:
  ModelDiscovery(Oracle& backend, DiscoveryConfig cfg = {},
                 OracleConfig oracle_cfg = {})
      : backend_(backend), cfg_(cfg), oracle_cfg_(std::move(oracle_cfg)) {
    cfg_.validate();
    oracle_cfg_.validate();
  }

  /// Full pipeline: extraction, then the discovery loop.
  DiscoveryTrace discover(const std::string& story, const std::string& question,
                          const std::vector<std::string>& candidates) {
    ExtractionResult extracted =
        extract_information(backend_, story, question, candidates);
    return discover_from(extracted.timeline, extracted.query, extracted.level);
  }

  /// Discovery loop over an already-built timeline (pre-structured input).
  DiscoveryTrace discover_from(const Timeline& timeline, const Query& query_in,
                               int level = 0,
                               const std::vector<HypothesisOverride>& overrides = {}) {
    CachingOracle cache(backend_);
    Oracle& source = cfg_.use_cache ? static_cast<Oracle&>(cache) : backend_;
    EngineConfig engine_cfg;
    engine_cfg.default_num_hypotheses = cfg_.default_num_hypotheses;
    engine_cfg.max_level = cfg_.max_level;
    engine_cfg.reduce = cfg_.reduce;
    engine_cfg.seed = cfg_.seed;
    InferenceEngine engine(source, oracle_cfg_, engine_cfg);
    for (const HypothesisOverride& over : overrides) {
      engine.set_hypotheses(over.var, over.texts);
    }

    const long propose_before = backend_.stats().propose_calls.load();
    const long judge_before = backend_.stats().judge_calls.load();

    Query query = query_in;
    DiscoveryTrace trace;
    trace.question = query.question;

    // Side information pins the matching latent instead of widening it,
    // unless it talks about the inference target itself.
    if (!query.extra_info.empty()) {
      const VariableKind kind = detail::clamp_kind_for(query.extra_info);
      if (kind != query.target.kind) {
        if (kind == VariableKind::Goal) {
          VariableRef goal;
          goal.kind = VariableKind::Goal;
          goal.timestep = 0;
          goal.agent = timeline.target_agent;
          goal.level = level;
          engine.clamp(goal, query.extra_info);
        } else {
          for (int t = 1; t <= timeline.num_steps(); ++t) {
            VariableRef belief;
            belief.kind = VariableKind::Belief;
            belief.timestep = t;
            belief.agent = timeline.target_agent;
            belief.level = level;
            engine.clamp(belief, query.extra_info);
          }
        }
        trace.clamped = std::string(to_string(kind)) + ": " + query.extra_info;
      }
    }

    std::string proposal_note;
    const ModelSpec initial =
        propose_initial_model(source, timeline, query, level, &proposal_note);
    const StepConfig initial_cfg = initial.steps[0];

    std::optional<UtilityReport> best_seen;
    auto remember = [&best_seen](const UtilityReport& report) {
      if (!best_seen || report.utility > best_seen->utility) {
        best_seen = report;
      }
    };

    bool finished = false;
    for (int ts = initial.window_end; ts >= 1 && !finished; --ts) {
      ModelSpec spec = initial;
      while (spec.window_start > ts) {
        spec = adjust_timestep(spec, initial_cfg);
      }

      std::vector<std::string> warnings;
      if (!proposal_note.empty() && ts == initial.window_end) {
        warnings.push_back(proposal_note);
      }
      std::optional<UtilityReport> current =
          evaluate_model(engine, spec, timeline, query, &trace, &warnings);
      if (current) {
        trace.steps.push_back({spec, *current, std::nullopt, warnings});
        remember(*current);
      }

      // Greedy variable growth: take the single adjustment with the highest
      // utility, but only while it strictly improves.
      while (!finished) {
        if (current && current->utility >= cfg_.u_min) {
          trace.terminated_by = TerminationReason::ThresholdMet;
          finished = true;
          break;
        }
        std::optional<Adjustment> chosen;
        std::optional<UtilityReport> chosen_report;
        std::vector<std::string> chosen_warnings;
        for (const Adjustment& adj : legal_adjustments(spec)) {
          ModelSpec trial = apply_adjustment(spec, adj);
          std::vector<std::string> trial_warnings;
          std::optional<UtilityReport> report =
              evaluate_model(engine, trial, timeline, query, &trace,
                             &trial_warnings);
          if (!report) continue;
          if (!chosen_report || report->utility > chosen_report->utility) {
            chosen = adj;
            chosen_report = report;
            chosen_warnings = std::move(trial_warnings);
          }
        }
        if (!chosen_report) break;
        if (current && chosen_report->utility <= current->utility) break;
        spec = apply_adjustment(spec, *chosen);
        current = chosen_report;
        trace.steps.push_back({spec, *chosen_report, chosen, chosen_warnings});
        remember(*chosen_report);
      }
    }

    UtilityReport final_report;
    if (trace.terminated_by == TerminationReason::ThresholdMet && !trace.steps.empty()) {
      final_report = trace.steps.back().report;
    } else if (best_seen) {
      final_report = *best_seen;
    } else {
      final_report.posterior = Distribution::uniform(query.candidates);
      final_report.model = initial;
      final_report.reward = -final_report.posterior.entropy_nats();
      final_report.cost = cfg_.alpha * model_complexity(initial);
      final_report.utility = final_report.reward - final_report.cost;
    }
    trace.final_report = final_report;
    trace.final_answer = final_report.posterior.support.empty()
                             ? ""
                             : final_report.posterior.support
                                   [final_report.posterior.argmax_index()];
    trace.factor_evaluations = engine.stats().factor_evaluations;
    trace.backend_propose_calls =
        backend_.stats().propose_calls.load() - propose_before;
    trace.backend_judge_calls =
        backend_.stats().judge_calls.load() - judge_before;
    return trace;
  }

 private:
  /// Runs the matching inference for one model; an empty hypothesis proposal
  /// abandons this model only.
  std::optional<UtilityReport> evaluate_model(InferenceEngine& engine,
                                              const ModelSpec& spec,
                                              const Timeline& timeline,
                                              const Query& query,
                                              DiscoveryTrace* trace,
                                              std::vector<std::string>* warnings) {
    ++trace->models_evaluated;
    try {
      PosteriorResult result;
      if (query.target.kind == VariableKind::Action ||
          query.target.kind == VariableKind::Utterance) {
        result = engine.predict_future(spec, timeline, query);
      } else if (spec.level >= 1) {
        result = engine.recursive_infer(spec, timeline, query);
      } else {
        result = engine.exact_posterior(spec, timeline, query);
      }
      if (warnings) {
        warnings->insert(warnings->end(), result.warnings.begin(),
                         result.warnings.end());
      }
      return utility(result.posterior, spec, cfg_);
    } catch (const EmptyProposal&) {
      return std::nullopt;
    }
  }

  Oracle& backend_;
  DiscoveryConfig cfg_;
  OracleConfig oracle_cfg_;
};

inline nlohmann::ordered_json model_to_json(const ModelSpec& spec) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const StepConfig& cfg : spec.steps) {
    steps.push_back({{"channel", to_string(cfg.channel)},
                     {"belief", to_string(cfg.belief)},
                     {"observation", cfg.observation},
                     {"goal", to_string(cfg.goal)}});
  }
  return nlohmann::ordered_json{{"window", {spec.window_start, spec.window_end}},
                                {"agent", spec.agent},
                                {"level", spec.level},
                                {"steps", std::move(steps)}};
}

inline nlohmann::ordered_json distribution_to_json(const Distribution& d) {
  return nlohmann::ordered_json{{"support", d.support}, {"probs", d.probs}};
}

inline nlohmann::ordered_json trace_to_json(const DiscoveryTrace& trace) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const DiscoveryStep& step : trace.steps) {
    nlohmann::ordered_json entry{
        {"model", model_to_json(step.model)},
        {"adjustment", step.adjustment ? nlohmann::ordered_json(step.adjustment->str())
                                       : nlohmann::ordered_json(nullptr)},
        {"reward", step.report.reward},
        {"cost", step.report.cost},
        {"utility", step.report.utility},
        {"posterior", distribution_to_json(step.report.posterior)},
        {"warnings", step.warnings}};
    steps.push_back(std::move(entry));
  }
  return nlohmann::ordered_json{
      {"question", trace.question},
      {"final_answer", trace.final_answer},
      {"final_posterior", distribution_to_json(trace.final_report.posterior)},
      {"final_utility", trace.final_report.utility},
      {"terminated_by", to_string(trace.terminated_by)},
      {"clamped", trace.clamped.empty() ? nlohmann::ordered_json(nullptr)
                                        : nlohmann::ordered_json(trace.clamped)},
      {"steps", std::move(steps)},
      {"models_evaluated", trace.models_evaluated},
      {"factor_evaluations", trace.factor_evaluations},
      {"backend_calls", {{"propose", trace.backend_propose_calls},
                         {"judge", trace.backend_judge_calls}}}};
}

}  // namespace invplan
