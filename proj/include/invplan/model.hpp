#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "invplan/types.hpp"

/// @file
/// Model representation: per-step structure choices, the model window, the
/// factorization into local conditionals, and the structure adjustments that
/// grow a model one variable at a time.

namespace invplan {

/// Which observable channel the modelled agent emits at a step.
enum class Channel { Action, Utterance };

/// What the agent's belief at a step ranges over, if it has one.
enum class BeliefMode { None, OfState, OfInteractiveState };

/// How the channel enters the model. ChannelIrrelevant keeps the action or
/// utterance out of the likelihood entirely; ChannelOnly conditions it on the
/// world or belief; ChannelPlusGoal additionally conditions on a goal.
enum class GoalMode { ChannelIrrelevant, ChannelOnly, ChannelPlusGoal };

inline const char* to_string(Channel c) {
  return c == Channel::Action ? "action" : "utterance";
}
inline const char* to_string(BeliefMode m) {
  switch (m) {
    case BeliefMode::None: return "none";
    case BeliefMode::OfState: return "of_state";
    case BeliefMode::OfInteractiveState: return "of_interactive_state";
  }
  throw InternalError("unknown BeliefMode");
}
inline const char* to_string(GoalMode m) {
  switch (m) {
    case GoalMode::ChannelIrrelevant: return "channel_irrelevant";
    case GoalMode::ChannelOnly: return "channel_only";
    case GoalMode::ChannelPlusGoal: return "channel_plus_goal";
  }
  throw InternalError("unknown GoalMode");
}

/// Structure choices for a single modelled timestep.
struct StepConfig {
  Channel channel = Channel::Action;
  BeliefMode belief = BeliefMode::None;
  bool observation = false;
  GoalMode goal = GoalMode::ChannelIrrelevant;

  bool valid() const {
    // An observation only exists to feed a belief update.
    return !(observation && belief == BeliefMode::None);
  }

  friend bool operator==(const StepConfig& a, const StepConfig& b) {
    return a.channel == b.channel && a.belief == b.belief &&
           a.observation == b.observation && a.goal == b.goal;
  }
};

/// All valid per-step structures: two channels, five belief/observation
/// combinations, three channel conditionings.
inline std::vector<StepConfig> enumerate_step_configs() {
  static const std::pair<BeliefMode, bool> kBeliefObs[] = {
      {BeliefMode::None, false},
      {BeliefMode::OfState, false},
      {BeliefMode::OfInteractiveState, false},
      {BeliefMode::OfState, true},
      {BeliefMode::OfInteractiveState, true},
  };
  std::vector<StepConfig> out;
  for (Channel ch : {Channel::Action, Channel::Utterance}) {
    for (const auto& [belief, obs] : kBeliefObs) {
      for (GoalMode goal : {GoalMode::ChannelIrrelevant, GoalMode::ChannelOnly,
                            GoalMode::ChannelPlusGoal}) {
        out.push_back(StepConfig{ch, belief, obs, goal});
      }
    }
  }
  return out;
}

/// A model over the window [window_start, window_end] of the story, holding
/// one StepConfig per step. `level` is the nesting depth of the modelled
/// agent's reasoning; level 0 reasons about the physical world only.
struct ModelSpec {
  int window_start = 1;
  int window_end = 1;
  std::vector<StepConfig> steps;  // steps[i] configures window_start + i
  std::string agent;
  int level = 0;

  const StepConfig& step_at(int t) const {
    if (t < window_start || t > window_end) {
      throw InternalError("timestep " + std::to_string(t) + " outside window");
    }
    return steps[static_cast<std::size_t>(t - window_start)];
  }
  StepConfig& step_at(int t) {
    return const_cast<StepConfig&>(
        static_cast<const ModelSpec&>(*this).step_at(t));
  }

  void validate() const {
    if (window_start < 1 || window_end < window_start) {
      throw ConfigError("model window [" + std::to_string(window_start) + "," +
                        std::to_string(window_end) + "] is malformed");
    }
    if (steps.size() != static_cast<std::size_t>(window_end - window_start + 1)) {
      throw ConfigError("model has " + std::to_string(steps.size()) +
                        " step configs for a window of " +
                        std::to_string(window_end - window_start + 1));
    }
    for (const StepConfig& cfg : steps) {
      if (!cfg.valid()) {
        throw ConfigError("step config has an observation but no belief");
      }
      if (cfg.belief == BeliefMode::OfInteractiveState && level < 1) {
        throw ConfigError("belief over an interactive state requires level >= 1");
      }
    }
  }
};

/// One story step as seen from outside the agent's head. `state` and the
/// channel fields hold verbatim story text; empty means not stated.
struct TimelineStep {
  std::string state;
  std::string action;
  std::string utterance;
};

struct Timeline {
  std::vector<TimelineStep> steps;  // steps[0] is timestep 1
  std::vector<std::string> agents;
  std::string target_agent;
  /// Per-kind evidence sentences detected in the story, used to steer
  /// hypothesis sampling. Keyed by to_string(VariableKind).
  std::vector<std::pair<std::string, std::string>> evidence;

  int num_steps() const { return static_cast<int>(steps.size()); }

  const TimelineStep& step(int t) const {
    if (t < 1 || t > num_steps()) {
      throw InternalError("timeline step " + std::to_string(t) + " out of range");
    }
    return steps[static_cast<std::size_t>(t - 1)];
  }

  /// Latest stated world state at or before `t`; tracking the previous state
  /// forward stands in for unstated intermediate states.
  std::string state_at(int t) const {
    for (int k = std::min(t, num_steps()); k >= 1; --k) {
      if (!step(k).state.empty()) return step(k).state;
    }
    return "";
  }

  std::string evidence_for(VariableKind kind) const {
    for (const auto& [k, text] : evidence) {
      if (k == to_string(kind)) return text;
    }
    return "";
  }
};

/// What the caller wants inferred, plus any answer candidates the question
/// supplies. `extra_info` is a clause like "given that X", which clamps the
/// matching model variable instead of letting it range over hypotheses.
struct Query {
  VariableRef target;
  std::vector<std::string> candidates;
  std::string extra_info;
  std::string question;
};

/// Kinds of local conditionals a factorization can contain.
enum class FactorKind {
  ObservationGivenState,
  BeliefUpdate,
  ActionPolicy,
  UtterancePolicy,
  GoalPrior,
  BeliefPrior,       // uniform prior mass over a window-start belief
  StateTransition,   // world dynamics; determined states make it constant
};

inline const char* to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::ObservationGivenState: return "observation_given_state";
    case FactorKind::BeliefUpdate: return "belief_update";
    case FactorKind::ActionPolicy: return "action_policy";
    case FactorKind::UtterancePolicy: return "utterance_policy";
    case FactorKind::GoalPrior: return "goal_prior";
    case FactorKind::BeliefPrior: return "belief_prior";
    case FactorKind::StateTransition: return "state_transition";
  }
  throw InternalError("unknown FactorKind");
}

/// One local conditional P(child | parents).
struct Factor {
  FactorKind kind;
  VariableRef child;
  std::vector<VariableRef> parents;

  std::string str() const {
    std::string out = std::string(to_string(kind)) + ": " + child.str() + " |";
    for (const VariableRef& p : parents) out += " " + p.str();
    return out;
  }
};

namespace detail {

inline VariableRef make_ref(VariableKind kind, int t, const ModelSpec& spec) {
  VariableRef ref;
  ref.kind = kind;
  ref.timestep = kind == VariableKind::Goal ? 0 : t;
  ref.agent = spec.agent;
  ref.level = spec.level;
  return ref;
}

}  // namespace detail

/// Decomposes the joint over the model window into local conditionals.
///
/// Per step: an observation factor if the step has one, a belief-update
/// factor if the step has a belief, and a channel policy factor unless the
/// channel is irrelevant. A single goal prior comes last when any step
/// conditions on the goal. The belief update at the window start keeps a
/// previous-belief parent at window_start - 1; that anchor is the only
/// reference allowed outside the window and carries a uniform prior.
inline std::vector<Factor> factorize(const ModelSpec& spec) {
  spec.validate();
  std::vector<Factor> factors;
  bool any_goal = false;
  for (int t = spec.window_start; t <= spec.window_end; ++t) {
    const StepConfig& cfg = spec.step_at(t);
    const VariableKind world_kind = cfg.belief == BeliefMode::OfInteractiveState
                                        ? VariableKind::InteractiveState
                                        : VariableKind::State;
    const VariableRef world = detail::make_ref(world_kind, t, spec);
    if (cfg.observation) {
      factors.push_back(Factor{FactorKind::ObservationGivenState,
                               detail::make_ref(VariableKind::Observation, t, spec),
                               {world}});
    }
    if (cfg.belief != BeliefMode::None) {
      const VariableRef evidence_parent =
          cfg.observation ? detail::make_ref(VariableKind::Observation, t, spec)
                          : world;
      factors.push_back(Factor{FactorKind::BeliefUpdate,
                               detail::make_ref(VariableKind::Belief, t, spec),
                               {evidence_parent,
                                detail::make_ref(VariableKind::Belief, t - 1, spec)}});
    }
    if (cfg.goal != GoalMode::ChannelIrrelevant) {
      const VariableKind channel_kind = cfg.channel == Channel::Action
                                            ? VariableKind::Action
                                            : VariableKind::Utterance;
      const FactorKind policy_kind = cfg.channel == Channel::Action
                                         ? FactorKind::ActionPolicy
                                         : FactorKind::UtterancePolicy;
      std::vector<VariableRef> parents;
      parents.push_back(cfg.belief != BeliefMode::None
                            ? detail::make_ref(VariableKind::Belief, t, spec)
                            : detail::make_ref(VariableKind::State, t, spec));
      if (cfg.goal == GoalMode::ChannelPlusGoal) {
        parents.push_back(detail::make_ref(VariableKind::Goal, t, spec));
        any_goal = true;
      }
      factors.push_back(Factor{policy_kind,
                               detail::make_ref(channel_kind, t, spec),
                               std::move(parents)});
    }
  }
  if (any_goal) {
    factors.push_back(Factor{FactorKind::GoalPrior,
                             detail::make_ref(VariableKind::Goal, 0, spec),
                             {}});
  }
  return factors;
}

/// Number of latent mental variable instances in the model: one per
/// observation, one per belief, one extra per interactive state a belief
/// ranges over, and one per distinct goal.
inline int model_complexity(const ModelSpec& spec) {
  int count = 0;
  bool any_goal = false;
  for (const StepConfig& cfg : spec.steps) {
    if (cfg.observation) ++count;
    if (cfg.belief != BeliefMode::None) ++count;
    if (cfg.belief == BeliefMode::OfInteractiveState) ++count;
    if (cfg.goal == GoalMode::ChannelPlusGoal) any_goal = true;
  }
  if (any_goal) ++count;
  return count;
}

/// Single-variable structure adjustments, each grounded in a rewrite of one
/// local conditional: adding a goal conditions an unconditioned or
/// belief/state-conditioned channel on a goal; adding a belief re-parents a
/// state-conditioned policy onto a belief plus its update; adding an
/// observation splits a state-driven belief update; lifting a belief makes
/// it range over an interactive state.
enum class AdjustmentKind {
  AddGoal,
  AddBelief,
  AddObservation,
  LiftToInteractiveState,
};

inline const char* to_string(AdjustmentKind kind) {
  switch (kind) {
    case AdjustmentKind::AddGoal: return "add_goal";
    case AdjustmentKind::AddBelief: return "add_belief";
    case AdjustmentKind::AddObservation: return "add_observation";
    case AdjustmentKind::LiftToInteractiveState: return "lift_to_interactive_state";
  }
  throw InternalError("unknown AdjustmentKind");
}

struct Adjustment {
  AdjustmentKind kind;
  int timestep = 0;

  std::string str() const {
    return std::string(to_string(kind)) + "@" + std::to_string(timestep);
  }
};

/// True when the adjustment's rewrite pattern is present at the step.
inline bool adjustment_legal(const ModelSpec& spec, const Adjustment& adj) {
  if (adj.timestep < spec.window_start || adj.timestep > spec.window_end) {
    return false;
  }
  const StepConfig& cfg = spec.step_at(adj.timestep);
  switch (adj.kind) {
    case AdjustmentKind::AddGoal:
      return cfg.goal != GoalMode::ChannelPlusGoal;
    case AdjustmentKind::AddBelief:
      // Requires a state-conditioned channel to re-parent.
      return cfg.belief == BeliefMode::None &&
             cfg.goal != GoalMode::ChannelIrrelevant;
    case AdjustmentKind::AddObservation:
      return cfg.belief != BeliefMode::None && !cfg.observation;
    case AdjustmentKind::LiftToInteractiveState:
      return cfg.belief == BeliefMode::OfState && spec.level >= 1;
  }
  return false;
}

/// Applies one adjustment, returning the grown model. The input is left
/// untouched. Throws IllegalAdjustment when the rewrite pattern is absent.
inline ModelSpec apply_adjustment(const ModelSpec& spec, const Adjustment& adj) {
  if (!adjustment_legal(spec, adj)) {
    throw IllegalAdjustment("adjustment " + adj.str() +
                            " has no matching conditional in the model");
  }
  ModelSpec out = spec;
  StepConfig& cfg = out.step_at(adj.timestep);
  switch (adj.kind) {
    case AdjustmentKind::AddGoal:
      cfg.goal = GoalMode::ChannelPlusGoal;
      break;
    case AdjustmentKind::AddBelief:
      cfg.belief = BeliefMode::OfState;
      break;
    case AdjustmentKind::AddObservation:
      cfg.observation = true;
      break;
    case AdjustmentKind::LiftToInteractiveState:
      cfg.belief = BeliefMode::OfInteractiveState;
      break;
  }
  return out;
}

/// Every legal (kind, timestep) pair, steps ascending, kinds in enum order.
inline std::vector<Adjustment> legal_adjustments(const ModelSpec& spec) {
  std::vector<Adjustment> out;
  for (int t = spec.window_start; t <= spec.window_end; ++t) {
    for (AdjustmentKind kind :
         {AdjustmentKind::AddGoal, AdjustmentKind::AddBelief,
          AdjustmentKind::AddObservation, AdjustmentKind::LiftToInteractiveState}) {
      Adjustment adj{kind, t};
      if (adjustment_legal(spec, adj)) out.push_back(adj);
    }
  }
  return out;
}

}  // namespace invplan
