#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "invplan/model.hpp"
#include "invplan/oracle.hpp"

/// @file
/// Posterior inference over a factorized model: hypothesis sampling, pruning
/// of implausible hypotheses, exact enumeration of the joint, future-channel
/// prediction, and nested inference for models of agents modelling agents.

namespace invplan {

/// Where a hypothesis set came from. Extracted sets are pinned by the query's
/// side information and never pruned or resampled.
enum class HypothesisOrigin { Sampled, FromCandidates, Extracted };

inline const char* to_string(HypothesisOrigin origin) {
  switch (origin) {
    case HypothesisOrigin::Sampled: return "sampled";
    case HypothesisOrigin::FromCandidates: return "from_candidates";
    case HypothesisOrigin::Extracted: return "extracted";
  }
  throw InternalError("unknown HypothesisOrigin");
}

/// Candidate values for one latent variable. Texts are distinct; order is
/// meaningful (candidate order for the query target).
struct HypothesisSet {
  VariableRef variable;
  std::vector<std::string> hypotheses;
  HypothesisOrigin origin = HypothesisOrigin::Sampled;
};

/// One joint choice of hypothesis per latent variable.
using Assignment = std::map<VariableRef, std::string>;

struct EngineConfig {
  int default_num_hypotheses = 3;  // per non-target latent variable
  int max_level = 4;
  bool reduce = true;
  /// false: nested inference instantiates the lower world with the argmax
  /// state (lowest index on ties); true: a seeded draw from the posterior.
  bool stochastic_state_selection = false;
  unsigned seed = 0;
};

struct EngineStats {
  long factor_evaluations = 0;
  long assignments_enumerated = 0;
  long hypotheses_pruned = 0;
};

struct PosteriorResult {
  Distribution posterior;
  /// Unnormalized total joint mass; 0 means the evidence ruled everything out
  /// and the posterior fell back to uniform.
  double evidence = 0.0;
  std::vector<HypothesisSet> sets;  // post-pruning sets, enumeration order
  std::vector<std::string> warnings;
};

/// Stand-in text for the belief parent just before the window starts.
inline constexpr const char* kNoPriorBelief = "no earlier belief";

/// Placeholder goal text for policies the model leaves goal-free.
inline constexpr const char* kUnspecifiedGoal = "(unspecified)";

using FactorTrace =
    std::function<void(const Factor&, const Assignment&, double)>;

class InferenceEngine {
 public:
  InferenceEngine(Oracle& oracle, OracleConfig oracle_cfg,
                  EngineConfig cfg = {})
      : oracle_(oracle), oracle_cfg_(std::move(oracle_cfg)), cfg_(cfg) {}

  /// Pins a variable to a single known value (side information from the
  /// question). Clamped variables trump sampling and candidates.
  void clamp(const VariableRef& var, const std::string& text) {
    clamps_[var] = text;
  }
  void clear_clamps() { clamps_.clear(); }

  /// Sampled sets persist across calls so that successive models over the
  /// same story reuse hypotheses instead of re-asking the backend.
  void clear_hypothesis_cache() { set_cache_.clear(); }

  /// Pre-seeds the candidate set for `var`, standing in for whatever the
  /// backend would have proposed. Clamps and query candidates still win.
  void set_hypotheses(const VariableRef& var, std::vector<std::string> texts) {
    if (texts.empty()) {
      throw ConfigError("hypothesis override for " + var.str() + " is empty");
    }
    set_cache_[var] =
        HypothesisSet{var, std::move(texts), HypothesisOrigin::Extracted};
  }

  void set_factor_trace(FactorTrace trace) { trace_ = std::move(trace); }
  const EngineStats& stats() const { return stats_; }

  /// Candidate values for `var`. The query target with candidates gets
  /// exactly those candidates; a belief step with no fresh observation keeps
  /// the previous step's set; everything else is proposed by the oracle,
  /// steered by the story evidence for that variable kind.
  HypothesisSet sample_hypotheses(const ModelSpec& spec,
                                  const Timeline& timeline, const Query& query,
                                  const VariableRef& var, int num = 0) {
    if (auto it = clamps_.find(var); it != clamps_.end()) {
      return HypothesisSet{var, {it->second}, HypothesisOrigin::Extracted};
    }
    if (var == query.target && !query.candidates.empty()) {
      return HypothesisSet{var, query.candidates,
                           HypothesisOrigin::FromCandidates};
    }
    if (auto it = set_cache_.find(var); it != set_cache_.end()) {
      return it->second;
    }
    if ((var.kind == VariableKind::Belief) &&
        var.timestep > spec.window_start &&
        !spec.step_at(var.timestep).observation) {
      VariableRef prev = var;
      prev.timestep = var.timestep - 1;
      HypothesisSet carried = sample_hypotheses(spec, timeline, query, prev, num);
      carried.variable = var;
      set_cache_[var] = carried;
      return carried;
    }

    PromptKind kind;
    std::string guide;
    switch (var.kind) {
      case VariableKind::Observation:
        kind = PromptKind::SampleObservation;
        guide = timeline.evidence_for(VariableKind::Observation);
        break;
      case VariableKind::Goal:
        kind = PromptKind::SampleGoal;
        guide = timeline.evidence_for(VariableKind::Goal);
        if (guide.empty()) guide = query.question;
        break;
      case VariableKind::Belief:
      case VariableKind::InteractiveState:
        kind = PromptKind::SampleBelief;
        guide = timeline.evidence_for(VariableKind::Belief);
        break;
      default:
        throw InternalError("sampling requested for observable variable " +
                            var.str());
    }
    if (guide.empty()) guide = timeline.state_at(var.timestep);

    const int want = num > 0 ? num : cfg_.default_num_hypotheses;
    const std::string agent = var.agent.empty() ? timeline.target_agent : var.agent;
    std::vector<std::string> texts = oracle_.propose(
        kind, {{"character", agent}, {"information", guide}}, want);
    if (texts.empty()) {
      throw EmptyProposal("no hypotheses proposed for " + var.str());
    }
    HypothesisSet set{var, std::move(texts), HypothesisOrigin::Sampled};
    set_cache_[var] = set;
    return set;
  }

  /// Drops hypotheses a fully-determined factor judges no more plausible
  /// than the unlikely grade. Only factors with exactly one multi-hypothesis
  /// variable discriminate; a set that would come out empty is kept whole,
  /// and the query target is never pruned away from under the posterior.
  std::vector<HypothesisSet> reduce_hypotheses(
      const std::vector<Factor>& factors, std::vector<HypothesisSet> sets,
      const ModelSpec& spec, const Timeline& timeline,
      const VariableRef* protect, const std::string& state_override = "") {
    auto find_set = [&sets](const VariableRef& v) -> HypothesisSet* {
      for (HypothesisSet& s : sets) {
        if (s.variable == v) return &s;
      }
      return nullptr;
    };
    for (const Factor& factor : factors) {
      if (factor.kind == FactorKind::GoalPrior) continue;
      std::vector<VariableRef> vars = factor.parents;
      vars.push_back(factor.child);

      HypothesisSet* multi = nullptr;
      bool applicable = true;
      for (const VariableRef& v : vars) {
        if (!is_variable(v, spec)) continue;
        HypothesisSet* s = find_set(v);
        if (!s) { applicable = false; break; }
        if (s->hypotheses.size() <= 1) continue;
        if (multi) { applicable = false; break; }  // two undetermined slots
        multi = s;
      }
      if (!applicable || !multi) continue;
      if (protect && multi->variable == *protect) continue;
      if (multi->origin == HypothesisOrigin::Extracted) continue;

      Assignment assignment;
      for (const VariableRef& v : vars) {
        if (!is_variable(v, spec)) continue;
        if (HypothesisSet* s = find_set(v); s && s->hypotheses.size() == 1) {
          assignment[v] = s->hypotheses[0];
        }
      }
      std::vector<std::string> kept;
      for (const std::string& h : multi->hypotheses) {
        assignment[multi->variable] = h;
        const double p =
            evaluate_factor(factor, assignment, spec, timeline, state_override);
        if (p > oracle_cfg_.unlikely_value) kept.push_back(h);
      }
      if (!kept.empty() && kept.size() < multi->hypotheses.size()) {
        stats_.hypotheses_pruned +=
            static_cast<long>(multi->hypotheses.size() - kept.size());
        multi->hypotheses = std::move(kept);
      }
    }
    return sets;
  }

  /// Probability of one local conditional under one assignment. Latent slots
  /// read from the assignment; observable slots read from the timeline unless
  /// the assignment overrides them (used for future-channel candidates);
  /// `state_override` replaces the story state wholesale (used when a nested
  /// model runs inside an instantiated world).
  double evaluate_factor(const Factor& factor, const Assignment& assignment,
                         const ModelSpec& spec, const Timeline& timeline,
                         const std::string& state_override = "") {
    const std::string agent =
        spec.agent.empty() ? timeline.target_agent : spec.agent;
    auto latent_value = [&](const VariableRef& v) -> std::string {
      if (v.kind == VariableKind::Belief && v.timestep < spec.window_start) {
        return kNoPriorBelief;
      }
      auto it = assignment.find(v);
      if (it == assignment.end()) {
        throw InternalError("assignment does not cover " + v.str());
      }
      return it->second;
    };
    auto world_value = [&](const VariableRef& v) -> std::string {
      if (v.kind == VariableKind::InteractiveState) return latent_value(v);
      if (!state_override.empty()) return state_override;
      return timeline.state_at(v.timestep);
    };
    auto channel_value = [&](const VariableRef& v) -> std::string {
      if (auto it = assignment.find(v); it != assignment.end()) {
        return it->second;  // future candidate appended by prediction
      }
      if (v.timestep < 1 || v.timestep > timeline.num_steps()) {
        throw InvalidTrajectory("story has no step " +
                                std::to_string(v.timestep) + " for " + v.str());
      }
      const TimelineStep& step = timeline.step(v.timestep);
      const std::string& text =
          v.kind == VariableKind::Action ? step.action : step.utterance;
      if (text.empty()) {
        throw InvalidTrajectory("the model conditions on " + v.str() +
                                " but the story step has none");
      }
      return text;
    };
    const int t = factor.child.timestep;
    const StepConfig& step_cfg = spec.step_at(
        std::clamp(t, spec.window_start, spec.window_end));

    double p = 0.0;
    switch (factor.kind) {
      case FactorKind::GoalPrior:
        // Uniform over the sampled goal set; a shared constant cancels in
        // normalization, so it contributes 1.
        p = 1.0;
        break;
      case FactorKind::ObservationGivenState: {
        p = judged(PromptKind::LikelihoodObsGivenState,
                   {{"state", world_value(factor.parents[0])},
                    {"inf_agent", agent},
                    {"statement", latent_value(factor.child)}});
        break;
      }
      case FactorKind::BeliefUpdate: {
        const VariableRef& evidence = factor.parents[0];
        const std::string prev = latent_value(factor.parents[1]);
        const std::string statement = latent_value(factor.child);
        if (evidence.kind == VariableKind::Observation) {
          p = judged(PromptKind::LikelihoodBeliefGivenObsPrevBelief,
                     {{"inf_agent", agent},
                      {"previous_belief", prev},
                      {"observation", latent_value(evidence)},
                      {"statement", statement}});
        } else if (t == spec.window_start) {
          p = judged(PromptKind::LikelihoodInitialBelief,
                     {{"inf_agent", agent},
                      {"story", world_value(evidence)},
                      {"statement", statement}});
        } else {
          p = judged(PromptKind::LikelihoodBeliefGivenStatePrevBelief,
                     {{"inf_agent", agent},
                      {"previous_belief", prev},
                      {"state", world_value(evidence)},
                      {"statement", statement}});
        }
        break;
      }
      case FactorKind::ActionPolicy:
      case FactorKind::UtterancePolicy: {
        const std::string value = channel_value(factor.child);
        std::string goal = kUnspecifiedGoal;
        for (const VariableRef& parent : factor.parents) {
          if (parent.kind == VariableKind::Goal) goal = latent_value(parent);
        }
        const VariableRef& driver = factor.parents[0];
        std::string belief_text = driver.kind == VariableKind::Belief
                                      ? latent_value(driver)
                                      : world_value(driver);
        if (factor.kind == FactorKind::UtterancePolicy) {
          p = judged(PromptKind::LikelihoodUtterance,
                     {{"inf_agent", agent},
                      {"belief", belief_text},
                      {"goal", goal},
                      {"utterance", value}});
        } else if (driver.kind == VariableKind::Belief &&
                   step_cfg.belief == BeliefMode::OfInteractiveState) {
          // The belief ranges over another agent's mind; the physical world
          // enters through the plain belief slot.
          std::string world = state_override.empty()
                                  ? timeline.state_at(t)
                                  : state_override;
          p = judged(PromptKind::LikelihoodActionGivenGoalBeliefBeliefOfGoal,
                     {{"inf_agent", agent},
                      {"goal", goal},
                      {"belief", world},
                      {"belief_of_goal", belief_text},
                      {"action", value}});
        } else {
          p = judged(PromptKind::LikelihoodActionGivenGoalBelief,
                     {{"inf_agent", agent},
                      {"goal", goal},
                      {"belief", belief_text},
                      {"action", value}});
        }
        break;
      }
      case FactorKind::BeliefPrior:
      case FactorKind::StateTransition:
        throw InternalError("factorization never emits " +
                            std::string(to_string(factor.kind)));
    }
    ++stats_.factor_evaluations;
    if (trace_) trace_(factor, assignment, p);
    return p;
  }

  /// Normalized posterior over the query target, marginalizing every other
  /// latent variable by full enumeration. Joint mass is accumulated in
  /// enumeration order (last variable fastest) for reproducible floats.
  PosteriorResult exact_posterior(const ModelSpec& spec,
                                  const Timeline& timeline, const Query& query,
                                  const std::string& state_override = "") {
    spec.validate();
    const std::vector<Factor> factors = factorize(spec);
    std::vector<HypothesisSet> sets =
        assemble_sets(factors, spec, timeline, query);
    if (cfg_.reduce) {
      sets = reduce_hypotheses(factors, std::move(sets), spec, timeline,
                               &query.target, state_override);
    }
    return enumerate(factors, std::move(sets), spec, timeline, query.target,
                     state_override);
  }

  /// Same computation over externally supplied hypothesis sets (no sampling,
  /// no pruning).
  PosteriorResult exact_posterior_with_sets(const ModelSpec& spec,
                                            const Timeline& timeline,
                                            const Query& query,
                                            std::vector<HypothesisSet> sets,
                                            const std::string& state_override =
                                                "") {
    spec.validate();
    return enumerate(factorize(spec), std::move(sets), spec, timeline,
                     query.target, state_override);
  }

  /// Scores each candidate next-step channel value by the joint mass of the
  /// model window extended with one policy factor for that value.
  PosteriorResult predict_future(const ModelSpec& spec,
                                 const Timeline& timeline, const Query& query) {
    spec.validate();
    if (query.target.kind != VariableKind::Action &&
        query.target.kind != VariableKind::Utterance) {
      throw ConfigError("future prediction targets an action or utterance");
    }
    if (query.candidates.empty()) {
      throw ConfigError("future prediction needs explicit candidates");
    }
    if (query.target.timestep != spec.window_end + 1) {
      throw ConfigError("future prediction targets the step after the window");
    }
    const std::vector<Factor> factors = factorize(spec);
    std::vector<HypothesisSet> sets =
        assemble_sets(factors, spec, timeline, query);
    if (cfg_.reduce) {
      sets = reduce_hypotheses(factors, std::move(sets), spec, timeline,
                               nullptr);
    }

    // The appended factor mirrors the last window step's policy: driven by
    // its belief when it has one (beliefs persist without new observations),
    // by the world state otherwise, plus the episode goal when modelled.
    const StepConfig& last = spec.step_at(spec.window_end);
    Factor future;
    future.kind = query.target.kind == VariableKind::Action
                      ? FactorKind::ActionPolicy
                      : FactorKind::UtterancePolicy;
    future.child = query.target;
    if (last.belief != BeliefMode::None) {
      future.parents.push_back(
          detail::make_ref(VariableKind::Belief, spec.window_end, spec));
    } else {
      future.parents.push_back(
          detail::make_ref(VariableKind::State, query.target.timestep, spec));
    }
    bool has_goal = false;
    for (const Factor& f : factors) {
      if (f.kind == FactorKind::GoalPrior) has_goal = true;
    }
    if (has_goal) {
      future.parents.push_back(detail::make_ref(VariableKind::Goal, 0, spec));
    }

    std::vector<double> mass(query.candidates.size(), 0.0);
    const std::vector<std::size_t> dims = set_dims(sets);
    std::vector<std::size_t> index(sets.size(), 0);
    bool done = sets.empty() ? false : std::any_of(dims.begin(), dims.end(),
                                                   [](std::size_t d) { return d == 0; });
    if (done) throw InternalError("empty hypothesis set in enumeration");
    bool exhausted = false;
    while (!exhausted) {
      ++stats_.assignments_enumerated;
      Assignment assignment;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        assignment[sets[i].variable] = sets[i].hypotheses[index[i]];
      }
      double base = 1.0;
      for (const Factor& f : factors) {
        base *= evaluate_factor(f, assignment, spec, timeline, state_override_none());
      }
      for (std::size_t c = 0; c < query.candidates.size(); ++c) {
        assignment[query.target] = query.candidates[c];
        mass[c] += base * evaluate_factor(future, assignment, spec, timeline);
        assignment.erase(query.target);
      }
      exhausted = !advance(index, dims);
    }

    PosteriorResult out;
    out.sets = std::move(sets);
    double total = 0.0;
    for (double m : mass) total += m;
    out.evidence = total;
    out.posterior.support = query.candidates;
    if (total <= 0.0) {
      out.posterior = Distribution::uniform(query.candidates);
      out.warnings.push_back("zero evidence: every candidate scored 0; "
                             "falling back to uniform");
    } else {
      for (double m : mass) out.posterior.probs.push_back(m / total);
    }
    out.posterior.validate();
    return out;
  }

  /// Inference for a model of an agent modelling other agents. Each level
  /// picks one world hypothesis from that level's posterior over the nested
  /// mind-and-world bundle and instantiates the next level down with it;
  /// the ground level answers the query. The modelled agent alternates to
  /// the first other agent in the scene at each descent.
  PosteriorResult recursive_infer(const ModelSpec& spec,
                                  const Timeline& timeline,
                                  const Query& query) {
    if (spec.level > cfg_.max_level) {
      throw RecursionDepthExceeded(
          "model level " + std::to_string(spec.level) +
          " exceeds the configured maximum " + std::to_string(cfg_.max_level));
    }
    return recurse(spec, timeline, query, "");
  }

 private:
  static std::string state_override_none() { return ""; }

  /// True for latent slots that range over hypotheses. The belief parent just
  /// before the window start is a constant anchor, not a variable; goals sit
  /// at canonical timestep 0 and are variables regardless of the window.
  static bool is_variable(const VariableRef& v, const ModelSpec& spec) {
    if (!is_latent(v.kind)) return false;
    return v.kind == VariableKind::Goal || v.timestep >= spec.window_start;
  }

  double judged(PromptKind kind, const Slots& slots) {
    return to_probability(oracle_.judge(kind, slots), oracle_cfg_);
  }

  /// Latent variables of the factor list in first-appearance order (parents
  /// before child within a factor); the window-start belief anchor is a
  /// constant, not a variable.
  std::vector<VariableRef> latent_order(const std::vector<Factor>& factors,
                                        const ModelSpec& spec) const {
    std::vector<VariableRef> order;
    auto note = [&](const VariableRef& v) {
      if (!is_variable(v, spec)) return;
      if (std::find(order.begin(), order.end(), v) == order.end()) {
        order.push_back(v);
      }
    };
    for (const Factor& f : factors) {
      for (const VariableRef& p : f.parents) note(p);
      note(f.child);
    }
    return order;
  }

  std::vector<HypothesisSet> assemble_sets(const std::vector<Factor>& factors,
                                           const ModelSpec& spec,
                                           const Timeline& timeline,
                                           const Query& query) {
    std::vector<HypothesisSet> sets;
    for (const VariableRef& v : latent_order(factors, spec)) {
      const int num = v == query.target
                          ? static_cast<int>(query.candidates.size())
                          : 0;
      sets.push_back(sample_hypotheses(spec, timeline, query, v, num));
    }
    return sets;
  }

  static std::vector<std::size_t> set_dims(
      const std::vector<HypothesisSet>& sets) {
    std::vector<std::size_t> dims;
    for (const HypothesisSet& s : sets) dims.push_back(s.hypotheses.size());
    return dims;
  }

  /// Odometer step over the index vector; the last variable runs fastest.
  static bool advance(std::vector<std::size_t>& index,
                      const std::vector<std::size_t>& dims) {
    for (std::size_t i = index.size(); i-- > 0;) {
      if (++index[i] < dims[i]) return true;
      index[i] = 0;
    }
    return false;
  }

  PosteriorResult enumerate(const std::vector<Factor>& factors,
                            std::vector<HypothesisSet> sets,
                            const ModelSpec& spec, const Timeline& timeline,
                            const VariableRef& target,
                            const std::string& state_override) {
    std::size_t target_pos = sets.size();
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].variable == target) target_pos = i;
    }
    if (target_pos == sets.size()) {
      throw ConfigError("query target " + target.str() +
                        " is not a latent variable of the model");
    }
    const std::vector<std::size_t> dims = set_dims(sets);
    for (std::size_t d : dims) {
      if (d == 0) throw InternalError("empty hypothesis set in enumeration");
    }

    std::vector<double> mass(dims[target_pos], 0.0);
    std::vector<std::size_t> index(sets.size(), 0);
    bool more = true;
    while (more) {
      ++stats_.assignments_enumerated;
      Assignment assignment;
      for (std::size_t i = 0; i < sets.size(); ++i) {
        assignment[sets[i].variable] = sets[i].hypotheses[index[i]];
      }
      double product = 1.0;
      for (const Factor& f : factors) {
        product *= evaluate_factor(f, assignment, spec, timeline, state_override);
      }
      mass[index[target_pos]] += product;
      more = advance(index, dims);
    }

    PosteriorResult out;
    double total = 0.0;
    for (double m : mass) total += m;
    out.evidence = total;
    out.posterior.support = sets[target_pos].hypotheses;
    if (total <= 0.0) {
      out.posterior = Distribution::uniform(sets[target_pos].hypotheses);
      out.warnings.push_back("zero evidence: every joint assignment scored 0; "
                             "falling back to uniform");
    } else {
      for (double m : mass) out.posterior.probs.push_back(m / total);
    }
    out.posterior.validate();
    out.sets = std::move(sets);
    return out;
  }

  static std::string next_agent(const Timeline& timeline,
                                const std::string& current) {
    for (const std::string& a : timeline.agents) {
      if (a != current) return a;
    }
    return current;
  }

  PosteriorResult recurse(const ModelSpec& spec, const Timeline& timeline,
                          const Query& query, const std::string& world) {
    int nested_step = 0;
    for (int t = spec.window_end; t >= spec.window_start; --t) {
      if (spec.step_at(t).belief == BeliefMode::OfInteractiveState) {
        nested_step = t;
        break;
      }
    }
    if (spec.level == 0 || nested_step == 0) {
      return exact_posterior(spec, timeline, query, world);
    }

    VariableRef nested;
    nested.kind = VariableKind::InteractiveState;
    nested.timestep = nested_step;
    nested.agent = spec.agent;
    nested.level = spec.level;
    Query nested_query;
    nested_query.target = nested;
    nested_query.question = query.question;
    PosteriorResult here = exact_posterior(spec, timeline, nested_query, world);

    std::size_t pick;
    if (cfg_.stochastic_state_selection) {
      std::mt19937 rng(cfg_.seed + static_cast<unsigned>(spec.level));
      std::discrete_distribution<std::size_t> draw(
          here.posterior.probs.begin(), here.posterior.probs.end());
      pick = draw(rng);
    } else {
      pick = here.posterior.argmax_index();
    }
    const std::string& instantiated = here.posterior.support[pick];

    ModelSpec child = spec;
    child.level = spec.level - 1;
    child.agent = child.level == query.target.level && !query.target.agent.empty()
                      ? query.target.agent
                      : next_agent(timeline, spec.agent);
    if (child.level == 0) {
      for (StepConfig& cfg : child.steps) {
        if (cfg.belief == BeliefMode::OfInteractiveState) {
          cfg.belief = BeliefMode::OfState;
        }
      }
    }
    return recurse(child, timeline, query, instantiated);
  }

  Oracle& oracle_;
  OracleConfig oracle_cfg_;
  EngineConfig cfg_;
  EngineStats stats_;
  FactorTrace trace_;
  std::map<VariableRef, std::string> clamps_;
  std::map<VariableRef, HypothesisSet> set_cache_;
};

}  // namespace invplan
