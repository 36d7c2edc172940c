// Sequential Monte Carlo goal filter. A particle is a goal hypothesis with a
// weight; each observed (state, action) pair reweights the population by the
// forward action likelihood, and hypotheses whose normalized weight falls
// below a threshold are dropped. Dropped goals can re-enter later through the
// proposal callable, which refills the population up to its fixed size.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "invplan/types.hpp"

namespace invplan {

struct Particle {
  std::string goal;
  double weight = 0.0;

  bool operator==(const Particle& other) const {
    return goal == other.goal && weight == other.weight;
  }
};

struct SmcConfig {
  int k = 20;          // population size
  double p_min = 0.10; // normalized-weight survival threshold
  std::uint64_t seed = 0;

  // The filter itself is deterministic; the seed is carried for proposal
  // backends that sample, so runs stay reproducible end to end.
  void validate() const {
    if (k < 1) {
      throw ConfigError("particle count must be at least 1, got " +
                        std::to_string(k));
    }
    if (!(p_min > 0.0) || !(p_min < 1.0)) {
      throw ConfigError("filtering threshold must lie strictly between 0 and "
                        "1, got " + std::to_string(p_min));
    }
  }
};

/// Prior sampler: candidate goals given the current state and action. May
/// return fewer (or more) than `num`; duplicates are ignored.
using GoalProposal = std::function<std::vector<std::string>(
    const std::string& state, const std::string& action, int num)>;

/// Forward model: P(action | goal, state).
using GoalLikelihood = std::function<double(
    const std::string& goal, const std::string& state, const std::string& action)>;

/// One filter step. `survivors` keeps the weights exactly as they were after
/// the normalize sub-step (no renormalization after filtering); `normalized`
/// is the full pre-filter population for inspection, and `filtered` records
/// what was dropped and at what weight.
struct SmcStepResult {
  std::vector<Particle> survivors;
  std::vector<Particle> normalized;
  std::vector<Particle> filtered;
  int injected = 0;
  std::vector<std::string> warnings;
};

/// Scales weights to sum to 1. This is the re-entry normalization a particle
/// set goes through before it feeds the next step.
inline std::vector<Particle> normalize_particles(std::vector<Particle> particles) {
  double total = 0.0;
  for (const Particle& p : particles) total += p.weight;
  if (!(total > 0.0)) {
    throw ConfigError("particle weights must have positive total mass");
  }
  for (Particle& p : particles) p.weight /= total;
  return particles;
}

namespace detail {

inline bool holds_goal(const std::vector<Particle>& particles,
                       const std::string& goal) {
  return std::any_of(particles.begin(), particles.end(),
                     [&](const Particle& p) { return p.goal == goal; });
}

}  // namespace detail

/// Advances the population by one (state, action) observation: refill the
/// population from the proposal, multiply weights by the action likelihood,
/// normalize, then drop every particle whose weight fell strictly below the
/// threshold. If everything would be dropped the single best particle is kept
/// instead, and an all-zero likelihood row degrades to a uniform reweight;
/// both paths leave a warning rather than failing the stream.
inline SmcStepResult smc_step(std::vector<Particle> particles,
                              const std::string& state,
                              const std::string& action,
                              const GoalProposal& proposal,
                              const GoalLikelihood& likelihood,
                              const SmcConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(particles.size()) > cfg.k) {
    throw ConfigError("incoming population of " +
                      std::to_string(particles.size()) + " exceeds the " +
                      "configured size " + std::to_string(cfg.k));
  }
  if (!particles.empty()) {
    double total = 0.0;
    for (const Particle& p : particles) {
      if (!(p.weight >= 0.0)) {
        throw ConfigError("particle '" + p.goal + "' carries a negative weight");
      }
      total += p.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("incoming particle weights sum to " +
                        std::to_string(total) + ", expected 1");
    }
  }

  SmcStepResult result;

  // Refill up to k particles. New goals enter at a uniform 1/k share and earn
  // their keep through the same reweighting as everyone else.
  const int missing = cfg.k - static_cast<int>(particles.size());
  if (missing > 0) {
    const std::vector<std::string> proposed = proposal(state, action, missing);
    for (const std::string& goal : proposed) {
      if (result.injected == missing) break;
      if (goal.empty() || detail::holds_goal(particles, goal)) continue;
      particles.push_back({goal, 1.0 / static_cast<double>(cfg.k)});
      ++result.injected;
    }
  }
  if (particles.empty()) {
    throw EmptyProposal("the goal proposal returned no hypotheses to track");
  }

  // Reweight by the forward action likelihood.
  double total = 0.0;
  for (Particle& p : particles) {
    const double lik = likelihood(p.goal, state, action);
    if (!std::isfinite(lik) || lik < 0.0) {
      throw ConfigError("likelihood for goal '" + p.goal +
                        "' is not a finite nonnegative number");
    }
    p.weight *= lik;
    total += p.weight;
  }
  if (!(total > 0.0)) {
    result.warnings.push_back(
        "every tracked goal assigns this action zero probability; "
        "reweighting uniformly");
    for (Particle& p : particles) p.weight = 1.0;
    total = static_cast<double>(particles.size());
  }

  for (Particle& p : particles) p.weight /= total;
  double check = 0.0;
  for (const Particle& p : particles) check += p.weight;
  if (std::abs(check - 1.0) > 1e-9) {
    throw InternalError("normalized particle weights sum to " +
                        std::to_string(check));
  }
  result.normalized = particles;

  // Strict-less filtering: a particle sitting exactly at the threshold stays.
  for (const Particle& p : particles) {
    if (p.weight < cfg.p_min) {
      result.filtered.push_back(p);
    } else {
      result.survivors.push_back(p);
    }
  }
  if (result.survivors.empty()) {
    const auto best = std::max_element(
        particles.begin(), particles.end(),
        [](const Particle& a, const Particle& b) { return a.weight < b.weight; });
    result.warnings.push_back("every particle fell below the filtering "
                              "threshold; keeping only '" + best->goal + "'");
    result.survivors = {*best};
    result.filtered.clear();
    for (const Particle& p : particles) {
      if (&p != &*best) result.filtered.push_back(p);
    }
  }
  return result;
}

struct ActionEvent {
  std::string state;
  std::string action;
};

/// Folds smc_step over an action stream. The first entry is the prior
/// population (sampled from the proposal before any reweighting); each later
/// entry is the filter state after one observation. Survivor weights are
/// renormalized on entry to the next step, so every step sees a proper
/// distribution.
inline std::vector<SmcStepResult> track(const std::vector<ActionEvent>& stream,
                                        const GoalProposal& proposal,
                                        const GoalLikelihood& likelihood,
                                        const SmcConfig& cfg) {
  cfg.validate();
  std::vector<SmcStepResult> history;

  const std::string& seed_state = stream.empty() ? std::string() : stream[0].state;
  const std::string& seed_action = stream.empty() ? std::string() : stream[0].action;
  SmcStepResult prior;
  for (const std::string& goal : proposal(seed_state, seed_action, cfg.k)) {
    if (static_cast<int>(prior.survivors.size()) == cfg.k) break;
    if (goal.empty() || detail::holds_goal(prior.survivors, goal)) continue;
    prior.survivors.push_back({goal, 1.0});
    ++prior.injected;
  }
  if (prior.survivors.empty()) {
    throw EmptyProposal("the goal proposal returned no hypotheses to track");
  }
  prior.survivors = normalize_particles(std::move(prior.survivors));
  prior.normalized = prior.survivors;
  history.push_back(std::move(prior));

  for (std::size_t i = 0; i < stream.size(); ++i) {
    try {
      history.push_back(smc_step(normalize_particles(history.back().survivors),
                                 stream[i].state, stream[i].action, proposal,
                                 likelihood, cfg));
    } catch (const Error& e) {
      throw Error(e.category(), "goal filter step " + std::to_string(i + 1) +
                                    ": " + e.what());
    }
  }
  return history;
}

namespace detail {

inline nlohmann::ordered_json particles_to_json(const std::vector<Particle>& ps) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Particle& p : ps) {
    arr.push_back({{"goal", p.goal}, {"weight", p.weight}});
  }
  return arr;
}

}  // namespace detail

inline nlohmann::ordered_json track_to_json(
    const std::vector<SmcStepResult>& history) {
  nlohmann::ordered_json steps = nlohmann::ordered_json::array();
  for (const SmcStepResult& step : history) {
    steps.push_back({{"particles", detail::particles_to_json(step.normalized)},
                     {"survivors", detail::particles_to_json(step.survivors)},
                     {"filtered", detail::particles_to_json(step.filtered)},
                     {"injected", step.injected},
                     {"warnings", step.warnings}});
  }
  return nlohmann::ordered_json{{"steps", steps}};
}

/// Tab-separated history, one row per particle per step, for quick plotting.
inline std::string history_table(const std::vector<SmcStepResult>& history) {
  std::ostringstream out;
  out << "step\tgoal\tweight\tstatus\n";
  out << std::fixed << std::setprecision(6);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (const Particle& p : history[i].normalized) {
      const bool kept = detail::holds_goal(history[i].survivors, p.goal);
      out << i << '\t' << p.goal << '\t' << p.weight << '\t'
          << (kept ? "kept" : "filtered") << '\n';
    }
  }
  return out.str();
}

}  // namespace invplan
