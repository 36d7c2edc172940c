#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "invplan/model.hpp"
#include "invplan/oracle.hpp"
#include "invplan/types.hpp"

/// @file
/// Exact gridworld domain: a deterministic MDP solver, Boltzmann action
/// likelihoods, goal inference over cell trajectories, partially observed
/// food-truck inference, and an oracle adapter so the full model-discovery
/// pipeline can run with exactly reproducible numbers.
///
/// Coordinates are (x, y) with x growing right and y growing down; "up"
/// decreases y. A trajectory is the visited cell sequence; a repeated cell
/// reads as the stay action.

namespace invplan {

struct Cell {
  int x = 0;
  int y = 0;

  bool operator==(const Cell& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Cell& o) const { return !(*this == o); }
  bool operator<(const Cell& o) const {
    return y != o.y ? y < o.y : x < o.x;
  }

  std::string str() const {
    return "(" + std::to_string(x) + ", " + std::to_string(y) + ")";
  }
};

enum class Move { Up, Down, Left, Right, Stay };

inline constexpr std::array<Move, 5> kMoves = {
    Move::Up, Move::Down, Move::Left, Move::Right, Move::Stay};

inline const char* to_string(Move m) {
  switch (m) {
    case Move::Up: return "up";
    case Move::Down: return "down";
    case Move::Left: return "left";
    case Move::Right: return "right";
    case Move::Stay: return "stay";
  }
  throw InternalError("unknown Move");
}

inline Cell shifted(Cell c, Move m) {
  switch (m) {
    case Move::Up: return {c.x, c.y - 1};
    case Move::Down: return {c.x, c.y + 1};
    case Move::Left: return {c.x - 1, c.y};
    case Move::Right: return {c.x + 1, c.y};
    case Move::Stay: return c;
  }
  throw InternalError("unknown Move");
}

struct Grid {
  int width = 0;
  int height = 0;
  std::set<Cell> walls;
  std::map<std::string, Cell> goals;
  std::map<std::string, Cell> spots;   // truck parking spots
  std::map<std::string, std::string> trucks;  // actual spot -> truck
  Cell agent_start;

  bool in_bounds(Cell c) const {
    return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height;
  }
  bool is_wall(Cell c) const { return walls.count(c) > 0; }
  bool is_free(Cell c) const { return in_bounds(c) && !is_wall(c); }

  /// Blocked moves stay in place.
  Cell step(Cell c, Move m) const {
    const Cell n = shifted(c, m);
    return is_free(n) ? n : c;
  }

  void validate() const {
    if (width < 1 || height < 1) {
      throw ScenarioError("grid must be at least 1x1");
    }
    const std::string dims =
        std::to_string(width) + "x" + std::to_string(height) + " grid";
    for (const Cell& w : walls) {
      if (!in_bounds(w)) {
        throw ScenarioError("wall at " + w.str() + " is outside the " + dims);
      }
    }
    auto check = [&](const std::string& what, Cell c) {
      if (!in_bounds(c)) {
        throw ScenarioError(what + " at " + c.str() + " is outside the " + dims);
      }
      if (is_wall(c)) {
        throw ScenarioError(what + " sits on a wall at " + c.str());
      }
    };
    check("agent start", agent_start);
    for (const auto& [id, c] : goals) check("goal '" + id + "'", c);
    for (const auto& [id, c] : spots) check("spot '" + id + "'", c);
    for (auto a = spots.begin(); a != spots.end(); ++a) {
      for (auto b = std::next(a); b != spots.end(); ++b) {
        if (a->second == b->second) {
          throw ScenarioError("spots '" + a->first + "' and '" + b->first +
                              "' share cell " + a->second.str());
        }
      }
    }
    for (const auto& [spot, truck] : trucks) {
      if (!spots.count(spot)) {
        throw ScenarioError("truck placement names unknown spot '" + spot + "'");
      }
      (void)truck;
    }
  }
};

struct RationalAgentParams {
  double beta = 2.0;        // rationality temperature; 0 = indifferent
  double gamma = 0.95;      // discount; 1 allowed for shortest-path values
  double step_cost = -1.0;
  double goal_reward = 0.0; // terminal convention: value 0 at the goal
  double epsilon = 1e-9;    // Bellman residual tolerance
  int max_iterations = 10000;

  void validate() const {
    if (beta < 0.0) throw ConfigError("beta must be non-negative");
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw ConfigError("gamma must lie in (0, 1]");
    }
    if (step_cost >= 0.0) throw ConfigError("step_cost must be negative");
    if (goal_reward < 0.0) throw ConfigError("goal_reward must be non-negative");
    if (epsilon <= 0.0) throw ConfigError("epsilon must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  }
};

struct SightModel {
  bool occlusion = true;         // walls block the line of sight
  std::optional<int> range;      // Manhattan radius, unlimited if absent
};

struct ValueTable {
  int width = 0;
  int height = 0;
  Cell goal;
  std::vector<double> values;
  int iterations = 0;
  double residual = 0.0;

  double at(Cell c) const {
    return values[static_cast<std::size_t>(c.y) * width + c.x];
  }
};

/// Converged state values for reaching `goal`; the goal cell is terminal with
/// value 0 and entering it pays goal_reward.
inline ValueTable solve_values(const Grid& grid, Cell goal,
                               const RationalAgentParams& params) {
  grid.validate();
  params.validate();
  if (!grid.is_free(goal)) {
    throw ScenarioError("goal cell " + goal.str() + " is not a free cell");
  }
  ValueTable table;
  table.width = grid.width;
  table.height = grid.height;
  table.goal = goal;
  table.values.assign(static_cast<std::size_t>(grid.width) * grid.height, 0.0);

  auto idx = [&](Cell c) {
    return static_cast<std::size_t>(c.y) * grid.width + c.x;
  };
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    double residual = 0.0;
    Cell worst = goal;
    for (int y = 0; y < grid.height; ++y) {
      for (int x = 0; x < grid.width; ++x) {
        const Cell c{x, y};
        if (!grid.is_free(c) || c == goal) continue;
        double best = -std::numeric_limits<double>::infinity();
        for (Move m : kMoves) {
          const Cell n = grid.step(c, m);
          const double q =
              params.step_cost +
              (n == goal ? params.goal_reward : params.gamma * table.values[idx(n)]);
          best = std::max(best, q);
        }
        const double delta = std::abs(best - table.values[idx(c)]);
        if (delta > residual) {
          residual = delta;
          worst = c;
        }
        table.values[idx(c)] = best;
      }
    }
    table.iterations = iter + 1;
    table.residual = residual;
    if (residual <= params.epsilon) return table;
    if (iter == params.max_iterations - 1) {
      throw NonConvergence("value iteration hit the iteration cap with residual " +
                           std::to_string(residual) + " at cell " + worst.str() +
                           " (goal " + goal.str() + " may be unreachable)");
    }
  }
  return table;
}

inline ValueTable value_iteration(const Grid& grid, const std::string& goal_id,
                                  const RationalAgentParams& params) {
  auto it = grid.goals.find(goal_id);
  if (it == grid.goals.end()) {
    throw ScenarioError("unknown goal id '" + goal_id + "'");
  }
  return solve_values(grid, it->second, params);
}

/// Q values for the five moves; all zero at the terminal goal cell.
inline std::array<double, 5> action_values(const Grid& grid, Cell c,
                                           const ValueTable& table,
                                           const RationalAgentParams& params) {
  std::array<double, 5> q{};
  if (c == table.goal) return q;
  for (std::size_t i = 0; i < kMoves.size(); ++i) {
    const Cell n = grid.step(c, kMoves[i]);
    q[i] = params.step_cost +
           (n == table.goal ? params.goal_reward : params.gamma * table.at(n));
  }
  return q;
}

/// P(move | cell, goal) ∝ exp(beta * Q), computed stably via max-shift.
inline std::array<double, 5> action_distribution(
    const Grid& grid, Cell c, const ValueTable& table,
    const RationalAgentParams& params) {
  const std::array<double, 5> q = action_values(grid, c, table, params);
  std::array<double, 5> p{};
  double hi = q[0];
  for (double v : q) hi = std::max(hi, v);
  double total = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(params.beta * (q[i] - hi));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

inline double action_likelihood(const Grid& grid, Cell c, Move m,
                                const std::string& goal_id,
                                const RationalAgentParams& params) {
  const ValueTable table = value_iteration(grid, goal_id, params);
  return action_distribution(grid, c, table, params)[static_cast<int>(m)];
}

/// Memoizes one value table per goal cell across queries.
class Planner {
 public:
  Planner(Grid grid, RationalAgentParams params)
      : grid_(std::move(grid)), params_(params) {
    grid_.validate();
    params_.validate();
  }

  const Grid& grid() const { return grid_; }
  const RationalAgentParams& params() const { return params_; }

  const ValueTable& values_for(Cell goal) {
    auto it = tables_.find(goal);
    if (it == tables_.end()) {
      it = tables_.emplace(goal, solve_values(grid_, goal, params_)).first;
    }
    return it->second;
  }

  std::array<double, 5> policy(Cell from, Cell goal) {
    return action_distribution(grid_, from, values_for(goal), params_);
  }

  double likelihood(Cell from, Move m, Cell goal) {
    return policy(from, goal)[static_cast<int>(m)];
  }

 private:
  Grid grid_;
  RationalAgentParams params_;
  std::map<Cell, ValueTable> tables_;
};

/// The move taking `a` to `b`; a repeated cell is the stay move.
inline Move move_between(Cell a, Cell b) {
  for (Move m : kMoves) {
    if (shifted(a, m) == b) return m;
  }
  throw InvalidTrajectory("trajectory jumps from " + a.str() + " to " + b.str());
}

inline void validate_trajectory(const Grid& grid,
                                const std::vector<Cell>& trajectory) {
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (!grid.is_free(trajectory[i])) {
      throw InvalidTrajectory("trajectory cell " + trajectory[i].str() +
                              " at step " + std::to_string(i + 1) +
                              " is not a free cell");
    }
    if (i > 0) move_between(trajectory[i - 1], trajectory[i]);
  }
}

/// Posterior over goals after every prefix of the trajectory: entry 0 is the
/// prior, entry k conditions on the first k moves. An empty or single-cell
/// trajectory yields just the prior.
inline std::vector<Distribution> goal_posterior_sequence(
    const Grid& grid, const std::vector<Cell>& trajectory,
    const RationalAgentParams& params,
    const std::map<std::string, double>& prior = {}) {
  grid.validate();
  if (grid.goals.empty()) throw ScenarioError("grid defines no goals");
  validate_trajectory(grid, trajectory);

  std::vector<std::string> ids;
  std::vector<double> weights;
  double prior_total = 0.0;
  for (const auto& [id, cell] : grid.goals) {
    (void)cell;
    ids.push_back(id);
    double mass = 1.0;
    if (!prior.empty()) {
      auto it = prior.find(id);
      if (it == prior.end()) {
        throw ScenarioError("prior omits goal '" + id + "'");
      }
      mass = it->second;
      if (mass < 0.0) throw ScenarioError("prior mass for '" + id + "' is negative");
    }
    weights.push_back(mass);
    prior_total += mass;
  }
  if (prior_total <= 0.0) throw ScenarioError("prior has no mass");
  for (double& w : weights) w /= prior_total;

  Planner planner(grid, params);
  std::vector<Distribution> out;
  auto snapshot = [&]() {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) {
      // All goals priced the moves at numerical zero; fall back to uniform
      // rather than divide the mass away.
      out.push_back(Distribution::uniform(ids));
      return;
    }
    Distribution d;
    d.support = ids;
    d.probs = weights;
    for (double& p : d.probs) p /= total;
    d.validate();
    out.push_back(std::move(d));
  };
  snapshot();
  for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
    const Move m = move_between(trajectory[i], trajectory[i + 1]);
    for (std::size_t g = 0; g < ids.size(); ++g) {
      weights[g] *= planner.likelihood(trajectory[i], m, grid.goals.at(ids[g]));
    }
    snapshot();
  }
  return out;
}

/// Straight-line visibility on cell centers; with occlusion on, any strictly
/// intermediate wall cell blocks the view.
inline bool visible(const Grid& grid, const SightModel& sight, Cell from,
                    Cell target) {
  if (sight.range) {
    if (std::abs(from.x - target.x) + std::abs(from.y - target.y) > *sight.range) {
      return false;
    }
  }
  if (!sight.occlusion) return true;
  int x0 = from.x, y0 = from.y;
  const int x1 = target.x, y1 = target.y;
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (!(x0 == x1 && y0 == y1)) {
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
    if (x0 == x1 && y0 == y1) break;
    if (grid.is_wall({x0, y0})) return false;
  }
  return true;
}

/// One scenario file's worth of world description; the food-truck fields stay
/// empty for plain goal-inference grids.
struct GridScenario {
  Grid grid;
  RationalAgentParams params;
  std::vector<Cell> trajectory;
  std::map<std::string, double> prior;
  SightModel sight;
  std::vector<std::string> trucks;  // truck ids, preference fallback order
  std::vector<std::map<std::string, std::string>> assignments;  // possible worlds

  bool has_trucks() const { return !trucks.empty(); }

  void validate() const {
    grid.validate();
    params.validate();
    if (has_trucks()) {
      if (grid.spots.empty()) {
        throw ScenarioError("food-truck scenario defines no spots");
      }
      if (assignments.empty()) {
        throw ScenarioError("food-truck scenario lists no possible worlds");
      }
      auto check_assignment = [&](const std::map<std::string, std::string>& a,
                                  const std::string& what) {
        for (const auto& [spot, truck] : a) {
          if (!grid.spots.count(spot)) {
            throw ScenarioError(what + " names unknown spot '" + spot + "'");
          }
          if (truck != "none" &&
              std::find(trucks.begin(), trucks.end(), truck) == trucks.end()) {
            throw ScenarioError(what + " names unknown truck '" + truck + "'");
          }
        }
      };
      for (std::size_t i = 0; i < assignments.size(); ++i) {
        check_assignment(assignments[i], "world " + std::to_string(i + 1));
      }
      check_assignment(grid.trucks, "the actual placement");
    }
  }
};

inline std::string assignment_label(
    const std::map<std::string, std::string>& assignment) {
  if (assignment.empty()) return "no trucks";
  std::string out;
  for (const auto& [spot, truck] : assignment) {
    if (!out.empty()) out += ", ";
    out += spot + "=" + truck;
  }
  return out;
}

struct FoodTruckResult {
  Distribution desire;  // over truck ids
  Distribution belief;  // over initial believed worlds
  std::vector<std::string> warnings;
};

namespace detail {

/// The spot the agent heads for given its preference and believed world:
/// the closest spot serving the desired truck, else the closest spot serving
/// the earliest fallback truck, else none (the agent stays put).
inline std::optional<Cell> planned_target(
    const GridScenario& sc, const std::string& desire,
    const std::map<std::string, std::string>& believed, Cell from) {
  auto closest_serving = [&](const std::string& truck) -> std::optional<Cell> {
    std::optional<Cell> best;
    int best_dist = 0;
    for (const auto& [spot, cell] : sc.grid.spots) {
      auto it = believed.find(spot);
      if (it == believed.end() || it->second != truck) continue;
      const int dist = std::abs(cell.x - from.x) + std::abs(cell.y - from.y);
      if (!best || dist < best_dist) {
        best = cell;
        best_dist = dist;
      }
    }
    return best;
  };
  if (auto target = closest_serving(desire)) return target;
  for (const std::string& fallback : sc.trucks) {
    if (fallback == desire) continue;
    if (auto target = closest_serving(fallback)) return target;
  }
  return std::nullopt;
}

}  // namespace detail

/// Joint inference over (desired truck, initially believed world). Each
/// hypothesis simulates the agent: visible spots reveal their actual
/// contents, worlds contradicted by an observation are eliminated, and the
/// agent replans toward its preference in the first surviving world (its own
/// initial pick while it lasts). The trajectory is scored by the product of
/// Boltzmann move likelihoods; marginals come from the joint.
inline FoodTruckResult foodtruck_joint_inference(
    const GridScenario& sc, const std::vector<Cell>& trajectory,
    const RationalAgentParams& params) {
  sc.validate();
  if (!sc.has_trucks()) {
    throw ScenarioError("scenario has no trucks to infer desires over");
  }
  validate_trajectory(sc.grid, trajectory);

  Planner planner(sc.grid, params);
  const std::size_t n_worlds = sc.assignments.size();
  std::vector<std::vector<double>> joint(
      sc.trucks.size(), std::vector<double>(n_worlds, 1.0));

  for (std::size_t d = 0; d < sc.trucks.size(); ++d) {
    for (std::size_t b = 0; b < n_worlds; ++b) {
      std::vector<bool> alive(n_worlds, true);
      double ll = 1.0;
      for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
        const Cell at = trajectory[k];
        for (const auto& [spot, cell] : sc.grid.spots) {
          if (!visible(sc.grid, sc.sight, at, cell)) continue;
          auto actual_it = sc.grid.trucks.find(spot);
          const std::string actual =
              actual_it == sc.grid.trucks.end() ? "none" : actual_it->second;
          for (std::size_t w = 0; w < n_worlds; ++w) {
            auto it = sc.assignments[w].find(spot);
            const std::string believed_truck =
                it == sc.assignments[w].end() ? "none" : it->second;
            if (believed_truck != actual) alive[w] = false;
          }
        }
        // The agent plans in its initial pick while consistent, then in the
        // first surviving world; with none left it knows the actual layout.
        const std::map<std::string, std::string>* world = &sc.grid.trucks;
        if (alive[b]) {
          world = &sc.assignments[b];
        } else {
          for (std::size_t w = 0; w < n_worlds; ++w) {
            if (alive[w]) {
              world = &sc.assignments[w];
              break;
            }
          }
        }
        const std::optional<Cell> target =
            detail::planned_target(sc, sc.trucks[d], *world, at);
        const Move m = move_between(at, trajectory[k + 1]);
        if (target) {
          ll *= planner.likelihood(at, m, *target);
        } else {
          ll *= m == Move::Stay ? 1.0 : 0.0;  // nothing to seek anywhere
        }
      }
      joint[d][b] = ll;
    }
  }

  FoodTruckResult result;
  result.desire.support = sc.trucks;
  result.desire.probs.assign(sc.trucks.size(), 0.0);
  for (const auto& assignment : sc.assignments) {
    result.belief.support.push_back(assignment_label(assignment));
  }
  result.belief.probs.assign(n_worlds, 0.0);

  double total = 0.0;
  for (std::size_t d = 0; d < sc.trucks.size(); ++d) {
    for (std::size_t b = 0; b < n_worlds; ++b) {
      result.desire.probs[d] += joint[d][b];
      result.belief.probs[b] += joint[d][b];
      total += joint[d][b];
    }
  }
  if (total <= 0.0) {
    result.warnings.push_back(
        "no hypothesis is consistent with the trajectory; returning uniform "
        "marginals");
    result.desire = Distribution::uniform(result.desire.support);
    result.belief = Distribution::uniform(result.belief.support);
    return result;
  }
  for (double& p : result.desire.probs) p /= total;
  for (double& p : result.belief.probs) p /= total;
  result.desire.validate();
  result.belief.validate();
  return result;
}

inline std::string cell_text(Cell c) { return "agent at " + c.str(); }

/// Renders a cell trajectory as a story timeline: one step per move, with the
/// departure cell as the step's state text.
inline Timeline trajectory_timeline(const std::vector<Cell>& cells) {
  Timeline tl;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    TimelineStep step;
    step.state = cell_text(cells[i]);
    step.action = to_string(move_between(cells[i], cells[i + 1]));
    tl.steps.push_back(std::move(step));
  }
  tl.agents = {"agent"};
  tl.target_agent = "agent";
  return tl;
}

/// The which-goal question over a grid's goal ids (map order).
inline Query goal_inference_query(const Grid& grid) {
  Query q;
  q.question = "Which goal is the agent walking to?";
  for (const auto& [id, cell] : grid.goals) {
    (void)cell;
    q.candidates.push_back(id);
  }
  q.target.kind = VariableKind::Goal;
  q.target.timestep = 0;
  q.target.agent = "agent";
  return q;
}

inline std::optional<Cell> parse_cell(const std::string& text) {
  static const std::regex pattern(R"(\((-?\d+)\s*,\s*(-?\d+)\))");
  std::smatch m;
  if (!std::regex_search(text, m, pattern)) return std::nullopt;
  return Cell{std::stoi(m[1].str()), std::stoi(m[2].str())};
}

inline std::optional<Move> parse_move(const std::string& text) {
  const std::string t = lowercase(text);
  for (Move m : kMoves) {
    if (t.find(to_string(m)) != std::string::npos) return m;
  }
  if (t.find("wait") != std::string::npos || t.find("stop") != std::string::npos) {
    return Move::Stay;
  }
  return std::nullopt;
}

/// Oracle adapter over a fully observable goal-inference grid. Policy and
/// belief templates answer with exact probabilities (full observability makes
/// belief and observation judgments degenerate text-equality checks); goal
/// proposals enumerate the grid's goals; everything else has no gridworld
/// meaning.
class GridworldOracle : public Oracle {
 public:
  GridworldOracle(Grid grid, RationalAgentParams params = {})
      : planner_(std::move(grid), params) {}

  std::vector<std::string> propose(PromptKind kind, const Slots& slots,
                                   int num) override {
    stats_.propose_calls.fetch_add(1);
    (void)num;  // the enumerated spaces are already finite
    switch (kind) {
      case PromptKind::SampleGoal: {
        std::vector<std::string> ids;
        for (const auto& [id, cell] : planner_.grid().goals) {
          (void)cell;
          ids.push_back(id);
        }
        return ids;
      }
      case PromptKind::ProposeInitialModel:
        return {"State", "Action", "Goal"};
      case PromptKind::SampleBelief:
      case PromptKind::SampleObservation: {
        // Fully observable: the only consistent belief/observation is the
        // world description itself.
        auto it = slots.find("information");
        if (it == slots.end() || it->second.empty()) return {};
        return {it->second};
      }
      default:
        throw UnsupportedPromptKind(std::string("template ") + prompt_id(kind) +
                                    " has no gridworld meaning");
    }
  }

  LikelihoodJudgment judge(PromptKind kind, const Slots& slots) override {
    stats_.judge_calls.fetch_add(1);
    switch (kind) {
      case PromptKind::LikelihoodActionGivenGoalBelief:
        return LikelihoodJudgment::probability(
            policy_probability(slots.at("belief"), slots.at("action"),
                               slots.at("goal")),
            JudgmentSource::Exact);
      case PromptKind::LikelihoodObsGivenState:
        return equality_judgment(slots.at("statement"), slots.at("state"));
      case PromptKind::LikelihoodInitialBelief:
        return equality_judgment(slots.at("statement"), slots.at("story"));
      case PromptKind::LikelihoodBeliefGivenStatePrevBelief:
        return equality_judgment(slots.at("statement"), slots.at("state"));
      case PromptKind::LikelihoodBeliefGivenObsPrevBelief:
        return equality_judgment(slots.at("statement"), slots.at("observation"));
      default:
        throw UnsupportedPromptKind(std::string("template ") + prompt_id(kind) +
                                    " has no gridworld meaning");
    }
  }

  const char* name() const override { return "gridworld"; }

  Planner& planner() { return planner_; }

 private:
  static LikelihoodJudgment equality_judgment(const std::string& a,
                                              const std::string& b) {
    const bool same = normalize_whitespace(a) == normalize_whitespace(b);
    return LikelihoodJudgment::probability(same ? 1.0 : 0.0,
                                           JudgmentSource::Exact);
  }

  double policy_probability(const std::string& state_text,
                            const std::string& action_text,
                            const std::string& goal_text) {
    const std::optional<Cell> cell = parse_cell(state_text);
    if (!cell) {
      throw ScenarioError("no cell coordinates in state text: " + state_text);
    }
    const std::optional<Move> move = parse_move(action_text);
    if (!move) {
      throw ScenarioError("no move in action text: " + action_text);
    }
    const std::string goal_id = resolve_goal(goal_text);
    return planner_.likelihood(*cell, *move,
                               planner_.grid().goals.at(goal_id));
  }

  std::string resolve_goal(const std::string& text) const {
    const auto& goals = planner_.grid().goals;
    if (goals.count(text)) return text;
    const std::string t = lowercase(text);
    // Whole words only: goal "A" must not fire on the 'a' inside "agent".
    for (const auto& [id, cell] : goals) {
      (void)cell;
      const std::string needle = lowercase(id);
      for (std::size_t pos = t.find(needle); pos != std::string::npos;
           pos = t.find(needle, pos + 1)) {
        const bool left_ok =
            pos == 0 || !std::isalnum(static_cast<unsigned char>(t[pos - 1]));
        const std::size_t end = pos + needle.size();
        const bool right_ok =
            end == t.size() || !std::isalnum(static_cast<unsigned char>(t[end]));
        if (left_ok && right_ok) return id;
      }
    }
    throw ScenarioError("no goal of this grid matches '" + text + "'");
  }

  Planner planner_;
};

namespace detail {

inline Cell cell_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw ScenarioError(what + " must be a [x, y] integer pair");
  }
  return Cell{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace detail

/// Scenario file schema (JSON): grid {width, height, walls, goals,
/// agent_start, spots?, trucks?}, params?, trajectory?, prior?, sight?,
/// trucks?, assignments?. Cells are [x, y] pairs.
inline GridScenario scenario_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("grid")) {
    throw ScenarioError("scenario lacks a grid object");
  }
  GridScenario sc;
  const nlohmann::json& g = doc.at("grid");
  try {
    sc.grid.width = g.at("width").get<int>();
    sc.grid.height = g.at("height").get<int>();
    if (g.contains("walls")) {
      for (const auto& w : g.at("walls")) {
        sc.grid.walls.insert(detail::cell_from_json(w, "wall"));
      }
    }
    if (g.contains("goals")) {
      for (const auto& [id, cell] : g.at("goals").items()) {
        sc.grid.goals[id] = detail::cell_from_json(cell, "goal '" + id + "'");
      }
    }
    if (g.contains("spots")) {
      for (const auto& [id, cell] : g.at("spots").items()) {
        sc.grid.spots[id] = detail::cell_from_json(cell, "spot '" + id + "'");
      }
    }
    if (g.contains("trucks")) {
      for (const auto& [spot, truck] : g.at("trucks").items()) {
        sc.grid.trucks[spot] = truck.get<std::string>();
      }
    }
    sc.grid.agent_start = detail::cell_from_json(g.at("agent_start"), "agent start");

    if (doc.contains("params")) {
      const nlohmann::json& p = doc.at("params");
      sc.params.beta = p.value("beta", sc.params.beta);
      sc.params.gamma = p.value("gamma", sc.params.gamma);
      sc.params.step_cost = p.value("step_cost", sc.params.step_cost);
      sc.params.goal_reward = p.value("goal_reward", sc.params.goal_reward);
      sc.params.epsilon = p.value("epsilon", sc.params.epsilon);
      sc.params.max_iterations = p.value("max_iterations", sc.params.max_iterations);
    }
    if (doc.contains("trajectory")) {
      for (const auto& c : doc.at("trajectory")) {
        sc.trajectory.push_back(detail::cell_from_json(c, "trajectory cell"));
      }
    }
    if (doc.contains("prior")) {
      for (const auto& [id, mass] : doc.at("prior").items()) {
        sc.prior[id] = mass.get<double>();
      }
    }
    if (doc.contains("sight")) {
      const nlohmann::json& s = doc.at("sight");
      sc.sight.occlusion = s.value("occlusion", true);
      if (s.contains("range") && !s.at("range").is_null()) {
        sc.sight.range = s.at("range").get<int>();
      }
    }
    if (doc.contains("trucks")) {
      for (const auto& t : doc.at("trucks")) {
        sc.trucks.push_back(t.get<std::string>());
      }
    }
    if (doc.contains("assignments")) {
      for (const auto& a : doc.at("assignments")) {
        std::map<std::string, std::string> world;
        for (const auto& [spot, truck] : a.items()) {
          world[spot] = truck.get<std::string>();
        }
        sc.assignments.push_back(std::move(world));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  sc.validate();
  return sc;
}

inline GridScenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scenario " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

}  // namespace invplan
