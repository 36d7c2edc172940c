#include "invplan/smc.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "invplan/gridworld.hpp"

namespace invplan {
namespace {

GoalProposal fixed_proposal(std::vector<std::string> goals) {
  return [goals = std::move(goals)](const std::string&, const std::string&,
                                    int) { return goals; };
}

GoalLikelihood fixed_likelihood(std::map<std::string, double> table) {
  return [table = std::move(table)](const std::string& goal,
                                    const std::string&,
                                    const std::string&) {
    return table.at(goal);
  };
}

TEST(SmcStep, MatchesTheHandWorkedExample) {
  SmcConfig cfg;
  cfg.k = 2;
  const SmcStepResult r =
      smc_step({{"A", 0.5}, {"B", 0.5}}, "s", "a", fixed_proposal({}),
               fixed_likelihood({{"A", 0.9}, {"B", 0.1}}), cfg);
  ASSERT_EQ(r.survivors.size(), 2u);
  EXPECT_DOUBLE_EQ(r.survivors[0].weight, 0.9);
  // Exactly at the threshold: strict-less filtering keeps it.
  EXPECT_DOUBLE_EQ(r.survivors[1].weight, 0.1);
  EXPECT_TRUE(r.filtered.empty());
  EXPECT_EQ(r.injected, 0);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(SmcStep, DropsBelowThresholdWithoutRenormalizing) {
  SmcConfig cfg;
  cfg.k = 2;
  const SmcStepResult r =
      smc_step({{"A", 0.5}, {"B", 0.5}}, "s", "a", fixed_proposal({}),
               fixed_likelihood({{"A", 0.95}, {"B", 0.05}}), cfg);
  ASSERT_EQ(r.survivors.size(), 1u);
  EXPECT_EQ(r.survivors[0].goal, "A");
  EXPECT_DOUBLE_EQ(r.survivors[0].weight, 0.95);
  ASSERT_EQ(r.filtered.size(), 1u);
  EXPECT_EQ(r.filtered[0].goal, "B");
  EXPECT_DOUBLE_EQ(r.filtered[0].weight, 0.05);
}

TEST(SmcStep, ASingleParticleKeepsFullWeight) {
  SmcConfig cfg;
  cfg.k = 1;
  const SmcStepResult r = smc_step({{"A", 1.0}}, "s", "a", fixed_proposal({}),
                                   fixed_likelihood({{"A", 0.7}}), cfg);
  ASSERT_EQ(r.survivors.size(), 1u);
  EXPECT_DOUBLE_EQ(r.survivors[0].weight, 1.0);
}

TEST(SmcStep, InjectionTopsUpAtAUniformShareAndSkipsDuplicates) {
  SmcConfig cfg;
  cfg.k = 2;
  const SmcStepResult r =
      smc_step({{"A", 1.0}}, "s", "a", fixed_proposal({"A", "A", "B"}),
               fixed_likelihood({{"A", 1.0}, {"B", 1.0}}), cfg);
  EXPECT_EQ(r.injected, 1);
  ASSERT_EQ(r.survivors.size(), 2u);
  // A at 1, B injected at 1/k = 0.5, flat likelihood: shares 2/3 and 1/3.
  EXPECT_NEAR(r.survivors[0].weight, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.survivors[1].weight, 1.0 / 3.0, 1e-12);
}

TEST(SmcStep, AllZeroLikelihoodsDegradeToUniformWithAWarning) {
  SmcConfig cfg;
  cfg.k = 3;
  const SmcStepResult r =
      smc_step({}, "s", "a", fixed_proposal({"x", "y", "z"}),
               fixed_likelihood({{"x", 0.0}, {"y", 0.0}, {"z", 0.0}}), cfg);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("zero probability"), std::string::npos);
  ASSERT_EQ(r.survivors.size(), 3u);
  for (const Particle& p : r.survivors) {
    EXPECT_DOUBLE_EQ(p.weight, 1.0 / 3.0);
  }
}

TEST(SmcStep, WhenEveryParticleFallsShortTheBestOneIsKept) {
  SmcConfig cfg;
  cfg.k = 12;
  std::vector<std::string> goals;
  std::map<std::string, double> flat;
  for (int i = 0; i < 12; ++i) {
    goals.push_back("g" + std::to_string(i));
    flat[goals.back()] = 1.0;
  }
  const SmcStepResult r = smc_step({}, "s", "a", fixed_proposal(goals),
                                   fixed_likelihood(flat), cfg);
  // 1/12 < 0.1 for all twelve, so the filter would empty the population.
  ASSERT_EQ(r.survivors.size(), 1u);
  EXPECT_EQ(r.survivors[0].goal, "g0");
  EXPECT_EQ(r.filtered.size(), 11u);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("below the filtering threshold"),
            std::string::npos);
}

TEST(SmcStep, RejectsBrokenInputsAndConfigs) {
  SmcConfig cfg;
  cfg.k = 2;
  const auto lik = fixed_likelihood({{"A", 1.0}, {"B", 1.0}});
  EXPECT_THROW(
      smc_step({{"A", 0.4}, {"B", 0.4}}, "s", "a", fixed_proposal({}), lik, cfg),
      ConfigError);
  EXPECT_THROW(smc_step({{"A", -0.2}, {"B", 1.2}}, "s", "a",
                        fixed_proposal({}), lik, cfg),
               ConfigError);
  EXPECT_THROW(smc_step({{"A", 0.4}, {"B", 0.3}, {"C", 0.3}}, "s", "a",
                        fixed_proposal({}), lik, cfg),
               ConfigError);
  EXPECT_THROW(smc_step({}, "s", "a", fixed_proposal({}), lik, cfg),
               EmptyProposal);
  EXPECT_THROW(smc_step({{"A", 1.0}}, "s", "a", fixed_proposal({}),
                        fixed_likelihood({{"A", -0.1}}), cfg),
               ConfigError);

  SmcConfig bad = cfg;
  bad.k = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.p_min = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Track, AnEmptyStreamYieldsJustThePriorSample) {
  SmcConfig cfg;
  cfg.k = 4;
  const auto history =
      track({}, fixed_proposal({"g0", "g1", "g2", "g3"}),
            fixed_likelihood({}), cfg);
  ASSERT_EQ(history.size(), 1u);
  ASSERT_EQ(history[0].survivors.size(), 4u);
  for (const Particle& p : history[0].survivors) {
    EXPECT_DOUBLE_EQ(p.weight, 0.25);
  }
  EXPECT_EQ(history[0].injected, 4);
}

GoalProposal grid_proposal(const Grid& g) {
  std::vector<std::string> ids;
  for (const auto& [id, cell] : g.goals) {
    (void)cell;
    ids.push_back(id);
  }
  return fixed_proposal(std::move(ids));
}

GoalLikelihood grid_likelihood(const Grid& g, const RationalAgentParams& p) {
  auto planner = std::make_shared<Planner>(g, p);
  return [planner](const std::string& goal, const std::string& state,
                   const std::string& action) {
    const std::optional<Cell> cell = parse_cell(state);
    const std::optional<Move> move = parse_move(action);
    if (!cell || !move) {
      throw ScenarioError("unreadable state or action in the stream");
    }
    return planner->likelihood(*cell, *move,
                               planner->grid().goals.at(goal));
  };
}

std::vector<ActionEvent> events_from_cells(const std::vector<Cell>& cells) {
  std::vector<ActionEvent> stream;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    stream.push_back(
        {cell_text(cells[i]), to_string(move_between(cells[i], cells[i + 1]))});
  }
  return stream;
}

double weight_of(const std::vector<Particle>& particles,
                 const std::string& goal) {
  for (const Particle& p : particles) {
    if (p.goal == goal) return p.weight;
  }
  return 0.0;
}

Grid two_goal_corridor(int length) {
  Grid g;
  g.width = length;
  g.height = 1;
  g.goals["A"] = {0, 0};
  g.goals["B"] = {length - 1, 0};
  g.agent_start = {length / 2, 0};
  return g;
}

TEST(Track, AConsistentStreamNeverWeakensTheTrueGoal) {
  const Grid g = two_goal_corridor(10);
  RationalAgentParams params;
  params.beta = 0.5;  // gentle policy so the rival decays without being
  SmcConfig cfg;      // dropped; re-injection would reset its weight share
  cfg.k = 2;
  cfg.p_min = 0.01;

  const auto history =
      track(events_from_cells({{4, 0}, {5, 0}, {6, 0}, {7, 0}}),
            grid_proposal(g), grid_likelihood(g, params), cfg);
  ASSERT_EQ(history.size(), 4u);
  EXPECT_DOUBLE_EQ(weight_of(history[0].normalized, "B"), 0.5);
  for (std::size_t i = 1; i < history.size(); ++i) {
    EXPECT_GE(weight_of(history[i].normalized, "B"),
              weight_of(history[i - 1].normalized, "B"))
        << "step " << i;
  }
}

TEST(Track, AFilteredGoalReentersWithinThreeStepsOfAReversal) {
  const Grid g = two_goal_corridor(8);
  RationalAgentParams params;
  params.beta = 5.0;  // sharp policy: the wrong goal is dropped quickly
  SmcConfig cfg;
  cfg.k = 4;

  const std::vector<Cell> cells = {{3, 0}, {4, 0}, {5, 0}, {6, 0},
                                   {5, 0}, {4, 0}, {3, 0}};
  const auto history = track(events_from_cells(cells), grid_proposal(g),
                             grid_likelihood(g, params), cfg);

  std::size_t dropped_at = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (weight_of(history[i].survivors, "A") == 0.0) {
      dropped_at = i;
      break;
    }
  }
  ASSERT_GT(dropped_at, 0u) << "the rightward prefix never dropped goal A";
  ASSERT_LE(dropped_at + 3, history.size() - 1);
  bool reentered = false;
  for (std::size_t i = dropped_at + 1; i <= dropped_at + 3; ++i) {
    if (weight_of(history[i].survivors, "A") > 0.0) reentered = true;
  }
  EXPECT_TRUE(reentered);
}

TEST(Track, RandomStreamsKeepTheFilterInvariants) {
  std::mt19937_64 rng(20240817);
  for (int trial = 0; trial < 100; ++trial) {
    const int length = 5 + static_cast<int>(rng() % 4);
    const Grid g = two_goal_corridor(length);
    RationalAgentParams params;
    params.beta = 1.5;
    SmcConfig cfg;
    cfg.k = 2 + static_cast<int>(rng() % 4);
    cfg.seed = rng();

    std::vector<Cell> cells = {{1 + static_cast<int>(rng() % (length - 2)), 0}};
    const int steps = 1 + static_cast<int>(rng() % 6);
    for (int s = 0; s < steps; ++s) {
      const int dx = static_cast<int>(rng() % 3) - 1;
      Cell next = {cells.back().x + dx, 0};
      if (next.x < 0 || next.x >= length) next = cells.back();
      cells.push_back(next);
    }

    const auto stream = events_from_cells(cells);
    const auto history =
        track(stream, grid_proposal(g), grid_likelihood(g, params), cfg);
    const auto replay =
        track(stream, grid_proposal(g), grid_likelihood(g, params), cfg);
    EXPECT_EQ(track_to_json(history).dump(), track_to_json(replay).dump());

    for (const SmcStepResult& step : history) {
      EXPECT_LE(step.survivors.size(), static_cast<std::size_t>(cfg.k));
      double total = 0.0;
      for (const Particle& p : step.normalized) total += p.weight;
      EXPECT_NEAR(total, 1.0, 1e-9);
      for (const Particle& p : step.filtered) {
        EXPECT_LT(p.weight, cfg.p_min);
      }
    }
  }
}

TEST(Track, SerializationShowsBothRawAndNormalizedViews) {
  SmcConfig cfg;
  cfg.k = 2;
  const auto history =
      track({{"s", "a"}}, fixed_proposal({"A", "B"}),
            fixed_likelihood({{"A", 0.95}, {"B", 0.05}}), cfg);
  ASSERT_EQ(history.size(), 2u);

  const nlohmann::ordered_json doc = track_to_json(history);
  const auto& step = doc["steps"][1];
  ASSERT_EQ(step["particles"].size(), 2u);
  EXPECT_DOUBLE_EQ(step["particles"][1]["weight"].get<double>(), 0.05);
  ASSERT_EQ(step["survivors"].size(), 1u);
  EXPECT_DOUBLE_EQ(step["survivors"][0]["weight"].get<double>(), 0.95);
  ASSERT_EQ(step["filtered"].size(), 1u);

  const std::string table = history_table(history);
  EXPECT_EQ(table.rfind("step\tgoal\tweight\tstatus\n", 0), 0u);
  EXPECT_NE(table.find("1\tA\t0.950000\tkept"), std::string::npos);
  EXPECT_NE(table.find("1\tB\t0.050000\tfiltered"), std::string::npos);
}

TEST(Track, ErrorsCarryTheStepIndex) {
  SmcConfig cfg;
  cfg.k = 2;
  const GoalLikelihood broken = [](const std::string&, const std::string&,
                                   const std::string&) { return -1.0; };
  try {
    track({{"s1", "a1"}, {"s2", "a2"}}, fixed_proposal({"A", "B"}), broken,
          cfg);
    FAIL() << "expected a ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Config);
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos);
  }
}

}  // namespace
}  // namespace invplan
