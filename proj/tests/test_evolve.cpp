// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "retro/errors.hpp"
#include "retro/evolve/planner.hpp"
#include "retro/proposer/proposer.hpp"

using namespace retro;

namespace {

// Amide world again: one template, its recorded reactions, small stock.
struct World {
  TemplateSet templates;
  ReactionDb db;
  Stock stock;
  RouteDatabase routes;
};

World make_world() {
  World w;
  w.templates.add(parse_template(
      "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH1].[N:3]", "amide"));
  w.db.add("CC(=O)O.CN>>CC(=O)NC", "amide");
  w.db.add("NCC(=O)O.CN>>NCC(=O)NC", "amide");
  w.db.add("CC(=O)O.NCC(=O)NC>>CC(=O)NCC(=O)NC", "amide");
  w.stock.add("CC(=O)O");
  w.stock.add("CN");
  w.stock.add("NCC(=O)O");
  w.routes.add("CC(=O)NC",
               {{"CC(=O)NC", "CC(=O)NC>>CC(=O)O.CN", {"CC(=O)O", "CN"}}});
  return w;
}

Candidate make_candidate(double reward, std::size_t invalid,
                         std::size_t created) {
  Candidate c;
  c.reward = reward;
  c.invalid_steps = invalid;
  c.created_at = created;
  return c;
}

// Route blocks the scripted proposer answers with. The loose pseudo-JSON
// texture doubles as a parser exercise.
std::string route_block(const std::string &body) {
  return "<ROUTE>\n[\n" + body + "\n]\n</ROUTE>\n<EXPLANATION>ok</EXPLANATION>";
}

const char *kSolveAmide =
    "{'Molecule set': \"[CC(=O)NC]\", 'Rational': disconnect the amide, "
    "'Product': \"CC(=O)NC\", 'Reaction': \"CC(=O)NC>>CC(=O)O.CN\", "
    "'Reactants': \"[CC(=O)O, CN]\", 'Updated molecule set': \"[CC(=O)O, "
    "CN]\"}";

// Parses fine but declares an updated set unrelated to its reactants, so
// the step always fails the consistency check.
const char *kDeadEnd =
    "{'Molecule set': \"[CC(=O)NC]\", 'Rational': try something odd, "
    "'Product': \"CC(=O)NC\", 'Reaction': \"CC(=O)NC>>CCCC\", "
    "'Reactants': \"[CCCC]\", 'Updated molecule set': \"[CCO]\"}";

PlannerConfig small_config() {
  PlannerConfig cfg;
  cfg.n_c = 2;
  cfg.n_o = 1;
  cfg.num_mutations = 1;
  cfg.budget = 2;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("parent sampling is reward proportional") {
  std::mt19937 rng(11);

  std::vector<Candidate> one = {make_candidate(-2.0, 0, 0)};
  for (int i = 0; i < 20; ++i) CHECK(sample_parent(one, rng) == 0);

  // exp(0) vs exp(-50): the second is effectively never drawn.
  std::vector<Candidate> skewed = {make_candidate(0.0, 0, 0),
                                   make_candidate(-50.0, 0, 1)};
  int first = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    if (sample_parent(skewed, rng) == 0) ++first;
  }
  CHECK(first / static_cast<double>(trials) > 0.999);

  std::vector<Candidate> even = {make_candidate(-3.0, 0, 0),
                                 make_candidate(-3.0, 0, 1)};
  first = 0;
  for (int i = 0; i < trials; ++i) {
    if (sample_parent(even, rng) == 0) ++first;
  }
  CHECK(std::abs(first / static_cast<double>(trials) - 0.5) < 0.02);
}

TEST_CASE("survivor selection truncates with documented tie-breaks") {
  Population kept = select_survivors(
      {make_candidate(-5.0, 2, 0), make_candidate(0.0, 0, 1),
       make_candidate(-2.0, 1, 2)},
      2);
  REQUIRE(kept.members.size() == 2);
  CHECK(kept.members[0].reward == 0.0);
  CHECK(kept.members[1].reward == -2.0);

  // Equal rewards: fewer invalid steps wins, then earlier creation.
  kept = select_survivors(
      {make_candidate(-1.0, 3, 0), make_candidate(-1.0, 1, 1),
       make_candidate(-1.0, 1, 2)},
      2);
  CHECK(kept.members[0].created_at == 1);
  CHECK(kept.members[1].created_at == 2);

  // Strictly better offspring replace every parent.
  kept = select_survivors(
      {make_candidate(-9.0, 1, 0), make_candidate(-8.0, 1, 1),
       make_candidate(-1.0, 0, 2), make_candidate(-2.0, 0, 3)},
      2);
  CHECK(kept.members[0].created_at == 2);
  CHECK(kept.members[1].created_at == 3);
}

TEST_CASE("planner solves immediately when initialization succeeds") {
  World w = make_world();
  ScriptedProposer proposer;
  proposer.push_response(route_block(kSolveAmide));
  proposer.push_response(route_block(kSolveAmide));

  PlannerConfig cfg = small_config();
  PlannerResult res = run_planner("CC(=O)NC", cfg, w.stock, w.templates,
                                  w.db, w.routes, proposer,
                                  HeuristicScScore{});

  CHECK(res.solved);
  REQUIRE(!res.solutions.empty());
  CHECK(res.generations == 0);
  // One call per population slot, no mutations needed.
  CHECK(res.proposer_calls == cfg.n_c);
  CHECK(res.solutions[0].route.provenance == RouteProvenance::Initialization);
  CHECK(res.solutions[0].reward == 0.0);

  // Solved routes re-verify under independent evaluation.
  EvaluationReport check = evaluate_route(res.solutions[0].route, w.stock,
                                          w.db, w.templates);
  CHECK(check.solved);
}

TEST_CASE("planner short-circuits purchasable targets") {
  World w = make_world();
  ScriptedProposer proposer;  // deliberately empty: no call is allowed

  PlannerResult res = run_planner("CC(=O)O", small_config(), w.stock,
                                  w.templates, w.db, w.routes, proposer,
                                  HeuristicScScore{});
  CHECK(res.solved);
  CHECK(res.proposer_calls == 0);
  REQUIRE(!res.solutions.empty());
  CHECK(res.solutions[0].route.steps.empty());
}

TEST_CASE("planner runs out its budget on dead-end proposals") {
  World w = make_world();
  ScriptedProposer proposer;
  PlannerConfig cfg = small_config();  // 2 + 2 * 1 calls maximum
  for (int i = 0; i < 4; ++i) proposer.push_response(route_block(kDeadEnd));

  PlannerResult res = run_planner("CC(=O)NC", cfg, w.stock, w.templates,
                                  w.db, w.routes, proposer,
                                  HeuristicScScore{});

  CHECK(!res.solved);
  CHECK(res.solutions.empty());
  CHECK(res.generations == cfg.budget);
  CHECK(res.budget_exhausted);
  CHECK(res.proposer_calls == cfg.n_c + cfg.budget * cfg.num_mutations);
  REQUIRE(res.best_reward_trace.size() == 1 + cfg.budget);
  for (std::size_t i = 1; i < res.best_reward_trace.size(); ++i) {
    CHECK(res.best_reward_trace[i] >= res.best_reward_trace[i - 1]);
  }
}

TEST_CASE("mutation splices a repair onto the valid prefix") {
  World w = make_world();

  // Initialization gets the first disconnection right and then wanders into
  // a reaction the database cannot ground on acetic acid.
  std::string init_body =
      "{'Molecule set': \"[CC(=O)NCC(=O)NC]\", 'Rational': split the left "
      "amide, 'Product': \"CC(=O)NCC(=O)NC\", 'Reaction': "
      "\"CC(=O)NCC(=O)NC>>CC(=O)O.NCC(=O)NC\", 'Reactants': \"[CC(=O)O, "
      "NCC(=O)NC]\", 'Updated molecule set': \"[CC(=O)O, NCC(=O)NC]\"},\n"
      "{'Molecule set': \"[CC(=O)O, NCC(=O)NC]\", 'Rational': bogus, "
      "'Product': \"CC(=O)O\", 'Reaction': \"CC(=O)O>>CC.OO\", 'Reactants': "
      "\"[CC, OO]\", 'Updated molecule set': \"[CC, OO, NCC(=O)NC]\"}";

  // The mutation answer reworks exactly the broken tail.
  std::string repair_body =
      "{'Molecule set': \"[CC(=O)O, NCC(=O)NC]\", 'Rational': split the "
      "remaining amide, 'Product': \"NCC(=O)NC\", 'Reaction': "
      "\"NCC(=O)NC>>NCC(=O)O.CN\", 'Reactants': \"[NCC(=O)O, CN]\", "
      "'Updated molecule set': \"[CC(=O)O, NCC(=O)O, CN]\"}";

  ScriptedProposer proposer;
  proposer.add_rule("generating a retrosynthesis route",
                    route_block(init_body));
  proposer.add_rule("modifying a retrosynthesis route",
                    route_block(repair_body));

  PlannerConfig cfg;
  cfg.n_c = 1;
  cfg.n_o = 1;
  cfg.num_mutations = 1;
  cfg.budget = 2;
  cfg.seed = 3;

  std::ostringstream log;
  PlannerResult res =
      run_planner("CC(=O)NCC(=O)NC", cfg, w.stock, w.templates, w.db,
                  w.routes, proposer, HeuristicScScore{}, &log);

  CHECK(res.solved);
  CHECK(res.generations == 1);
  CHECK(res.proposer_calls == 2);
  REQUIRE(!res.solutions.empty());

  const Route &solution = res.solutions[0].route;
  CHECK(solution.provenance == RouteProvenance::Mutation);
  REQUIRE(solution.steps.size() == 2);
  // Step 1 survived from the parent byte for byte.
  CHECK(solution.steps[0].reaction == "CC(=O)NCC(=O)NC>>CC(=O)O.NCC(=O)NC");
  CHECK(solution.steps[1].reaction == "NCC(=O)NC>>NCC(=O)O.CN");

  EvaluationReport check =
      evaluate_route(solution, w.stock, w.db, w.templates);
  CHECK(check.solved);

  // The run log carries one JSON line per phase.
  std::string lines = log.str();
  CHECK(lines.find("\"phase\":\"init\"") != std::string::npos);
  CHECK(lines.find("\"phase\":\"generation\"") != std::string::npos);
  CHECK(lines.find("\"solved\":true") != std::string::npos);
}

TEST_CASE("planner results are reproducible for a fixed seed") {
  auto run_once = [](std::size_t parallelism) {
    World w = make_world();
    ScriptedProposer proposer;
    // Keyed rules keep worker interleaving away from response selection.
    for (int i = 0; i < 2; ++i) {
      proposer.add_rule("generating a retrosynthesis route",
                        route_block(kDeadEnd));
      proposer.add_rule("modifying a retrosynthesis route",
                        route_block(kDeadEnd));
    }
    PlannerConfig cfg = small_config();
    cfg.parallelism = parallelism;
    return run_planner("CC(=O)NC", cfg, w.stock, w.templates, w.db, w.routes,
                       proposer, HeuristicScScore{});
  };

  PlannerResult a = run_once(1);
  PlannerResult b = run_once(1);
  PlannerResult c = run_once(2);

  auto snapshot = [](const PlannerResult &r) {
    std::ostringstream out;
    out << r.solved << "|" << r.proposer_calls << "|" << r.generations;
    for (double f : r.best_reward_trace) out << "|" << f;
    for (const Candidate &m : r.population.members) {
      out << "|" << serialize_route(m.route) << "#" << m.reward << "#"
          << m.created_at;
    }
    return out.str();
  };
  CHECK(snapshot(a) == snapshot(b));
  CHECK(snapshot(a) == snapshot(c));
}

TEST_CASE("proposer failures skip offspring without aborting") {
  World w = make_world();
  ScriptedProposer proposer;
  proposer.push_response("no route block in sight");
  proposer.push_response(route_block(kDeadEnd));
  // Third initialization slot hits ScriptExhausted.

  PlannerConfig cfg;
  cfg.n_c = 3;
  cfg.budget = 0;
  cfg.seed = 1;

  PlannerResult res = run_planner("CC(=O)NC", cfg, w.stock, w.templates,
                                  w.db, w.routes, proposer,
                                  HeuristicScScore{});
  CHECK(!res.solved);
  CHECK(res.proposer_calls == 3);
  CHECK(res.skipped_proposals == 2);
  CHECK(res.population.members.size() == 1);
}

TEST_CASE("call ceiling cuts a generation short") {
  World w = make_world();
  ScriptedProposer proposer;
  for (int i = 0; i < 8; ++i) proposer.push_response(route_block(kDeadEnd));

  PlannerConfig cfg;
  cfg.n_c = 3;
  cfg.num_mutations = 2;
  cfg.budget = 5;
  cfg.max_calls = 4;
  cfg.seed = 2;

  PlannerResult res = run_planner("CC(=O)NC", cfg, w.stock, w.templates,
                                  w.db, w.routes, proposer,
                                  HeuristicScScore{});
  CHECK(res.proposer_calls == 4);  // 3 init + 1 truncated generation
  CHECK(res.budget_exhausted);
  CHECK(!res.solved);
}

TEST_CASE("wall clock stops the run between phases") {
  // Proposals take 20 ms each against a 1 ms budget, so the clock expires
  // by the first generation check.
  class SlowProposer : public Proposer {
  public:
    std::string propose(const std::string &prompt) override {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      return inner.propose(prompt);
    }
    ScriptedProposer inner;
  };

  World w = make_world();
  SlowProposer proposer;
  proposer.inner.push_response(route_block(kDeadEnd));

  PlannerConfig cfg;
  cfg.n_c = 1;
  cfg.budget = 10;
  cfg.wall_clock_seconds = 0.001;
  PlannerResult res = run_planner("CC(=O)NC", cfg, w.stock, w.templates,
                                  w.db, w.routes, proposer,
                                  HeuristicScScore{});
  CHECK(res.timed_out);
  CHECK(res.generations == 0);
  CHECK(!res.solved);
}

TEST_CASE("planner rejects unusable input") {
  World w = make_world();
  ScriptedProposer proposer;
  CHECK_THROWS_AS(run_planner("C1CC", small_config(), w.stock, w.templates,
                              w.db, w.routes, proposer, HeuristicScScore{}),
                  DependencyError);

  PlannerConfig bad = small_config();
  bad.n_c = 0;
  CHECK_THROWS_AS(run_planner("CCO", bad, w.stock, w.templates, w.db,
                              w.routes, proposer, HeuristicScScore{}),
                  DependencyError);
}
