// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_EVOLVE_PLANNER_HPP
#define RETRO_EVOLVE_PLANNER_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "retro/proposer/proposer.hpp"
#include "retro/proposer/route_db.hpp"
#include "retro/route/route.hpp"
#include "retro/stock.hpp"
#include "retro/templ/reaction_db.hpp"

namespace retro {

struct PlannerConfig {
  std::size_t n_c = 10;           // population size
  std::size_t n_o = 3;            // reference routes per prompt
  std::size_t num_mutations = 5;  // offspring per generation
  std::size_t budget = 10;        // generations after initialization
  // Hard ceiling on proposer calls; 0 derives n_c + budget * num_mutations.
  std::size_t max_calls = 0;
  double wall_clock_seconds = 3600.0;
  std::size_t parallelism = 1;  // workers per proposal batch
  unsigned seed = 0;
  // Similarity-proportional reference sampling; false switches to
  // deterministic top-n retrieval.
  bool sample_references = true;
};

struct Candidate {
  Route route;
  EvaluationReport report;
  double reward = 0.0;
  std::size_t invalid_steps = 0;
  std::size_t created_at = 0;  // creation order, breaks reward ties
};

struct Population {
  std::vector<Candidate> members;  // descending reward after selection
  std::size_t generation = 0;
};

struct PlannerResult {
  bool solved = false;
  std::vector<Candidate> solutions;
  Population population;
  std::size_t proposer_calls = 0;
  std::size_t skipped_proposals = 0;  // unusable proposer output
  std::size_t generations = 0;        // mutation generations executed
  double elapsed_seconds = 0.0;
  // Best reward after initialization and after each generation.
  std::vector<double> best_reward_trace;
  bool budget_exhausted = false;
  bool timed_out = false;
};

// Index of a member drawn with weight exp(reward); rewards are <= 0 so the
// weights land in (0, 1].
std::size_t sample_parent(const std::vector<Candidate> &members,
                          std::mt19937 &rng);

// Descending-reward truncation to n_c members. Ties prefer fewer invalid
// steps, then earlier creation. The best member always survives.
Population select_survivors(std::vector<Candidate> combined, std::size_t n_c);

// Evolutionary route search. Fills the population with full-route proposals
// for the target, then per generation mutates reward-proportionally sampled
// parents by splicing reproposals onto their valid prefixes, keeping the
// best n_c. Stops on a solved route, the generation budget, the call
// ceiling, or the wall clock. Proposer failures and unparsable replies skip
// the offspring, never the run. `log`, when given, receives one JSON line
// per phase. Throws DependencyError when the target does not parse or the
// config is unusable.
PlannerResult run_planner(const std::string &target,
                          const PlannerConfig &config, const Stock &stock,
                          const TemplateSet &templates, const ReactionDb &db,
                          const RouteDatabase &routes, Proposer &proposer,
                          const ComplexityScorer &scorer,
                          std::ostream *log = nullptr);

}  // namespace retro

#endif  // RETRO_EVOLVE_PLANNER_HPP
