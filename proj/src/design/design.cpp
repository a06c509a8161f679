// SPDX-License-Identifier: Apache-2.0

#include "retro/design/design.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <set>
#include <utility>

#include "json.hpp"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/proposer/prompts.hpp"
#include "retro/rng.hpp"
#include "retro/route/route_json.hpp"

namespace retro {

double formula_match_score(const ElementCounts &target,
                           const ElementCounts &actual) {
  std::set<std::string> elements;
  for (const auto &[symbol, n] : target.counts()) elements.insert(symbol);
  for (const auto &[symbol, n] : actual.counts()) elements.insert(symbol);
  if (elements.empty()) return 1.0;

  double sum_sq = 0.0;
  for (const std::string &symbol : elements) {
    double d = target.count(symbol) - actual.count(symbol);
    sum_sq += d * d;
  }
  // Geometric mean of exp(-d^2 / 2) over the element union.
  return std::exp(-sum_sq / (2.0 * static_cast<double>(elements.size())));
}

IsomersOracle::IsomersOracle(ElementCounts formula)
    : formula_(std::move(formula)) {
  if (formula_.empty()) throw DependencyError("isomers oracle needs a formula");
}

std::string IsomersOracle::name() const {
  return "isomers_" + formula_.to_string();
}

std::string IsomersOracle::description() const {
  // Completes the designer prompt's "The <name> score measures ...".
  return "how closely the molecular formula matches " + formula_.to_string() +
         "; an exact match scores 1.0 and the score decays as element counts "
         "deviate.";
}

double IsomersOracle::evaluate(const Molecule &m) const {
  return formula_match_score(formula_, molecular_formula(m));
}

Molecule parse_molecule_block(std::string_view text) {
  std::optional<std::string> block = extract_tagged_block(text, "MOLECULE");
  if (!block) throw MissingMoleculeBlock("reply has no <MOLECULE> block");
  return parse_smiles(*block);
}

namespace {

// Seeds ordered most-similar-first when the oracle has a target formula,
// stock order otherwise.
std::vector<std::string> pick_seeds(const Stock &stock, Oracle &oracle,
                                    std::size_t k) {
  const std::vector<std::string> &members = stock.members();
  std::vector<std::size_t> order(members.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  if (std::optional<ElementCounts> target = oracle.target_formula()) {
    std::vector<double> similarity(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      similarity[i] = formula_match_score(
          *target, molecular_formula(parse_smiles(members[i])));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return similarity[a] > similarity[b];
                     });
  }

  std::vector<std::string> seeds;
  for (std::size_t i = 0; i < k && i < order.size(); ++i) {
    seeds.push_back(members[order[i]]);
  }
  return seeds;
}

// Score-proportional draw; uniform when every archived score is zero.
std::size_t draw_parent(const std::vector<DesignEntry> &archive,
                        std::mt19937 &rng) {
  std::vector<double> weights(archive.size());
  double total = 0.0;
  for (std::size_t i = 0; i < archive.size(); ++i) {
    weights[i] = archive[i].score;
    total += weights[i];
  }
  if (total <= 0.0) {
    return static_cast<std::size_t>(unit_draw(rng) *
                                    static_cast<double>(archive.size())) %
           archive.size();
  }
  return weighted_index(weights, rng);
}

}  // namespace

DesignResult run_designer(const DesignConfig &config, const Stock &stock,
                          const TemplateSet &templates, const ReactionDb &db,
                          const RouteDatabase &routes, Proposer &proposer,
                          Oracle &oracle) {
  if (config.population == 0) {
    throw DependencyError("designer population must be positive");
  }
  if (config.oracle_budget < config.population) {
    throw DependencyError("oracle budget is smaller than the population");
  }
  if (config.sc_threshold < 1.0 || config.sc_threshold > 5.0) {
    throw DependencyError("sc threshold must lie in [1, 5]");
  }
  if (stock.size() == 0) {
    throw DependencyError("designer needs a nonempty stock to seed from");
  }

  DesignResult result;
  std::mt19937 rng(config.seed);
  HeuristicScScore scorer;
  std::size_t base_calls = oracle.calls();

  auto check_synthesis = [&](DesignEntry &entry, std::size_t round) {
    PlannerConfig pc = config.planner;
    pc.seed = config.planner.seed + static_cast<unsigned>(round);
    PlannerResult plan = run_planner(entry.smiles, pc, stock, templates, db,
                                     routes, proposer, scorer);
    result.planner_calls += plan.proposer_calls;
    if (plan.solved) {
      entry.synthesizable = true;
      entry.route = plan.solutions.front().route;
    }
  };

  auto push = [&](DesignEntry entry) {
    if (result.archive.empty() ||
        entry.score > result.archive[result.top_index].score) {
      result.top_index = result.archive.size();
    }
    result.archive.push_back(std::move(entry));
  };

  // Seed population: purchasable by construction, so the empty route is
  // already a solved synthesis.
  for (const std::string &seed : pick_seeds(stock, oracle, config.population)) {
    DesignEntry entry;
    entry.smiles = seed;
    entry.score = oracle.score(parse_smiles(seed));
    entry.synthesizable = true;
    entry.route = Route{seed, {}, RouteProvenance::Scripted};
    entry.round = 0;
    push(std::move(entry));
  }

  for (std::size_t round = 1; round <= config.generations; ++round) {
    if (oracle.calls() - base_calls >= config.oracle_budget) break;

    const DesignEntry &a = result.archive[draw_parent(result.archive, rng)];
    const DesignEntry &b = result.archive[draw_parent(result.archive, rng)];
    std::string prompt =
        build_designer_prompt(a.smiles, a.score, b.smiles, b.score,
                              oracle.name(), oracle.description());

    ++result.designer_calls;
    std::string reply;
    try {
      reply = proposer.propose(prompt);
    } catch (const std::exception &) {
      ++result.skipped_rounds;
      continue;
    }

    Molecule m;
    try {
      m = parse_molecule_block(reply);
    } catch (const Error &) {
      ++result.skipped_rounds;
      continue;
    }
    if (heuristic_sc_score(m) > config.sc_threshold) {
      ++result.skipped_rounds;
      continue;
    }

    DesignEntry entry;
    entry.smiles = to_canonical_smiles(m);
    entry.score = oracle.score(m);
    entry.round = round;
    if (config.plan_each_round) check_synthesis(entry, round);
    push(std::move(entry));
  }

  // Final-only mode leaves proposals unplanned except the winner.
  if (!config.plan_each_round && !result.archive[result.top_index].route) {
    check_synthesis(result.archive[result.top_index], config.generations + 1);
  }

  result.oracle_calls = oracle.calls() - base_calls;
  return result;
}

void write_archive(const std::vector<DesignEntry> &archive,
                   std::ostream &out) {
  for (const DesignEntry &entry : archive) {
    nlohmann::json line = {{"molecule", entry.smiles},
                           {"score", entry.score},
                           {"round", entry.round},
                           {"synthesizable", entry.synthesizable},
                           {"route", nullptr}};
    if (entry.route) line["route"] = route_to_json(*entry.route);
    out << line.dump() << "\n";
  }
}

}  // namespace retro
