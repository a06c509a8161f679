// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_DESIGN_DESIGN_HPP
#define RETRO_DESIGN_DESIGN_HPP

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retro/chem/formula.hpp"
#include "retro/chem/molecule.hpp"
#include "retro/evolve/planner.hpp"
#include "retro/proposer/proposer.hpp"
#include "retro/proposer/route_db.hpp"
#include "retro/route/route.hpp"
#include "retro/stock.hpp"
#include "retro/templ/reaction_db.hpp"

namespace retro {

// Property oracle mapping a molecule to [0, 1]. Subclasses implement
// evaluate(); the base class owns the call counter so every score() is
// counted exactly once. Evaluations must be deterministic.
class Oracle {
public:
  virtual ~Oracle() = default;

  double score(const Molecule &m) {
    ++calls_;
    return evaluate(m);
  }

  std::size_t calls() const { return calls_; }

  virtual std::string name() const = 0;
  // Fragment completing "The <name> score measures ..." in the designer
  // prompt; end it with a period.
  virtual std::string description() const = 0;
  // Target formula for oracles that have one; guides designer seeding.
  virtual std::optional<ElementCounts> target_formula() const {
    return std::nullopt;
  }

protected:
  virtual double evaluate(const Molecule &m) const = 0;

private:
  std::size_t calls_ = 0;
};

// Similarity of a molecule's formula to `target`: per element e in the
// union of both, g(d) = exp(-d^2 / 2) with d the count difference, combined
// as a geometric mean. 1.0 iff the counts match exactly, smoothly
// decreasing otherwise. The functional form is a local choice; swap the
// oracle out for a different shape.
double formula_match_score(const ElementCounts &target,
                           const ElementCounts &actual);

class IsomersOracle : public Oracle {
public:
  explicit IsomersOracle(ElementCounts formula);

  std::string name() const override;
  std::string description() const override;
  std::optional<ElementCounts> target_formula() const override {
    return formula_;
  }

protected:
  double evaluate(const Molecule &m) const override;

private:
  ElementCounts formula_;
};

struct DesignConfig {
  std::size_t population = 4;      // seed archive size
  std::size_t generations = 10;    // proposal rounds after seeding
  std::size_t oracle_budget = 20;  // hard cap on oracle evaluations
  // Proposals whose heuristic complexity exceeds this are discarded before
  // the oracle sees them.
  double sc_threshold = 3.5;
  // true plans synthesis for every scored proposal in its round; false
  // defers to a single planner run on the final best entry.
  bool plan_each_round = true;
  // Synthesis checks run with this config; its seed is offset by the round
  // index so each check is reproducible but independent.
  PlannerConfig planner;
  unsigned seed = 0;
};

struct DesignEntry {
  std::string smiles;  // canonical
  double score = 0.0;
  bool synthesizable = false;
  std::optional<Route> route;  // solved route when synthesizable
  std::size_t round = 0;       // 0 = seed population
};

struct DesignResult {
  std::vector<DesignEntry> archive;  // append-only, seeds first
  std::size_t top_index = 0;         // argmax score, earliest on ties
  std::size_t oracle_calls = 0;
  std::size_t designer_calls = 0;    // proposer calls for designer prompts
  std::size_t planner_calls = 0;     // proposer calls inside synthesis checks
  std::size_t skipped_rounds = 0;    // unusable replies plus filtered proposals

  const DesignEntry &top() const { return archive[top_index]; }
};

// Extracts the <MOLECULE>...</MOLECULE> region and parses it. Throws
// MissingMoleculeBlock when the tags are absent, ParseError and friends on
// bad SMILES.
Molecule parse_molecule_block(std::string_view text);

// Evolutionary molecular design. Seeds the archive with the `population`
// stock members most similar to the oracle's target formula (stock order
// when it has none), then per round samples two parents
// score-proportionally, asks the proposer for an improved molecule, parses
// the <MOLECULE> block, discards it when unparsable or above the complexity
// threshold, scores survivors with the oracle, and checks synthesizability
// with the route planner. Proposer failures skip the round. Stops after
// `generations` rounds or when the next evaluation would exceed the oracle
// budget, whichever is first. Throws DependencyError on an empty stock or
// an unusable config.
DesignResult run_designer(const DesignConfig &config, const Stock &stock,
                          const TemplateSet &templates, const ReactionDb &db,
                          const RouteDatabase &routes, Proposer &proposer,
                          Oracle &oracle);

// One JSON object per archive entry: molecule, score, round, synthesizable,
// route (step list, null when absent).
void write_archive(const std::vector<DesignEntry> &archive, std::ostream &out);

}  // namespace retro

#endif  // RETRO_DESIGN_DESIGN_HPP
