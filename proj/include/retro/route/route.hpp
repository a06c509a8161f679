// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_ROUTE_ROUTE_HPP
#define RETRO_ROUTE_ROUTE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retro/chem/molecule.hpp"
#include "retro/stock.hpp"
#include "retro/templ/reaction_db.hpp"

namespace retro {

// One retrosynthetic step as declared by a proposer. The constructor accepts
// anything; the relations between fields (product drawn from the molecule
// set, updated set = molecule set minus product plus reactants) are enforced
// by evaluate_route, not here, because raw proposer output may violate them.
struct RouteStep {
  std::vector<std::string> molecule_set;
  std::string rational;
  std::string product;
  std::string reaction;
  std::vector<std::string> reactants;
  std::vector<std::string> updated_molecule_set;
};

enum class RouteProvenance { Initialization, Mutation, Scripted };

struct Route {
  std::string target;
  std::vector<RouteStep> steps;
  RouteProvenance provenance = RouteProvenance::Scripted;
};

// Extracts the <ROUTE>...</ROUTE> region from proposer text and parses the
// step list. Accepts strict JSON as well as the loose pseudo-notation the
// prompts elicit: single-quoted keys, lists rendered as quoted "[A, B]"
// strings, unquoted free text for the rationale, trailing commas, and key
// spelling variants (case, underscores, Rational/Rationale). The route
// target is taken from the first step's molecule set.
//
// Throws MissingRouteBlock, EmptyRoute, or StepSchemaError (step indices in
// the error are 1-based).
Route parse_route_block(std::string_view text);

// Renders a route back into a <ROUTE> block whose step list is strict JSON
// in the same key layout the proposer prompts describe. parse_route_block is
// an exact inverse for routes it produced.
std::string serialize_route(const Route &route);

// Per-step outcome of the three evaluation levels: molecule, reaction,
// route. Availability never participates in `valid`.
struct StepVerdict {
  // Molecule level.
  bool molecules_valid = false;
  std::vector<bool> available;  // parallel to molecule_set

  // Reaction level. `grounding` carries the matched database record.
  bool reaction_exists = false;
  bool reaction_valid = false;
  MatchOutcome grounding;
  std::string grounded_reaction;
  std::vector<std::string> grounded_reactants;

  // Route level. `connected` is the conjunction of the three sub-checks,
  // kept separate so feedback can name the one that failed.
  bool chain_ok = false;         // molecule set continues the previous step
  bool product_in_set = false;   // product drawn from the molecule set
  bool update_consistent = false;  // updated set = set - product + reactants
  bool connected = false;

  bool valid = false;
};

struct EvaluationReport {
  std::vector<StepVerdict> steps;
  std::optional<std::size_t> first_invalid_step;
  // Molecule set at the first invalid step, or the final updated set when
  // every step is valid. Canonical SMILES where parsable, raw text where not.
  std::vector<std::string> frontier;
  bool solved = false;
};

// Complexity score in [1, 5]; deterministic and total over valid molecules.
class ComplexityScorer {
public:
  virtual ~ComplexityScorer() = default;
  virtual double score(const Molecule &m) const = 0;
};

// Structural surrogate for a learned synthetic-complexity model:
// clamp(1 + 0.35*log2(heavy + 1) + 0.4*rings + 0.3*stereocenters
//         + 0.2*heteroatoms/4, 1, 5).
class HeuristicScScore : public ComplexityScorer {
public:
  double score(const Molecule &m) const override;
};

double heuristic_sc_score(const Molecule &m);

// Three-level evaluation. Reactions are grounded against the database and,
// on a match, replaced: reactants are recomputed by applying the matched
// record's template backward to the declared product. Later steps chain
// against either the declared or the rewritten predecessor set. Availability
// is reported but excluded from step validity; solved additionally requires
// the final updated set to sit inside the stock.
EvaluationReport evaluate_route(const Route &route, const Stock &stock,
                                const ReactionDb &db,
                                const TemplateSet &templates);

// Partial reward F over a frontier set: minus the summed complexity of the
// non-purchasable members, so larger (closer to zero) is better. Members
// that fail to parse count at the scorer ceiling of 5.
double route_reward(const std::vector<std::string> &frontier,
                    const ComplexityScorer &scorer, const Stock &stock);

}  // namespace retro

#endif  // RETRO_ROUTE_ROUTE_HPP
