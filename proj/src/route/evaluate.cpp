// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/route/route.hpp"
#include "retro/templ/template.hpp"

namespace retro {
namespace {

// Canonical form where the text parses, raw text otherwise. Unparsable
// entries already fail the molecule level, but the route-level multiset
// comparisons still need a deterministic key for them.
std::string canon_or_raw(const std::string &smiles) {
  try {
    return canonical_smiles(smiles);
  } catch (const Error &) {
    return smiles;
  }
}

using Multiset = std::map<std::string, int>;

Multiset to_multiset(const std::vector<std::string> &items) {
  Multiset out;
  for (const std::string &s : items) ++out[canon_or_raw(s)];
  return out;
}

std::vector<std::string> canon_all(const std::vector<std::string> &items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const std::string &s : items) out.push_back(canon_or_raw(s));
  return out;
}

bool parses(const std::string &s) {
  try {
    parse_smiles(s);
    return true;
  } catch (const Error &) {
    return false;
  }
}

bool all_parse(const std::vector<std::string> &items) {
  return std::all_of(items.begin(), items.end(),
                     [](const std::string &s) { return parses(s); });
}

// molecule_set with one copy of the product removed and the reactants added.
Multiset successor_set(Multiset set, const std::string &product_canon,
                       const std::vector<std::string> &reactants_canon) {
  auto it = set.find(product_canon);
  if (it != set.end() && --it->second == 0) set.erase(it);
  for (const std::string &r : reactants_canon) ++set[r];
  return set;
}

std::string join(const std::vector<std::string> &items, char sep) {
  std::string out;
  for (const std::string &s : items) {
    if (!out.empty()) out.push_back(sep);
    out += s;
  }
  return out;
}

}  // namespace

double heuristic_sc_score(const Molecule &m) {
  double raw = 1.0 + 0.35 * std::log2(m.heavy_atom_count() + 1.0) +
               0.4 * m.ring_count() + 0.3 * m.stereocenter_count() +
               0.2 * m.heteroatom_count() / 4.0;
  return std::clamp(raw, 1.0, 5.0);
}

double HeuristicScScore::score(const Molecule &m) const {
  return heuristic_sc_score(m);
}

EvaluationReport evaluate_route(const Route &route, const Stock &stock,
                                const ReactionDb &db,
                                const TemplateSet &templates) {
  EvaluationReport report;
  const std::string target_canon = canon_or_raw(route.target);

  // Chaining accepts either the declared updated set or the one rebuilt
  // from grounded reactants, so a grounding that swaps reactants does not
  // cascade into failures downstream.
  Multiset prev_declared{{target_canon, 1}};
  Multiset prev_rewritten = prev_declared;

  for (std::size_t i = 0; i < route.steps.size(); ++i) {
    const RouteStep &step = route.steps[i];
    StepVerdict v;

    // Molecule level.
    v.molecules_valid = all_parse(step.molecule_set) && parses(step.product) &&
                        all_parse(step.reactants) &&
                        all_parse(step.updated_molecule_set);
    for (const std::string &s : step.molecule_set) {
      bool avail = false;
      try {
        avail = stock.contains(parse_smiles(s));
      } catch (const Error &) {
      }
      v.available.push_back(avail);
    }

    const std::string product_canon = canon_or_raw(step.product);
    const std::vector<std::string> declared_reactants =
        canon_all(step.reactants);

    // Reaction level. The declared reaction may be reaction SMILES in either
    // orientation or a bare template name; in the latter case the proposal
    // is rebuilt from the declared reactants and product.
    std::optional<Molecule> product_mol;
    try {
      product_mol = parse_smiles(step.product);
    } catch (const Error &) {
    }
    if (product_mol) {
      std::string proposal =
          step.reaction.find(">>") != std::string::npos
              ? step.reaction
              : join(step.reactants, '.') + ">>" + step.product;
      try {
        v.grounding = ground_reaction(proposal, *product_mol, db, templates);
      } catch (const Error &) {
        v.grounding = MatchOutcome{};
      }
    }

    if (v.grounding.exists() && product_mol) {
      v.reaction_exists = true;
      const ReactionRecord &rec = *v.grounding.record;
      std::vector<std::vector<std::string>> candidates;
      if (v.grounding.kind == MatchOutcome::Kind::Exact || !rec.template_id) {
        // The database vouches for the recorded reactant set directly.
        candidates.push_back(rec.reactants);
      } else {
        const ReactionTemplate *t = templates.find(*rec.template_id);
        if (t) {
          try {
            for (const auto &set : apply_backward(*t, *product_mol)) {
              std::vector<std::string> canon;
              canon.reserve(set.size());
              for (const Molecule &m : set) {
                canon.push_back(to_canonical_smiles(m));
              }
              candidates.push_back(std::move(canon));
            }
          } catch (const Error &) {
          }
        }
      }
      if (!candidates.empty()) {
        v.reaction_valid = true;
        // Keep the proposer's reactant set when the template reproduces it;
        // otherwise the first rewrite is the replacement.
        Multiset declared_ms = to_multiset(step.reactants);
        const std::vector<std::string> *chosen = &candidates.front();
        for (const auto &c : candidates) {
          Multiset cm;
          for (const std::string &s : c) ++cm[s];
          if (cm == declared_ms) {
            chosen = &c;
            break;
          }
        }
        v.grounded_reactants = *chosen;
        std::sort(v.grounded_reactants.begin(), v.grounded_reactants.end());
        v.grounded_reaction =
            join(v.grounded_reactants, '.') + ">>" + product_canon;
      }
    }

    // Route level.
    Multiset current = to_multiset(step.molecule_set);
    v.chain_ok = current == prev_declared || current == prev_rewritten;
    v.product_in_set = current.count(product_canon) > 0;

    Multiset declared_updated = to_multiset(step.updated_molecule_set);
    Multiset from_declared =
        successor_set(current, product_canon, declared_reactants);
    Multiset from_grounded;
    v.update_consistent = declared_updated == from_declared;
    if (v.reaction_valid) {
      from_grounded =
          successor_set(current, product_canon, v.grounded_reactants);
      v.update_consistent =
          v.update_consistent || declared_updated == from_grounded;
    }
    v.connected = v.chain_ok && v.product_in_set && v.update_consistent;

    v.valid = v.molecules_valid && v.reaction_exists && v.reaction_valid &&
              v.connected;
    if (!v.valid && !report.first_invalid_step) {
      report.first_invalid_step = i;
    }

    prev_declared = declared_updated;
    prev_rewritten = v.reaction_valid ? from_grounded : declared_updated;
    report.steps.push_back(std::move(v));
  }

  if (route.steps.empty()) {
    report.frontier = {target_canon};
    report.solved = stock.contains_canonical(target_canon);
  } else if (report.first_invalid_step) {
    report.frontier =
        canon_all(route.steps[*report.first_invalid_step].molecule_set);
    report.solved = false;
  } else {
    report.frontier = canon_all(route.steps.back().updated_molecule_set);
    report.solved = std::all_of(
        report.frontier.begin(), report.frontier.end(),
        [&](const std::string &s) { return stock.contains_canonical(s); });
  }
  return report;
}

double route_reward(const std::vector<std::string> &frontier,
                    const ComplexityScorer &scorer, const Stock &stock) {
  double total = 0.0;
  for (const std::string &s : frontier) {
    std::optional<Molecule> m;
    try {
      m = parse_smiles(s);
    } catch (const Error &) {
    }
    if (m && stock.contains(*m)) continue;
    // Unparsable members count at the scorer ceiling so broken frontiers
    // rank below structurally sound ones.
    total += m ? scorer.score(*m) : 5.0;
  }
  return -total;
}

}  // namespace retro
