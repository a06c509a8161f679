// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_TEMPL_TEMPLATE_HPP
#define RETRO_TEMPL_TEMPLATE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retro/chem/molecule.hpp"

namespace retro {

// One query atom. Element and aromatic flag are always constrained
// (uppercase = aliphatic, lowercase = aromatic); the rest only when written.
struct AtomPattern {
  std::string element;
  bool aromatic = false;
  std::optional<int> charge;
  std::optional<int> degree;     // D<n>
  std::optional<bool> in_ring;   // R / R0
  std::optional<int> hydrogens;  // H<n>
  int map_class = 0;             // 0 = unmapped
};

struct BondPattern {
  int from = 0;
  int to = 0;
  BondOrder order = BondOrder::Single;
};

// Connected attributed query graph.
class QueryGraph {
public:
  static QueryGraph from_parts(std::vector<AtomPattern> atoms,
                               std::vector<BondPattern> bonds);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const AtomPattern &atom(int i) const {
    return atoms_[static_cast<std::size_t>(i)];
  }
  const BondPattern &bond(int i) const {
    return bonds_[static_cast<std::size_t>(i)];
  }
  const std::vector<int> &incident_bonds(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  bool connected() const;

private:
  std::vector<AtomPattern> atoms_;
  std::vector<BondPattern> bonds_;
  std::vector<std::vector<int>> adjacency_;
};

// Backward reaction template "product_pattern>>reactant_patterns". Every
// product atom is mapped and each map class lands in exactly one reactant
// pattern; unmapped reactant atoms are introduced by the rewrite.
struct ReactionTemplate {
  std::string id;
  std::string name;
  QueryGraph product;
  std::vector<QueryGraph> reactants;
};

// Parses the SMARTS subset: bracket atoms with element, H<n>, charge,
// D<n>, R/R0 predicates and :n maps; plain organic-subset tokens; bonds
// - = # :; branches; ring-closure digits; '.' between reactant patterns.
ReactionTemplate parse_template(std::string_view text, std::string id = "",
                                std::string name = "");

// Regenerates source text; parse_template(serialize_template(t)) is
// structurally equal to t.
std::string serialize_template(const ReactionTemplate &t);

// All injective embeddings (pattern atom index -> molecule atom index),
// non-induced, in deterministic order; stops after `cap` embeddings.
std::vector<std::vector<int>> find_embeddings(const QueryGraph &pattern,
                                              const Molecule &molecule,
                                              int cap = 64);

// Applies the template backward: one reactant set per product-pattern
// embedding, canonicalized and deduplicated. Embeddings whose rewrite
// breaks an atom's valence are dropped; if every embedding breaks,
// RewriteValenceError surfaces the first failure.
std::vector<std::vector<Molecule>> apply_backward(const ReactionTemplate &t,
                                                  const Molecule &product,
                                                  int embedding_cap = 64);

}  // namespace retro

#endif  // RETRO_TEMPL_TEMPLATE_HPP
