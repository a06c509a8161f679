// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "retro/chem/smiles.hpp"
#include "retro/chem/valence.hpp"
#include "retro/errors.hpp"
#include "retro/templ/template.hpp"

namespace retro {

namespace {

// Hydrogen handling per rewritten atom.
enum class HydrogenRule {
  Explicit,        // pattern fixed the count
  KeepIfUnchanged, // mapped atom: keep unless its bond sum changed
  Derive,          // new atom: from the valence table
};

std::vector<Molecule> rewrite_one(const ReactionTemplate &t,
                                  const Molecule &product,
                                  const std::vector<int> &embedding) {
  // Molecule bonds consumed by the product pattern.
  std::set<std::pair<int, int>> covered;
  for (int bi = 0; bi < t.product.bond_count(); ++bi) {
    const BondPattern &b = t.product.bond(bi);
    int a = embedding[static_cast<std::size_t>(b.from)];
    int z = embedding[static_cast<std::size_t>(b.to)];
    covered.insert({std::min(a, z), std::max(a, z)});
  }

  std::map<int, int> mol_of_map;
  for (int i = 0; i < t.product.atom_count(); ++i) {
    mol_of_map[t.product.atom(i).map_class] =
        embedding[static_cast<std::size_t>(i)];
  }

  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<HydrogenRule> rules;
  std::vector<int> old_atom;  // molecule atom behind each new atom, or -1
  std::vector<int> new_index_of_mol(
      static_cast<std::size_t>(product.atom_count()), -1);

  for (const QueryGraph &rp : t.reactants) {
    int base = static_cast<int>(atoms.size());
    for (int i = 0; i < rp.atom_count(); ++i) {
      const AtomPattern &ap = rp.atom(i);
      Atom a;
      if (ap.map_class > 0) {
        int ma = mol_of_map.at(ap.map_class);
        a = product.atom(ma);
        new_index_of_mol[static_cast<std::size_t>(ma)] =
            static_cast<int>(atoms.size());
        old_atom.push_back(ma);
      } else {
        old_atom.push_back(-1);
      }
      a.element = ap.element;
      a.aromatic = ap.aromatic;
      if (ap.charge) a.charge = *ap.charge;
      a.map_class = 0;
      if (ap.hydrogens) {
        a.hydrogens = *ap.hydrogens;
        rules.push_back(HydrogenRule::Explicit);
      } else if (ap.map_class > 0) {
        rules.push_back(HydrogenRule::KeepIfUnchanged);
      } else {
        a.hydrogens = 0;
        rules.push_back(HydrogenRule::Derive);
      }
      atoms.push_back(std::move(a));
    }
    for (int bi = 0; bi < rp.bond_count(); ++bi) {
      const BondPattern &b = rp.bond(bi);
      bonds.push_back(
          Bond{base + b.from, base + b.to, b.order, BondGeom::None});
    }
  }

  // Unmatched product atoms ride along unchanged.
  std::vector<bool> matched(static_cast<std::size_t>(product.atom_count()),
                            false);
  for (int ma : embedding) matched[static_cast<std::size_t>(ma)] = true;
  for (int i = 0; i < product.atom_count(); ++i) {
    if (matched[static_cast<std::size_t>(i)]) continue;
    new_index_of_mol[static_cast<std::size_t>(i)] =
        static_cast<int>(atoms.size());
    atoms.push_back(product.atom(i));
    rules.push_back(HydrogenRule::Explicit);
    old_atom.push_back(i);
  }

  for (int bi = 0; bi < product.bond_count(); ++bi) {
    const Bond &b = product.bond(bi);
    std::pair<int, int> key{std::min(b.from, b.to), std::max(b.from, b.to)};
    if (covered.count(key)) continue;
    int nf = new_index_of_mol[static_cast<std::size_t>(b.from)];
    int nt = new_index_of_mol[static_cast<std::size_t>(b.to)];
    bonds.push_back(Bond{nf, nt, b.order, b.geom});
  }

  // Resolve hydrogen counts against the new bond environment.
  std::vector<int> new_sum(atoms.size(), 0);
  for (const Bond &b : bonds) {
    new_sum[static_cast<std::size_t>(b.from)] += bond_order_units(b.order);
    new_sum[static_cast<std::size_t>(b.to)] += bond_order_units(b.order);
  }
  std::vector<int> old_sum(static_cast<std::size_t>(product.atom_count()), 0);
  for (int bi = 0; bi < product.bond_count(); ++bi) {
    const Bond &b = product.bond(bi);
    old_sum[static_cast<std::size_t>(b.from)] += bond_order_units(b.order);
    old_sum[static_cast<std::size_t>(b.to)] += bond_order_units(b.order);
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Atom &a = atoms[i];
    switch (rules[i]) {
      case HydrogenRule::Explicit:
        break;
      case HydrogenRule::KeepIfUnchanged: {
        if (old_atom[i] >= 0 &&
            old_sum[static_cast<std::size_t>(old_atom[i])] ==
                new_sum[i] &&
            a.element == product.atom(old_atom[i]).element &&
            a.aromatic == product.atom(old_atom[i]).aromatic) {
          break;  // environment untouched, hydrogens carry over
        }
        [[fallthrough]];
      }
      case HydrogenRule::Derive: {
        auto h = implicit_hydrogens(a.element, a.aromatic, new_sum[i]);
        if (!h.has_value()) {
          throw RewriteValenceError(
              "rewritten atom '" + a.element + "' with bond order sum " +
              std::to_string(new_sum[i]) + " exceeds its valence");
        }
        a.hydrogens = *h;
        break;
      }
    }
  }

  // Neutral atoms must stay inside the valence table, explicit hydrogen
  // counts included. Charged centers are exempt (the table is neutral-only)
  // and aromatic bonds count one unit, which keeps lone-pair donors like
  // furan oxygen legal.
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Atom &a = atoms[i];
    if (a.charge != 0) continue;
    std::span<const int> valences = standard_valences(a.element);
    if (valences.empty()) continue;
    int total = new_sum[i] + a.hydrogens;
    if (total > valences.back()) {
      throw RewriteValenceError(
          "rewritten atom '" + a.element + "' carries " +
          std::to_string(total) + " bond units against a maximum valence of " +
          std::to_string(valences.back()));
    }
  }

  Molecule combined = Molecule::from_parts(std::move(atoms), std::move(bonds));
  std::vector<Molecule> parts = combined.components();
  std::sort(parts.begin(), parts.end(), [](const Molecule &x, const Molecule &y) {
    return to_canonical_smiles(x) < to_canonical_smiles(y);
  });
  return parts;
}

}  // namespace

std::vector<std::vector<Molecule>> apply_backward(const ReactionTemplate &t,
                                                  const Molecule &product,
                                                  int embedding_cap) {
  std::vector<std::vector<int>> embeddings =
      find_embeddings(t.product, product, embedding_cap);
  if (embeddings.empty()) return {};

  std::vector<std::vector<Molecule>> results;
  std::set<std::string> seen;
  std::string first_failure;
  for (const std::vector<int> &embedding : embeddings) {
    try {
      std::vector<Molecule> parts = rewrite_one(t, product, embedding);
      std::string key;
      for (const Molecule &m : parts) {
        if (!key.empty()) key += ".";
        key += to_canonical_smiles(m);
      }
      if (seen.insert(key).second) {
        results.push_back(std::move(parts));
      }
    } catch (const Error &e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  if (results.empty()) {
    throw RewriteValenceError(first_failure);
  }
  return results;
}

}  // namespace retro
