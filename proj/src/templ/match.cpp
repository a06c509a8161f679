// SPDX-License-Identifier: Apache-2.0

#include <vector>

#include "retro/templ/template.hpp"

namespace retro {

namespace {

bool atom_matches(const AtomPattern &p, const Molecule &m, int i) {
  const Atom &a = m.atom(i);
  if (p.element != a.element) return false;
  if (p.aromatic != a.aromatic) return false;
  if (p.charge && *p.charge != a.charge) return false;
  if (p.degree && *p.degree != m.degree(i)) return false;
  if (p.in_ring && *p.in_ring != m.atom_in_ring(i)) return false;
  if (p.hydrogens && *p.hydrogens != a.hydrogens) return false;
  return true;
}

// Search state: pattern atoms are assigned in a connected DFS order so every
// candidate after the first is constrained by at least one mapped neighbor.
struct Matcher {
  const QueryGraph &pattern;
  const Molecule &mol;
  int cap;
  std::vector<int> order;                       // pattern atoms, search order
  std::vector<std::vector<std::pair<int, BondOrder>>> anchors;
  // anchors[k]: (earlier slot index, required order) checks for order[k]
  std::vector<int> assignment;                  // pattern atom -> molecule atom
  std::vector<bool> used;                       // molecule atom taken
  std::vector<std::vector<int>> results;

  Matcher(const QueryGraph &p, const Molecule &m, int limit)
      : pattern(p), mol(m), cap(limit) {
    build_order();
    assignment.assign(static_cast<std::size_t>(p.atom_count()), -1);
    used.assign(static_cast<std::size_t>(m.atom_count()), false);
  }

  void build_order() {
    int n = pattern.atom_count();
    std::vector<bool> placed(static_cast<std::size_t>(n), false);
    std::vector<int> slot_of(static_cast<std::size_t>(n), -1);
    order.reserve(static_cast<std::size_t>(n));
    anchors.resize(static_cast<std::size_t>(n));
    // Pattern is connected; grow from atom 0 by index-order BFS over a DFS
    // stack for determinism.
    std::vector<int> stack = {0};
    placed[0] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      int slot = static_cast<int>(order.size());
      slot_of[static_cast<std::size_t>(u)] = slot;
      order.push_back(u);
      for (int bi : pattern.incident_bonds(u)) {
        const BondPattern &b = pattern.bond(bi);
        int j = b.from == u ? b.to : b.from;
        if (!placed[static_cast<std::size_t>(j)]) {
          placed[static_cast<std::size_t>(j)] = true;
          stack.push_back(j);
        }
      }
    }
    // Every pattern bond constrains the later of its two endpoints.
    for (int bi = 0; bi < pattern.bond_count(); ++bi) {
      const BondPattern &b = pattern.bond(bi);
      int sa = slot_of[static_cast<std::size_t>(b.from)];
      int sb = slot_of[static_cast<std::size_t>(b.to)];
      int later = sa > sb ? sa : sb;
      int earlier = sa > sb ? sb : sa;
      anchors[static_cast<std::size_t>(later)].emplace_back(earlier, b.order);
    }
  }

  void search(std::size_t k) {
    if (static_cast<int>(results.size()) >= cap) return;
    if (k == order.size()) {
      results.push_back(assignment);
      return;
    }
    int p_atom = order[k];
    for (int j = 0; j < mol.atom_count(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      if (!atom_matches(pattern.atom(p_atom), mol, j)) continue;
      bool ok = true;
      for (auto &[earlier_slot, required] : anchors[k]) {
        int partner = assignment[static_cast<std::size_t>(
            order[static_cast<std::size_t>(earlier_slot)])];
        auto bond = mol.bond_between(partner, j);
        if (!bond || mol.bond(*bond).order != required) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      assignment[static_cast<std::size_t>(p_atom)] = j;
      used[static_cast<std::size_t>(j)] = true;
      search(k + 1);
      used[static_cast<std::size_t>(j)] = false;
      assignment[static_cast<std::size_t>(p_atom)] = -1;
      if (static_cast<int>(results.size()) >= cap) return;
    }
  }
};

}  // namespace

std::vector<std::vector<int>> find_embeddings(const QueryGraph &pattern,
                                              const Molecule &molecule,
                                              int cap) {
  if (pattern.atom_count() == 0 || cap <= 0) return {};
  Matcher m(pattern, molecule, cap);
  m.search(0);
  return m.results;
}

}  // namespace retro
