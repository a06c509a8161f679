// SPDX-License-Identifier: Apache-2.0

#include "retro/chem/molecule.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <utility>

#include "retro/errors.hpp"

namespace retro {

Molecule Molecule::from_parts(std::vector<Atom> atoms,
                              std::vector<Bond> bonds) {
  Molecule m;
  m.atoms_ = std::move(atoms);
  m.bonds_ = std::move(bonds);
  m.finalize();
  return m;
}

void Molecule::finalize() {
  const int n = static_cast<int>(atoms_.size());
  for (const Atom &a : atoms_) {
    if (a.hydrogens < 0) {
      throw Error("atom '" + a.element + "' has negative hydrogen count");
    }
  }
  adjacency_.assign(atoms_.size(), {});
  for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
    const Bond &b = bonds_[bi];
    if (b.from < 0 || b.from >= n || b.to < 0 || b.to >= n) {
      throw Error("bond endpoint out of range");
    }
    if (b.from == b.to) {
      throw Error("self-loop bond on atom " + std::to_string(b.from));
    }
    for (int other : adjacency_[static_cast<std::size_t>(b.from)]) {
      const Bond &o = bonds_[static_cast<std::size_t>(other)];
      int far = o.from == b.from ? o.to : o.from;
      if (far == b.to) {
        throw Error("duplicate bond between atoms " + std::to_string(b.from) +
                    " and " + std::to_string(b.to));
      }
    }
    adjacency_[static_cast<std::size_t>(b.from)].push_back(
        static_cast<int>(bi));
    adjacency_[static_cast<std::size_t>(b.to)].push_back(static_cast<int>(bi));
  }

  // Components.
  component_of_.assign(atoms_.size(), -1);
  component_count_ = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (component_of_[static_cast<std::size_t>(s)] != -1) continue;
    stack.push_back(s);
    component_of_[static_cast<std::size_t>(s)] = component_count_;
    while (!stack.empty()) {
      int a = stack.back();
      stack.pop_back();
      for (int bi : adjacency_[static_cast<std::size_t>(a)]) {
        int nb = neighbor_of(a, bi);
        if (component_of_[static_cast<std::size_t>(nb)] == -1) {
          component_of_[static_cast<std::size_t>(nb)] = component_count_;
          stack.push_back(nb);
        }
      }
    }
    ++component_count_;
  }

  ring_count_ = static_cast<int>(bonds_.size()) - n + component_count_;

  // Ring membership: a bond is in a ring iff it is not a bridge. Iterative
  // DFS lowlink (Tarjan bridges).
  atom_in_ring_.assign(atoms_.size(), false);
  bond_in_ring_.assign(bonds_.size(), false);
  std::vector<int> disc(atoms_.size(), -1), low(atoms_.size(), 0);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next_edge;
  };
  std::vector<Frame> frames;
  for (int s = 0; s < n; ++s) {
    if (disc[static_cast<std::size_t>(s)] != -1) continue;
    frames.push_back({s, -1, 0});
    disc[static_cast<std::size_t>(s)] = low[static_cast<std::size_t>(s)] =
        timer++;
    while (!frames.empty()) {
      Frame &f = frames.back();
      auto &edges = adjacency_[static_cast<std::size_t>(f.atom)];
      if (f.next_edge < edges.size()) {
        int bi = edges[f.next_edge++];
        if (bi == f.parent_bond) continue;
        int nb = neighbor_of(f.atom, bi);
        if (disc[static_cast<std::size_t>(nb)] == -1) {
          disc[static_cast<std::size_t>(nb)] =
              low[static_cast<std::size_t>(nb)] = timer++;
          frames.push_back({nb, bi, 0});
        } else {
          // Back edge: always part of a cycle.
          low[static_cast<std::size_t>(f.atom)] =
              std::min(low[static_cast<std::size_t>(f.atom)],
                       disc[static_cast<std::size_t>(nb)]);
          bond_in_ring_[static_cast<std::size_t>(bi)] = true;
        }
      } else {
        int child = f.atom;
        int via = f.parent_bond;
        frames.pop_back();
        if (!frames.empty()) {
          int parent = frames.back().atom;
          low[static_cast<std::size_t>(parent)] =
              std::min(low[static_cast<std::size_t>(parent)],
                       low[static_cast<std::size_t>(child)]);
          if (low[static_cast<std::size_t>(child)] <=
              disc[static_cast<std::size_t>(parent)]) {
            bond_in_ring_[static_cast<std::size_t>(via)] = true;
          }
        }
      }
    }
  }
  for (std::size_t bi = 0; bi < bonds_.size(); ++bi) {
    if (bond_in_ring_[bi]) {
      atom_in_ring_[static_cast<std::size_t>(bonds_[bi].from)] = true;
      atom_in_ring_[static_cast<std::size_t>(bonds_[bi].to)] = true;
    }
  }
}

std::optional<int> Molecule::bond_between(int a, int b) const {
  for (int bi : incident_bonds(a)) {
    if (neighbor_of(a, bi) == b) return bi;
  }
  return std::nullopt;
}

int Molecule::heavy_atom_count() const {
  int c = 0;
  for (const Atom &a : atoms_) {
    if (a.element != "H") ++c;
  }
  return c;
}

int Molecule::heteroatom_count() const {
  int c = 0;
  for (const Atom &a : atoms_) {
    if (a.element != "H" && a.element != "C") ++c;
  }
  return c;
}

int Molecule::stereocenter_count() const {
  int c = 0;
  for (const Atom &a : atoms_) {
    if (a.chirality != Chirality::None) ++c;
  }
  return c;
}

std::vector<Molecule> Molecule::components() const {
  std::vector<Molecule> result;
  result.reserve(static_cast<std::size_t>(component_count_));
  for (int comp = 0; comp < component_count_; ++comp) {
    std::vector<Atom> atoms;
    std::vector<int> new_index(atoms_.size(), -1);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      if (component_of_[i] == comp) {
        new_index[i] = static_cast<int>(atoms.size());
        atoms.push_back(atoms_[i]);
      }
    }
    std::vector<Bond> bonds;
    for (const Bond &b : bonds_) {
      if (component_of_[static_cast<std::size_t>(b.from)] == comp) {
        Bond nb = b;
        nb.from = new_index[static_cast<std::size_t>(b.from)];
        nb.to = new_index[static_cast<std::size_t>(b.to)];
        bonds.push_back(nb);
      }
    }
    result.push_back(from_parts(std::move(atoms), std::move(bonds)));
  }
  return result;
}

Molecule Molecule::permuted(const std::vector<int> &perm) const {
  if (perm.size() != atoms_.size()) {
    throw Error("permutation size mismatch");
  }
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  }
  std::vector<Atom> atoms(atoms_.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    atoms[i] = atoms_[static_cast<std::size_t>(perm[i])];
  }
  std::vector<Bond> bonds = bonds_;
  for (Bond &b : bonds) {
    b.from = inverse[static_cast<std::size_t>(b.from)];
    b.to = inverse[static_cast<std::size_t>(b.to)];
  }
  return from_parts(std::move(atoms), std::move(bonds));
}

}  // namespace retro
