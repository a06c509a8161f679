// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "retro/chem/smiles.hpp"
#include "retro/chem/valence.hpp"
#include "retro/errors.hpp"

namespace retro {

namespace {

int order_units(BondOrder order) {
  switch (order) {
    case BondOrder::Double:
      return 2;
    case BondOrder::Triple:
      return 3;
    default:
      return 1;
  }
}

BondGeom flip(BondGeom g) {
  if (g == BondGeom::Up) return BondGeom::Down;
  if (g == BondGeom::Down) return BondGeom::Up;
  return g;
}

// Dense ranks: equal keys share a rank, ranks ordered by key order.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key> &keys) {
  std::vector<Key> sorted(keys);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> ranks(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ranks[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
        sorted.begin());
  }
  return ranks;
}

// Tie-break key order: element, charge, degree, H count, aromatic flag,
// then the remaining annotations.
std::vector<int> initial_ranks(const Molecule &m) {
  using Key = std::tuple<std::string, int, int, int, int, int, int>;
  std::vector<Key> keys;
  keys.reserve(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom &a = m.atom(i);
    keys.emplace_back(a.element, a.charge, m.degree(i), a.hydrogens,
                      a.aromatic ? 1 : 0, a.isotope,
                      static_cast<int>(a.chirality));
  }
  return dense_ranks(keys);
}

// Edge code as seen from one endpoint; direction matters for geometry.
int edge_code(const Bond &b, int from_atom) {
  BondGeom g = b.from == from_atom ? b.geom : flip(b.geom);
  return static_cast<int>(b.order) * 3 + static_cast<int>(g);
}

// Iterative neighborhood refinement to a stable partition.
std::vector<int> refine(const Molecule &m, std::vector<int> ranks) {
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  for (;;) {
    std::vector<Key> keys(ranks.size());
    for (int i = 0; i < m.atom_count(); ++i) {
      keys[static_cast<std::size_t>(i)].first =
          ranks[static_cast<std::size_t>(i)];
      auto &nbrs = keys[static_cast<std::size_t>(i)].second;
      for (int bi : m.incident_bonds(i)) {
        const Bond &b = m.bond(bi);
        int j = b.from == i ? b.to : b.from;
        nbrs.emplace_back(edge_code(b, i), ranks[static_cast<std::size_t>(j)]);
      }
      std::sort(nbrs.begin(), nbrs.end());
    }
    std::vector<int> next = dense_ranks(keys);
    if (next == ranks) return ranks;
    ranks = std::move(next);
  }
}

std::string atom_token(const Molecule &m, int i) {
  const Atom &a = m.atom(i);
  int bond_sum = 0;
  for (int bi : m.incident_bonds(i)) {
    bond_sum += order_units(m.bond(bi).order);
  }
  std::string sym = a.element;
  if (a.aromatic) {
    for (char &c : sym) c = static_cast<char>(std::tolower(c));
  }
  bool plain = organic_subset(a.element) && a.charge == 0 && a.isotope == 0 &&
               a.chirality == Chirality::None &&
               (!a.aromatic || aromatic_form_allowed(a.element));
  if (plain) {
    auto h = implicit_hydrogens(a.element, a.aromatic, bond_sum);
    plain = h.has_value() && *h == a.hydrogens;
  }
  if (plain) return sym;
  std::string out = "[";
  if (a.isotope > 0) out += std::to_string(a.isotope);
  out += sym;
  if (a.chirality == Chirality::Anticlockwise) out += "@";
  if (a.chirality == Chirality::Clockwise) out += "@@";
  if (a.hydrogens == 1) out += "H";
  if (a.hydrogens > 1) out += "H" + std::to_string(a.hydrogens);
  if (a.charge == 1) out += "+";
  if (a.charge > 1) out += "+" + std::to_string(a.charge);
  if (a.charge == -1) out += "-";
  if (a.charge < -1) out += "-" + std::to_string(-a.charge);
  out += "]";
  return out;
}

// Bond token as written when traversal leaves from_atom. Single bonds
// between two aromatic atoms need an explicit '-', aromatic bonds between
// aromatic atoms stay implicit.
std::string bond_token(const Molecule &m, const Bond &b, int from_atom) {
  if (b.geom != BondGeom::None) {
    BondGeom g = b.from == from_atom ? b.geom : flip(b.geom);
    return g == BondGeom::Up ? "/" : "\\";
  }
  bool aromatic_pair =
      m.atom(b.from).aromatic && m.atom(b.to).aromatic;
  switch (b.order) {
    case BondOrder::Single:
      return aromatic_pair ? "-" : "";
    case BondOrder::Double:
      return "=";
    case BondOrder::Triple:
      return "#";
    case BondOrder::Aromatic:
      return aromatic_pair ? "" : ":";
  }
  return "";
}

class Emitter {
public:
  Emitter(const Molecule &m, const std::vector<int> &ranks)
      : m_(m),
        ranks_(ranks),
        visited_(static_cast<std::size_t>(m.atom_count()), false),
        bond_used_(static_cast<std::size_t>(m.bond_count()), false),
        preorder_(static_cast<std::size_t>(m.atom_count()), -1),
        children_(static_cast<std::size_t>(m.atom_count())),
        child_bond_(static_cast<std::size_t>(m.atom_count()), -1) {}

  std::string run() {
    int root = 0;
    for (int i = 1; i < m_.atom_count(); ++i) {
      if (ranks_[static_cast<std::size_t>(i)] <
          ranks_[static_cast<std::size_t>(root)]) {
        root = i;
      }
    }
    structure(root);
    for (auto &[bond, opener, closer] : ring_bonds_) {
      openings_[opener].emplace_back(preorder_[static_cast<std::size_t>(closer)],
                                     bond);
      closings_[closer].emplace_back(preorder_[static_cast<std::size_t>(opener)],
                                     bond);
    }
    for (auto &[atom, list] : openings_) std::sort(list.begin(), list.end());
    for (auto &[atom, list] : closings_) std::sort(list.begin(), list.end());
    for (int d = 1; d < 100; ++d) free_digits_.insert(d);
    std::string out;
    emit(root, out);
    return out;
  }

private:
  const Molecule &m_;
  const std::vector<int> &ranks_;
  std::vector<bool> visited_;
  std::vector<bool> bond_used_;
  std::vector<int> preorder_;
  std::vector<std::vector<int>> children_;
  std::vector<int> child_bond_;
  std::vector<std::tuple<int, int, int>> ring_bonds_;  // bond, opener, closer
  std::map<int, std::vector<std::pair<int, int>>> openings_;  // atom -> (closer preorder, bond)
  std::map<int, std::vector<std::pair<int, int>>> closings_;  // atom -> (opener preorder, bond)
  std::map<int, int> digit_of_;                               // bond -> digit
  std::set<int> free_digits_;
  int clock_ = 0;

  void structure(int u) {
    visited_[static_cast<std::size_t>(u)] = true;
    preorder_[static_cast<std::size_t>(u)] = clock_++;
    std::vector<std::pair<int, int>> order;  // (neighbor rank, bond)
    for (int bi : m_.incident_bonds(u)) {
      const Bond &b = m_.bond(bi);
      int j = b.from == u ? b.to : b.from;
      order.emplace_back(ranks_[static_cast<std::size_t>(j)], bi);
    }
    std::sort(order.begin(), order.end());
    for (auto &[rank, bi] : order) {
      if (bond_used_[static_cast<std::size_t>(bi)]) continue;
      const Bond &b = m_.bond(bi);
      int j = b.from == u ? b.to : b.from;
      bond_used_[static_cast<std::size_t>(bi)] = true;
      if (visited_[static_cast<std::size_t>(j)]) {
        // Opener is whichever endpoint was reached first.
        int opener = preorder_[static_cast<std::size_t>(j)] <
                             preorder_[static_cast<std::size_t>(u)]
                         ? j
                         : u;
        int closer = opener == j ? u : j;
        ring_bonds_.emplace_back(bi, opener, closer);
      } else {
        children_[static_cast<std::size_t>(u)].push_back(j);
        child_bond_[static_cast<std::size_t>(j)] = bi;
        structure(j);
      }
    }
  }

  static std::string digit_text(int d) {
    if (d < 10) return std::to_string(d);
    return "%" + std::string(1, static_cast<char>('0' + d / 10)) +
           std::string(1, static_cast<char>('0' + d % 10));
  }

  void emit(int u, std::string &out) {
    out += atom_token(m_, u);
    auto ci = closings_.find(u);
    if (ci != closings_.end()) {
      for (auto &[opener_pre, bi] : ci->second) {
        int d = digit_of_.at(bi);
        out += digit_text(d);
        free_digits_.insert(d);
      }
    }
    auto oi = openings_.find(u);
    if (oi != openings_.end()) {
      for (auto &[closer_pre, bi] : oi->second) {
        if (free_digits_.empty()) {
          throw Error("ring closure digits exhausted");
        }
        int d = *free_digits_.begin();
        free_digits_.erase(free_digits_.begin());
        digit_of_[bi] = d;
        out += bond_token(m_, m_.bond(bi), u);
        out += digit_text(d);
      }
    }
    const auto &kids = children_[static_cast<std::size_t>(u)];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      int c = kids[k];
      int bi = child_bond_[static_cast<std::size_t>(c)];
      std::string segment = bond_token(m_, m_.bond(bi), u);
      emit(c, segment);
      if (k + 1 < kids.size()) {
        out += "(" + segment + ")";
      } else {
        out += segment;
      }
    }
  }
};

std::string emit_with_ranks(const Molecule &m, const std::vector<int> &ranks) {
  return Emitter(m, ranks).run();
}

// Branch over every member of the lowest still-tied class and keep the
// smallest string; invariant under input atom order by construction.
std::string canon_search(const Molecule &m, std::vector<int> ranks) {
  ranks = refine(m, ranks);
  std::vector<int> class_size(ranks.size(), 0);
  for (int r : ranks) ++class_size[static_cast<std::size_t>(r)];
  int split_rank = -1;
  for (std::size_t r = 0; r < class_size.size(); ++r) {
    if (class_size[r] >= 2) {
      split_rank = static_cast<int>(r);
      break;
    }
  }
  if (split_rank < 0) return emit_with_ranks(m, ranks);
  std::string best;
  bool have = false;
  for (std::size_t a = 0; a < ranks.size(); ++a) {
    if (ranks[a] != split_rank) continue;
    std::vector<int> forked(ranks);
    for (int &v : forked) v *= 2;
    forked[a] -= 1;
    std::string s = canon_search(m, std::move(forked));
    if (!have || s < best) {
      best = std::move(s);
      have = true;
    }
  }
  return best;
}

}  // namespace

std::string to_canonical_smiles(const Molecule &m) {
  if (m.atom_count() == 0) return "";
  std::vector<std::string> parts;
  for (const Molecule &component : m.components()) {
    parts.push_back(canon_search(component, initial_ranks(component)));
  }
  std::sort(parts.begin(), parts.end());
  std::string out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    out += ".";
    out += parts[i];
  }
  return out;
}

}  // namespace retro
