// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_CHEM_MOLECULE_HPP
#define RETRO_CHEM_MOLECULE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace retro {

enum class BondOrder : std::uint8_t {
  Single = 1,
  Double = 2,
  Triple = 3,
  Aromatic = 4,
};

// Tetrahedral parity annotation, preserved from input. No 3D validation is
// performed; the tag is treated as an opaque atom attribute.
enum class Chirality : std::uint8_t {
  None = 0,
  Anticlockwise,  // @
  Clockwise,      // @@
};

// Directional single-bond annotation (cis/trans markers). Stored relative to
// the bond's (from, to) orientation.
enum class BondGeom : std::uint8_t {
  None = 0,
  Up,    // '/'
  Down,  // '\'
};

struct Atom {
  std::string element;
  int charge = 0;
  // Total attached hydrogens. Derived from the valence table for
  // organic-subset atoms, taken verbatim for bracket atoms.
  int hydrogens = 0;
  bool aromatic = false;
  // True when the atom was written in brackets; presentation only, never
  // part of graph identity.
  bool bracket = false;
  int isotope = 0;  // 0 = unspecified
  Chirality chirality = Chirality::None;
  // Atom-map class from reaction SMILES input; preserved for diagnostics,
  // excluded from identity and canonical output.
  int map_class = 0;
};

struct Bond {
  int from = 0;
  int to = 0;
  BondOrder order = BondOrder::Single;
  BondGeom geom = BondGeom::None;
};

// Contribution of a bond to an atom's valence sum; aromatic bonds count 1,
// the delocalization correction lives in the hydrogen derivation rule.
inline int bond_order_units(BondOrder order) {
  switch (order) {
    case BondOrder::Double:
      return 2;
    case BondOrder::Triple:
      return 3;
    default:
      return 1;
  }
}

// An attributed molecular graph. Immutable after construction; all methods
// are const and re-entrant.
class Molecule {
public:
  Molecule() = default;

  // Validates invariants (indices, self-loops, duplicate bonds, hydrogen
  // counts) and builds the adjacency and ring caches.
  static Molecule from_parts(std::vector<Atom> atoms, std::vector<Bond> bonds);

  int atom_count() const { return static_cast<int>(atoms_.size()); }
  int bond_count() const { return static_cast<int>(bonds_.size()); }
  const Atom &atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond &bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  // Bond indices incident to atom `i`.
  std::span<const int> incident_bonds(int i) const {
    return adjacency_[static_cast<std::size_t>(i)];
  }
  int degree(int i) const {
    return static_cast<int>(adjacency_[static_cast<std::size_t>(i)].size());
  }
  int neighbor_of(int atom, int bond_index) const {
    const Bond &b = bonds_[static_cast<std::size_t>(bond_index)];
    return b.from == atom ? b.to : b.from;
  }
  // Bond between the two atoms, if any.
  std::optional<int> bond_between(int a, int b) const;

  bool atom_in_ring(int i) const {
    return atom_in_ring_[static_cast<std::size_t>(i)];
  }
  bool bond_in_ring(int i) const {
    return bond_in_ring_[static_cast<std::size_t>(i)];
  }
  // Cyclomatic number: bonds - atoms + components.
  int ring_count() const { return ring_count_; }
  int component_count() const { return component_count_; }

  int heavy_atom_count() const;
  int heteroatom_count() const;
  int stereocenter_count() const;

  // Connected components as stand-alone molecules, each with atoms in the
  // order they appear in this molecule.
  std::vector<Molecule> components() const;

  // Same graph with atoms reordered so new index i holds old atom perm[i].
  Molecule permuted(const std::vector<int> &perm) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<bool> atom_in_ring_;
  std::vector<bool> bond_in_ring_;
  std::vector<int> component_of_;
  int ring_count_ = 0;
  int component_count_ = 0;

  void finalize();
};

}  // namespace retro

#endif  // RETRO_CHEM_MOLECULE_HPP
