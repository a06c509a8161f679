// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_CHEM_FORMULA_HPP
#define RETRO_CHEM_FORMULA_HPP

#include <map>
#include <string>
#include <string_view>

#include "retro/chem/molecule.hpp"

namespace retro {

// Element symbol -> count, hydrogens included.
class ElementCounts {
public:
  ElementCounts() = default;

  static ElementCounts of(const Molecule &m);
  // Parses Hill-notation text such as "C9H10N2O2PF2Cl".
  static ElementCounts parse(std::string_view text);

  int count(const std::string &element) const;
  void add(const std::string &element, int n);
  int total() const;
  bool empty() const { return counts_.empty(); }

  const std::map<std::string, int> &counts() const { return counts_; }

  // Hill notation: C first, H second, remaining elements alphabetical.
  std::string to_string() const;

  bool operator==(const ElementCounts &other) const {
    return counts_ == other.counts_;
  }

private:
  std::map<std::string, int> counts_;
};

inline ElementCounts molecular_formula(const Molecule &m) {
  return ElementCounts::of(m);
}

}  // namespace retro

#endif  // RETRO_CHEM_FORMULA_HPP
