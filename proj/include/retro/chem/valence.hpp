// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_CHEM_VALENCE_HPP
#define RETRO_CHEM_VALENCE_HPP

#include <optional>
#include <span>
#include <string_view>

namespace retro {

// Desk-scale valence table covering the accepted element set:
// B, C, N, O, P, S, F, Cl, Br, I, H.
bool known_element(std::string_view symbol);

// Standard valences in ascending order, e.g. {3,5} for N. Empty span for
// unknown symbols.
std::span<const int> standard_valences(std::string_view symbol);

// Lowest standard valence, used as the aromatic default.
int default_valence(std::string_view symbol);

// True when the element may be written bare (outside brackets).
bool organic_subset(std::string_view symbol);

// True when the element has an accepted aromatic (lowercase) form:
// b, c, n, o, p, s.
bool aromatic_form_allowed(std::string_view symbol);

// Implicit hydrogen count for an atom with the given bond-order sum.
// `bond_sum` counts single=1, double=2, triple=3, aromatic=1; aromatic atoms
// get one extra unit for the delocalized system and clamp at zero instead of
// failing. Returns nullopt when the sum exceeds every standard valence of an
// aliphatic atom.
std::optional<int> implicit_hydrogens(std::string_view element, bool aromatic,
                                      int bond_sum);

}  // namespace retro

#endif  // RETRO_CHEM_VALENCE_HPP
