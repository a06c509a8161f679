// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_CHEM_SMILES_HPP
#define RETRO_CHEM_SMILES_HPP

#include <string>
#include <string_view>

#include "retro/chem/molecule.hpp"

namespace retro {

// Parses the SMILES subset documented in docs/formats.md: organic-subset and
// bracket atoms, bonds - = # : / \, branches, ring closures (1-9 and %nn),
// charges, isotopes, @/@@ tags, and '.'-separated components.
//
// Throws UnbalancedParenthesis, UnclosedRingBond, UnknownElement,
// ValenceViolation, or ParseError, each carrying the 1-based offending
// position.
Molecule parse_smiles(std::string_view text);

// Deterministic canonical form. Graph-isomorphic molecules with identical
// atom and bond attributes produce identical strings, regardless of input
// atom order. Atom-map classes are stripped.
std::string to_canonical_smiles(const Molecule &m);

// Shorthand for to_canonical_smiles(parse_smiles(text)).
std::string canonical_smiles(std::string_view text);

}  // namespace retro

#endif  // RETRO_CHEM_SMILES_HPP
