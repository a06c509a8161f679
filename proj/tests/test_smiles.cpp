// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "retro/chem/formula.hpp"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"

using namespace retro;

TEST_CASE("methane parses to one carbon with four implicit hydrogens") {
  Molecule m = parse_smiles("C");
  REQUIRE(m.atom_count() == 1);
  CHECK(m.atom(0).element == "C");
  CHECK(m.atom(0).hydrogens == 4);
  CHECK(m.bond_count() == 0);
}

TEST_CASE("benzene gives six aromatic carbons with one hydrogen each") {
  Molecule m = parse_smiles("c1ccccc1");
  REQUIRE(m.atom_count() == 6);
  REQUIRE(m.bond_count() == 6);
  for (int i = 0; i < 6; ++i) {
    CHECK(m.atom(i).aromatic);
    CHECK(m.atom(i).hydrogens == 1);
    CHECK(m.atom_in_ring(i));
  }
  CHECK(m.ring_count() == 1);
  for (int b = 0; b < 6; ++b) {
    CHECK(m.bond(b).order == BondOrder::Aromatic);
    CHECK(m.bond_in_ring(b));
  }
}

TEST_CASE("implicit hydrogen counts follow the valence table") {
  CHECK(parse_smiles("O").atom(0).hydrogens == 2);
  CHECK(parse_smiles("N").atom(0).hydrogens == 3);
  CHECK(parse_smiles("Cl").atom(0).hydrogens == 1);
  CHECK(parse_smiles("C=O").atom(0).hydrogens == 2);
  CHECK(parse_smiles("C#N").atom(0).hydrogens == 1);
  // Nitrogen jumps to its higher valence form when four bonds are drawn.
  Molecule nitro = parse_smiles("CN(=O)=O");
  CHECK(nitro.atom(1).hydrogens == 0);
  // Aromatic ring nitrogen carries no hydrogen.
  Molecule pyridine = parse_smiles("c1ccncc1");
  CHECK(pyridine.atom(3).element == "N");
  CHECK(pyridine.atom(3).hydrogens == 0);
  // Pyrrole-type nitrogen needs its explicit bracket hydrogen.
  Molecule pyrrole = parse_smiles("c1cc[nH]c1");
  CHECK(pyrrole.atom(3).hydrogens == 1);
}

TEST_CASE("bracket atoms carry charge, isotope, chirality, and explicit H") {
  Molecule ammonium = parse_smiles("[NH4+]");
  CHECK(ammonium.atom(0).charge == 1);
  CHECK(ammonium.atom(0).hydrogens == 4);

  Molecule carbanion = parse_smiles("[CH3-]");
  CHECK(carbanion.atom(0).charge == -1);
  CHECK(carbanion.atom(0).hydrogens == 3);

  Molecule labeled = parse_smiles("[13CH4]");
  CHECK(labeled.atom(0).isotope == 13);

  Molecule alanine = parse_smiles("C[C@H](N)C(=O)O");
  CHECK(alanine.atom(1).chirality == Chirality::Anticlockwise);
  CHECK(alanine.atom(1).hydrogens == 1);

  Molecule mapped = parse_smiles("[CH3:7]O");
  CHECK(mapped.atom(0).map_class == 7);

  Molecule doubly = parse_smiles("[S+2]");
  CHECK(doubly.atom(0).charge == 2);
  CHECK(parse_smiles("[O--]").atom(0).charge == -2);
  // Only the desk-scale element table is accepted, even in brackets.
  CHECK_THROWS_AS(parse_smiles("[Fe+2]"), UnknownElement);
}

TEST_CASE("ring closures support multi-digit labels and explicit orders") {
  std::string plain = canonical_smiles("C1CC1");
  CHECK(canonical_smiles("C%10CC%10") == plain);
  CHECK(canonical_smiles("C2CC2") == plain);
  // Order written on the closing digit only.
  CHECK(canonical_smiles("C1CCCCC=1") == canonical_smiles("C=1CCCCC1"));
}

TEST_CASE("dot separates disconnected components") {
  Molecule m = parse_smiles("CCO.O");
  CHECK(m.component_count() == 2);
  CHECK(canonical_smiles("CCO.O") == canonical_smiles("O.OCC"));
}

TEST_CASE("parser reports positioned errors") {
  CHECK_THROWS_WITH_AS(parse_smiles("C("), "unmatched '(' at position 2",
                       UnbalancedParenthesis);
  try {
    parse_smiles("C(");
    FAIL("expected UnbalancedParenthesis");
  } catch (const UnbalancedParenthesis &e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(parse_smiles("CC)C"), UnbalancedParenthesis);

  try {
    parse_smiles("C1CC");
    FAIL("expected UnclosedRingBond");
  } catch (const UnclosedRingBond &e) {
    CHECK(e.position() == 2);
  }

  try {
    parse_smiles("C[Xq]C");
    FAIL("expected UnknownElement");
  } catch (const UnknownElement &e) {
    CHECK(e.position() == 3);
  }
  CHECK_THROWS_AS(parse_smiles("A"), UnknownElement);

  try {
    parse_smiles("CC(C)(C)(C)C");
    FAIL("expected ValenceViolation");
  } catch (const ValenceViolation &e) {
    CHECK(e.position() == 2);
  }
  CHECK_THROWS_AS(parse_smiles("O=C=O.F(F)F"), ValenceViolation);

  CHECK_THROWS_AS(parse_smiles(""), ParseError);
  CHECK_THROWS_AS(parse_smiles("C=="), ParseError);
  CHECK_THROWS_AS(parse_smiles("C11"), ParseError);
  CHECK_THROWS_AS(parse_smiles(".C"), ParseError);
  CHECK_THROWS_AS(parse_smiles("C%1C"), ParseError);
  CHECK_THROWS_AS(parse_smiles("[C"), ParseError);
  CHECK_THROWS_AS(parse_smiles("C="), ParseError);
}

TEST_CASE("equivalent spellings share one canonical string") {
  CHECK(canonical_smiles("OCC") == canonical_smiles("CCO"));
  CHECK(canonical_smiles("C(O)C") == canonical_smiles("CCO"));
  CHECK(canonical_smiles("c1ccccc1") == canonical_smiles("c1ccccc1"));
  CHECK(canonical_smiles("C(=O)(O)C") == canonical_smiles("CC(O)=O"));
  // Kekule and aromatic forms are distinct on purpose; flags come from input.
  CHECK(canonical_smiles("C1=CC=CC=C1") != canonical_smiles("c1ccccc1"));
}

TEST_CASE("canonical output is a fixed point under reparse") {
  const std::vector<std::string> inputs = {
      "C",
      "CCO",
      "c1ccccc1",
      "c1ccc2ccccc2c1",
      "CC(=O)Nc1ccc(O)cc1",
      "C[C@H](N)C(=O)O",
      "F/C=C/F",
      "F/C=C\\F",
      "[NH4+].[Cl-]",
      "O=[N+]([O-])c1ccccc1",
      "C1CC2CCC1CC2",
      "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
      "ClCCl.BrBr",
      "[13CH4]",
      "C%12CCCCC%12",
      "S=C=S",
      "c1cc[nH]c1",
      "O=C(O)c1ccccc1OC(C)=O",
  };
  for (const std::string &s : inputs) {
    CAPTURE(s);
    std::string once = canonical_smiles(s);
    std::string twice = canonical_smiles(once);
    CHECK(once == twice);
  }
}

TEST_CASE("canonical string is invariant under atom permutations") {
  const std::vector<std::string> inputs = {
      "CC(=O)Nc1ccc(O)cc1",
      "C1CC2CCC1CC2",
      "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
      "C[C@H](N)C(=O)O",
      "F/C=C/F",
  };
  std::mt19937 rng(20240817u);
  for (const std::string &s : inputs) {
    CAPTURE(s);
    Molecule m = parse_smiles(s);
    std::string expected = to_canonical_smiles(m);
    std::vector<int> perm(static_cast<std::size_t>(m.atom_count()));
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 200; ++trial) {
      std::shuffle(perm.begin(), perm.end(), rng);
      CHECK(to_canonical_smiles(m.permuted(perm)) == expected);
    }
  }
}

TEST_CASE("canonical form strips redundant brackets") {
  CHECK(canonical_smiles("[CH4]") == "C");
  CHECK(canonical_smiles("[OH2]") == "O");
  // Bracket content that matters is kept.
  CHECK(canonical_smiles("[NH4+]") == "[NH4+]");
  CHECK(canonical_smiles("[13CH4]") == "[13CH4]");
  // Atom maps are diagnostics, never identity.
  CHECK(canonical_smiles("[CH3:7]O") == canonical_smiles("CO"));
}

TEST_CASE("graph interrogation helpers") {
  Molecule m = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  CHECK(m.heavy_atom_count() == 11);
  CHECK(m.heteroatom_count() == 3);
  CHECK(m.ring_count() == 1);
  CHECK(m.stereocenter_count() == 0);
  CHECK(parse_smiles("C[C@H](N)C(=O)O").stereocenter_count() == 1);
  Molecule bicyclic = parse_smiles("C1CC2CCC1CC2");
  CHECK(bicyclic.ring_count() == 2);
  Molecule chain = parse_smiles("CCCC");
  CHECK(chain.ring_count() == 0);
  CHECK_FALSE(chain.atom_in_ring(0));
}

TEST_CASE("molecular formula counts implicit hydrogens") {
  ElementCounts water = molecular_formula(parse_smiles("O"));
  CHECK(water.count("O") == 1);
  CHECK(water.count("H") == 2);
  CHECK(water.to_string() == "H2O");

  ElementCounts methane = molecular_formula(parse_smiles("C"));
  CHECK(methane.count("C") == 1);
  CHECK(methane.count("H") == 4);
  CHECK(methane.to_string() == "CH4");

  ElementCounts amide = molecular_formula(parse_smiles("CC(=O)NC"));
  CHECK(amide.count("C") == 3);
  CHECK(amide.count("H") == 7);
  CHECK(amide.count("N") == 1);
  CHECK(amide.count("O") == 1);
  CHECK(amide.total() == 12);
}

TEST_CASE("formula text round-trips through Hill notation") {
  ElementCounts parsed = ElementCounts::parse("C9H10N2O2PF2Cl");
  CHECK(parsed.count("C") == 9);
  CHECK(parsed.count("H") == 10);
  CHECK(parsed.count("N") == 2);
  CHECK(parsed.count("O") == 2);
  CHECK(parsed.count("P") == 1);
  CHECK(parsed.count("F") == 2);
  CHECK(parsed.count("Cl") == 1);
  CHECK(ElementCounts::parse(parsed.to_string()) == parsed);
  CHECK(ElementCounts::parse("H2O").to_string() == "H2O");
  CHECK_THROWS_AS(ElementCounts::parse(""), ParseError);
  CHECK_THROWS_AS(ElementCounts::parse("C2Zz"), UnknownElement);
  CHECK(molecular_formula(parse_smiles("CC(=O)NC")).to_string() == "C3H7NO");
}
