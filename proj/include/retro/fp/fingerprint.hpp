// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_FP_FINGERPRINT_HPP
#define RETRO_FP_FINGERPRINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "retro/chem/molecule.hpp"

namespace retro {

// Fixed-length bit vector over 64-bit words.
class BitFingerprint {
public:
  BitFingerprint() = default;
  explicit BitFingerprint(int nbits);

  int nbits() const { return nbits_; }
  bool test(int bit) const;
  void set(int bit);
  int popcount() const;
  bool empty() const { return popcount() == 0; }

  const std::vector<std::uint64_t> &words() const { return words_; }

  // Hex dump, most significant word first; stable across runs.
  std::string to_hex() const;

  // Bits of `other` appended after this fingerprint's bits.
  BitFingerprint concat(const BitFingerprint &other) const;
  void or_with(const BitFingerprint &other);

  bool operator==(const BitFingerprint &other) const {
    return nbits_ == other.nbits_ && words_ == other.words_;
  }

private:
  int nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Circular environment fingerprint. Atom seeds hash element, charge,
// hydrogen count, aromatic flag, isotope, degree, and ring membership; each
// refinement round hashes the previous identifier together with the sorted
// (bond order, neighbor identifier) list. Every (atom, round) identifier
// sets one bit. nbits must be a power of two.
BitFingerprint morgan_fingerprint(const Molecule &m, int radius = 2,
                                  int nbits = 2048);

// |a AND b| / |a OR b|; 1.0 when both are empty.
double tanimoto(const BitFingerprint &a, const BitFingerprint &b);

// fp(product) concatenated with the bitwise OR of the reactant
// fingerprints; 2 * nbits bits total.
BitFingerprint reaction_fingerprint(const std::vector<Molecule> &reactants,
                                    const Molecule &product, int radius = 2,
                                    int nbits = 2048);

}  // namespace retro

#endif  // RETRO_FP_FINGERPRINT_HPP
