// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <bit>
#include <utility>
#include <vector>

#include "retro/errors.hpp"
#include "retro/fp/fingerprint.hpp"
#include "retro/hash.hpp"

namespace retro {

BitFingerprint::BitFingerprint(int nbits): nbits_(nbits) {
  if (nbits <= 0 || (nbits & (nbits - 1)) != 0) {
    throw Error("fingerprint length must be a positive power of two");
  }
  words_.assign(static_cast<std::size_t>((nbits + 63) / 64), 0);
}

bool BitFingerprint::test(int bit) const {
  return (words_[static_cast<std::size_t>(bit / 64)] >>
          (static_cast<unsigned>(bit) % 64)) &
         1U;
}

void BitFingerprint::set(int bit) {
  words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1}
                                                << (static_cast<unsigned>(bit) % 64);
}

int BitFingerprint::popcount() const {
  int total = 0;
  for (std::uint64_t w : words_) total += std::popcount(w);
  return total;
}

std::string BitFingerprint::to_hex() const {
  std::string out;
  for (auto it = words_.rbegin(); it != words_.rend(); ++it) {
    out += hex64(*it);
  }
  return out;
}

BitFingerprint BitFingerprint::concat(const BitFingerprint &other) const {
  BitFingerprint out(nbits_ + other.nbits_);
  std::copy(words_.begin(), words_.end(), out.words_.begin());
  std::copy(other.words_.begin(), other.words_.end(),
            out.words_.begin() + static_cast<std::ptrdiff_t>(words_.size()));
  return out;
}

void BitFingerprint::or_with(const BitFingerprint &other) {
  if (nbits_ != other.nbits_) {
    throw LengthMismatch("fingerprint lengths differ: " +
                         std::to_string(nbits_) + " vs " +
                         std::to_string(other.nbits_));
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    words_[i] |= other.words_[i];
  }
}

namespace {

std::uint64_t atom_seed(const Molecule &m, int i) {
  const Atom &a = m.atom(i);
  std::uint64_t h = fnv1a(a.element);
  h = fnv1a_u64(static_cast<std::uint64_t>(a.charge + 64), h);
  h = fnv1a_u64(static_cast<std::uint64_t>(a.hydrogens), h);
  h = fnv1a_u64(a.aromatic ? 1 : 0, h);
  h = fnv1a_u64(static_cast<std::uint64_t>(a.isotope), h);
  h = fnv1a_u64(static_cast<std::uint64_t>(m.degree(i)), h);
  h = fnv1a_u64(m.atom_in_ring(i) ? 1 : 0, h);
  return mix64(h);
}

}  // namespace

BitFingerprint morgan_fingerprint(const Molecule &m, int radius, int nbits) {
  if (radius < 0) throw Error("fingerprint radius must be nonnegative");
  BitFingerprint fp(nbits);
  const std::uint64_t mask = static_cast<std::uint64_t>(nbits - 1);

  std::vector<std::uint64_t> ids(static_cast<std::size_t>(m.atom_count()));
  for (int i = 0; i < m.atom_count(); ++i) {
    ids[static_cast<std::size_t>(i)] = atom_seed(m, i);
    fp.set(static_cast<int>(ids[static_cast<std::size_t>(i)] & mask));
  }
  for (int round = 1; round <= radius; ++round) {
    std::vector<std::uint64_t> next(ids.size());
    for (int i = 0; i < m.atom_count(); ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> nbrs;
      for (int bi : m.incident_bonds(i)) {
        const Bond &b = m.bond(bi);
        int j = b.from == i ? b.to : b.from;
        nbrs.emplace_back(static_cast<std::uint64_t>(b.order),
                          ids[static_cast<std::size_t>(j)]);
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::uint64_t h = fnv1a_u64(static_cast<std::uint64_t>(round));
      h = fnv1a_u64(ids[static_cast<std::size_t>(i)], h);
      for (auto &[order, id] : nbrs) {
        h = fnv1a_u64(order, h);
        h = fnv1a_u64(id, h);
      }
      next[static_cast<std::size_t>(i)] = mix64(h);
      fp.set(static_cast<int>(next[static_cast<std::size_t>(i)] & mask));
    }
    ids = std::move(next);
  }
  return fp;
}

double tanimoto(const BitFingerprint &a, const BitFingerprint &b) {
  if (a.nbits() != b.nbits()) {
    throw LengthMismatch("fingerprint lengths differ: " +
                         std::to_string(a.nbits()) + " vs " +
                         std::to_string(b.nbits()));
  }
  int inter = 0;
  int uni = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    inter += std::popcount(a.words()[i] & b.words()[i]);
    uni += std::popcount(a.words()[i] | b.words()[i]);
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BitFingerprint reaction_fingerprint(const std::vector<Molecule> &reactants,
                                    const Molecule &product, int radius,
                                    int nbits) {
  if (reactants.empty()) throw Error("reaction fingerprint needs reactants");
  BitFingerprint merged(nbits);
  for (const Molecule &r : reactants) {
    merged.or_with(morgan_fingerprint(r, radius, nbits));
  }
  return morgan_fingerprint(product, radius, nbits).concat(merged);
}

}  // namespace retro
