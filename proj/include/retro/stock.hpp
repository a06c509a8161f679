// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_STOCK_HPP
#define RETRO_STOCK_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "retro/chem/molecule.hpp"

namespace retro {

// Purchasable building-block set. Entries are stored canonical, so membership
// is invariant under SMILES spelling. Immutable after load; concurrent reads
// are safe.
class Stock {
public:
  Stock() = default;

  // Inserts one molecule given in any spelling; returns false when the
  // molecule was already present.
  bool add(std::string_view smiles);

  bool contains(const Molecule &m) const;
  // Fast path for callers that already hold a canonical string.
  bool contains_canonical(const std::string &canonical) const;

  std::size_t size() const { return entries_.size(); }
  // Canonical entries in insertion order, so iteration is reproducible.
  const std::vector<std::string> &members() const { return members_; }
  const std::string &source_path() const { return source_path_; }

  // Line numbers skipped by a lenient load.
  const std::vector<std::size_t> &skipped_lines() const {
    return skipped_lines_;
  }

private:
  friend Stock load_stock(const std::string &path, bool strict);

  std::unordered_set<std::string> entries_;
  std::vector<std::string> members_;
  std::string source_path_;
  std::vector<std::size_t> skipped_lines_;
};

// Reads a .smi file: one SMILES per line, an optional tab-separated id after
// it, '#' starts a comment, blank lines are ignored. Strict mode raises
// ParseError carrying the line number for a malformed SMILES; lenient mode
// records the line number and moves on.
Stock load_stock(const std::string &path, bool strict = true);

}  // namespace retro

#endif  // RETRO_STOCK_HPP
