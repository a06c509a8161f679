// SPDX-License-Identifier: Apache-2.0

#include "retro/stock.hpp"

#include <fstream>

#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"

namespace retro {

bool Stock::add(std::string_view smiles) {
  std::string canonical = canonical_smiles(smiles);
  if (!entries_.insert(canonical).second) return false;
  members_.push_back(std::move(canonical));
  return true;
}

bool Stock::contains(const Molecule &m) const {
  return entries_.count(to_canonical_smiles(m)) > 0;
}

bool Stock::contains_canonical(const std::string &canonical) const {
  return entries_.count(canonical) > 0;
}

Stock load_stock(const std::string &path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stock file: " + path);

  Stock stock;
  stock.source_path_ = path;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    // The SMILES is the first tab-separated field; anything after is an id.
    std::string field = line.substr(0, line.find('\t'));
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\r')) {
      field.pop_back();
    }
    std::size_t start = field.find_first_not_of(' ');
    if (start == std::string::npos) continue;
    field.erase(0, start);
    try {
      stock.add(field);
    } catch (const Error &e) {
      if (strict) {
        throw ParseError(path + ": " + e.what() + ", line", line_no);
      }
      stock.skipped_lines_.push_back(line_no);
    }
  }
  return stock;
}

}  // namespace retro
