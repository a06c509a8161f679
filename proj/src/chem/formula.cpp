// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <string>

#include "retro/chem/formula.hpp"
#include "retro/chem/valence.hpp"
#include "retro/errors.hpp"

namespace retro {

ElementCounts ElementCounts::of(const Molecule &m) {
  ElementCounts counts;
  for (int i = 0; i < m.atom_count(); ++i) {
    const Atom &a = m.atom(i);
    counts.add(a.element, 1);
    if (a.hydrogens > 0) counts.add("H", a.hydrogens);
  }
  return counts;
}

ElementCounts ElementCounts::parse(std::string_view text) {
  ElementCounts counts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    char c = text[pos];
    if (!(c >= 'A' && c <= 'Z')) {
      throw ParseError("expected element symbol in formula", pos + 1);
    }
    std::string symbol{c};
    ++pos;
    if (pos < text.size() && text[pos] >= 'a' && text[pos] <= 'z') {
      symbol += text[pos];
      ++pos;
    }
    if (!known_element(symbol)) {
      throw UnknownElement("unknown element '" + symbol + "' in formula",
                           pos - symbol.size() + 1);
    }
    int count = 0;
    bool saw_digit = false;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      saw_digit = true;
      count = count * 10 + (text[pos] - '0');
      ++pos;
    }
    counts.add(symbol, saw_digit ? count : 1);
  }
  if (counts.counts_.empty()) {
    throw ParseError("empty formula", 1);
  }
  return counts;
}

void ElementCounts::add(const std::string &element, int count) {
  if (count == 0) return;
  int &slot = counts_[element];
  slot += count;
  if (slot < 0) throw Error("negative element count for " + element);
  if (slot == 0) counts_.erase(element);
}

int ElementCounts::count(const std::string &element) const {
  auto it = counts_.find(element);
  return it == counts_.end() ? 0 : it->second;
}

int ElementCounts::total() const {
  int sum = 0;
  for (const auto &[element, count] : counts_) sum += count;
  return sum;
}

// Hill order: carbon first, then hydrogen, then the rest alphabetically;
// without carbon everything is alphabetical.
std::string ElementCounts::to_string() const {
  std::string out;
  auto append = [&](const std::string &element, int count) {
    out += element;
    if (count > 1) out += std::to_string(count);
  };
  bool has_carbon = counts_.count("C") > 0;
  if (has_carbon) {
    append("C", count("C"));
    if (count("H") > 0) append("H", count("H"));
  }
  for (const auto &[element, count] : counts_) {
    if (has_carbon && (element == "C" || element == "H")) continue;
    append(element, count);
  }
  return out;
}

}  // namespace retro
