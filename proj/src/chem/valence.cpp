// SPDX-License-Identifier: Apache-2.0

#include "retro/chem/valence.hpp"

#include <algorithm>
#include <array>

namespace retro {

namespace {

struct ElementInfo {
  std::string_view symbol;
  std::array<int, 3> valences;  // ascending, 0-padded
  int n_valences;
  bool organic;
  bool aromatic_ok;
};

constexpr std::array<ElementInfo, 11> kElements = {{
    {"B", {3, 0, 0}, 1, true, true},
    {"C", {4, 0, 0}, 1, true, true},
    {"N", {3, 5, 0}, 2, true, true},
    {"O", {2, 0, 0}, 1, true, true},
    {"P", {3, 5, 0}, 2, true, true},
    {"S", {2, 4, 6}, 3, true, true},
    {"F", {1, 0, 0}, 1, true, false},
    {"Cl", {1, 0, 0}, 1, true, false},
    {"Br", {1, 0, 0}, 1, true, false},
    {"I", {1, 0, 0}, 1, true, false},
    {"H", {1, 0, 0}, 1, false, false},
}};

const ElementInfo *find(std::string_view symbol) {
  for (const auto &e : kElements) {
    if (e.symbol == symbol) return &e;
  }
  return nullptr;
}

}  // namespace

bool known_element(std::string_view symbol) { return find(symbol) != nullptr; }

std::span<const int> standard_valences(std::string_view symbol) {
  const ElementInfo *e = find(symbol);
  if (e == nullptr) return {};
  return {e->valences.data(), static_cast<std::size_t>(e->n_valences)};
}

int default_valence(std::string_view symbol) {
  auto v = standard_valences(symbol);
  return v.empty() ? 0 : v.front();
}

bool organic_subset(std::string_view symbol) {
  const ElementInfo *e = find(symbol);
  return e != nullptr && e->organic;
}

bool aromatic_form_allowed(std::string_view symbol) {
  const ElementInfo *e = find(symbol);
  return e != nullptr && e->aromatic_ok;
}

std::optional<int> implicit_hydrogens(std::string_view element, bool aromatic,
                                      int bond_sum) {
  if (aromatic) {
    // One extra unit for the delocalized system; clamp at zero because
    // aromatic valence is not perceived further.
    return std::max(0, default_valence(element) - (bond_sum + 1));
  }
  for (int v : standard_valences(element)) {
    if (v >= bond_sum) return v - bond_sum;
  }
  return std::nullopt;
}

}  // namespace retro
