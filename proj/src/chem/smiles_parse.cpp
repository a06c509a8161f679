// SPDX-License-Identifier: Apache-2.0

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retro/chem/smiles.hpp"
#include "retro/chem/valence.hpp"
#include "retro/errors.hpp"

namespace retro {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

struct PendingBond {
  std::optional<BondOrder> order;
  BondGeom geom = BondGeom::None;
  std::size_t pos = 0;
};

struct RingOpening {
  int atom = -1;
  std::optional<BondOrder> order;
  BondGeom geom = BondGeom::None;
  std::size_t pos = 0;  // position of the opening digit
};

class Parser {
public:
  explicit Parser(std::string_view text): text_(text) {}

  Molecule run() {
    if (text_.empty()) {
      throw ParseError("empty SMILES", 1);
    }
    while (pos_ < text_.size()) {
      step();
    }
    if (!branch_stack_.empty()) {
      throw UnbalancedParenthesis("unmatched '('", branch_stack_.back().pos);
    }
    if (pending_.has_value()) {
      throw ParseError("dangling bond symbol", pending_->pos);
    }
    if (!open_rings_.empty()) {
      throw UnclosedRingBond("unclosed ring bond " +
                                 std::to_string(open_rings_.begin()->first),
                             open_rings_.begin()->second.pos);
    }
    if (atoms_.empty()) {
      throw ParseError("no atoms", 1);
    }
    derive_hydrogens();
    return Molecule::from_parts(std::move(atoms_), std::move(bonds_));
  }

private:
  std::string_view text_;
  std::size_t pos_ = 0;

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> atom_pos_;

  int prev_atom_ = -1;
  std::optional<PendingBond> pending_;
  struct BranchState {
    int atom;
    std::size_t pos;
  };
  std::vector<BranchState> branch_stack_;
  std::map<int, RingOpening> open_rings_;

  std::size_t here() const { return pos_ + 1; }  // 1-based

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void step() {
    char c = text_[pos_];
    switch (c) {
      case '(':
        if (prev_atom_ < 0) {
          throw ParseError("branch before any atom", here());
        }
        branch_stack_.push_back({prev_atom_, here()});
        ++pos_;
        return;
      case ')':
        if (branch_stack_.empty()) {
          throw UnbalancedParenthesis("unmatched ')'", here());
        }
        if (pending_.has_value()) {
          throw ParseError("bond symbol before ')'", pending_->pos);
        }
        prev_atom_ = branch_stack_.back().atom;
        branch_stack_.pop_back();
        ++pos_;
        return;
      case '-':
        set_pending(BondOrder::Single, BondGeom::None);
        return;
      case '=':
        set_pending(BondOrder::Double, BondGeom::None);
        return;
      case '#':
        set_pending(BondOrder::Triple, BondGeom::None);
        return;
      case ':':
        set_pending(BondOrder::Aromatic, BondGeom::None);
        return;
      case '/':
        set_pending(BondOrder::Single, BondGeom::Up);
        return;
      case '\\':
        set_pending(BondOrder::Single, BondGeom::Down);
        return;
      case '.':
        if (pending_.has_value()) {
          throw ParseError("bond symbol before '.'", pending_->pos);
        }
        if (prev_atom_ < 0) {
          throw ParseError("leading '.'", here());
        }
        if (!branch_stack_.empty()) {
          throw ParseError("'.' inside branch", here());
        }
        prev_atom_ = -1;
        ++pos_;
        return;
      case '%': {
        std::size_t at = here();
        if (pos_ + 2 >= text_.size() || !is_digit(text_[pos_ + 1]) ||
            !is_digit(text_[pos_ + 2])) {
          throw ParseError("'%' needs two digits", at);
        }
        int number = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
        pos_ += 3;
        ring_bond(number, at);
        return;
      }
      case '[':
        read_bracket_atom();
        return;
      default:
        if (is_digit(c)) {
          std::size_t at = here();
          ++pos_;
          ring_bond(c - '0', at);
          return;
        }
        read_organic_atom();
    }
  }

  void set_pending(BondOrder order, BondGeom geom) {
    if (pending_.has_value()) {
      throw ParseError("two bond symbols in a row", here());
    }
    if (prev_atom_ < 0) {
      throw ParseError("bond symbol before any atom", here());
    }
    pending_ = PendingBond{order, geom, here()};
    ++pos_;
  }

  void add_atom(Atom atom, std::size_t at) {
    int index = static_cast<int>(atoms_.size());
    atoms_.push_back(std::move(atom));
    atom_pos_.push_back(at);
    if (prev_atom_ >= 0) {
      make_bond(prev_atom_, index, take_pending());
    } else if (pending_.has_value()) {
      throw ParseError("bond symbol before component start", pending_->pos);
    }
    prev_atom_ = index;
  }

  PendingBond take_pending() {
    PendingBond p = pending_.value_or(PendingBond{});
    pending_.reset();
    return p;
  }

  void make_bond(int a, int b, const PendingBond &p) {
    BondOrder order = p.order.value_or(default_order(a, b));
    for (const Bond &existing : bonds_) {
      if ((existing.from == a && existing.to == b) ||
          (existing.from == b && existing.to == a)) {
        throw ParseError("duplicate bond between atoms", here());
      }
    }
    bonds_.push_back(Bond{a, b, order, p.geom});
  }

  BondOrder default_order(int a, int b) const {
    bool both_aromatic = atoms_[static_cast<std::size_t>(a)].aromatic &&
                         atoms_[static_cast<std::size_t>(b)].aromatic;
    return both_aromatic ? BondOrder::Aromatic : BondOrder::Single;
  }

  void ring_bond(int number, std::size_t at) {
    if (prev_atom_ < 0) {
      throw ParseError("ring closure before any atom", at);
    }
    PendingBond p = take_pending();
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      open_rings_[number] = RingOpening{prev_atom_, p.order, p.geom, at};
      return;
    }
    RingOpening open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_atom_) {
      throw ParseError("ring bond closes on its own atom", at);
    }
    if (open.order.has_value() && p.order.has_value() &&
        *open.order != *p.order) {
      throw ParseError("conflicting ring bond orders", at);
    }
    PendingBond merged;
    merged.order = open.order.has_value() ? open.order : p.order;
    merged.geom = open.geom != BondGeom::None ? open.geom : p.geom;
    BondOrder order = merged.order.value_or(default_order(open.atom, prev_atom_));
    for (const Bond &existing : bonds_) {
      if ((existing.from == open.atom && existing.to == prev_atom_) ||
          (existing.from == prev_atom_ && existing.to == open.atom)) {
        throw ParseError("duplicate ring bond", at);
      }
    }
    bonds_.push_back(Bond{open.atom, prev_atom_, order, merged.geom});
  }

  void read_organic_atom() {
    std::size_t at = here();
    char c = text_[pos_];
    std::string symbol;
    bool aromatic = false;
    if (is_upper(c)) {
      // Two-letter organic-subset symbols: Cl and Br.
      if (pos_ + 1 < text_.size()) {
        char d = text_[pos_ + 1];
        if ((c == 'C' && d == 'l') || (c == 'B' && d == 'r')) {
          symbol = {c, d};
          pos_ += 2;
        }
      }
      if (symbol.empty()) {
        symbol = {c};
        ++pos_;
      }
    } else if (is_lower(c)) {
      symbol = {static_cast<char>(std::toupper(c))};
      aromatic = true;
      ++pos_;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", at);
    }
    if (!organic_subset(symbol) ||
        (aromatic && !aromatic_form_allowed(symbol))) {
      throw UnknownElement("unknown element '" + symbol + "'", at);
    }
    Atom atom;
    atom.element = symbol;
    atom.aromatic = aromatic;
    atom.hydrogens = -1;  // derive later
    add_atom(std::move(atom), at);
  }

  void read_bracket_atom() {
    std::size_t at = here();
    ++pos_;  // '['
    Atom atom;
    atom.bracket = true;

    // Isotope.
    int isotope = 0;
    bool saw_isotope = false;
    while (is_digit(peek())) {
      saw_isotope = true;
      isotope = isotope * 10 + (peek() - '0');
      ++pos_;
    }
    if (saw_isotope) atom.isotope = isotope;

    // Element symbol.
    std::size_t sym_at = here();
    char c = peek();
    if (is_upper(c)) {
      std::string symbol{c};
      ++pos_;
      if (is_lower(peek())) {
        // No bracket token starts lowercase after the symbol, so a lowercase
        // follower always belongs to a two-letter element.
        symbol += peek();
        ++pos_;
      }
      if (!known_element(symbol)) {
        throw UnknownElement("unknown element '" + symbol + "'", sym_at);
      }
      atom.element = symbol;
    } else if (is_lower(c)) {
      std::string symbol{static_cast<char>(std::toupper(c))};
      if (!known_element(symbol) || !aromatic_form_allowed(symbol)) {
        throw UnknownElement("unknown aromatic element '" + std::string{c} +
                                 "'",
                             sym_at);
      }
      atom.element = symbol;
      atom.aromatic = true;
      ++pos_;
    } else {
      throw ParseError("expected element symbol in brackets", sym_at);
    }

    // Chirality.
    if (peek() == '@') {
      ++pos_;
      if (peek() == '@') {
        atom.chirality = Chirality::Clockwise;
        ++pos_;
      } else {
        atom.chirality = Chirality::Anticlockwise;
      }
    }

    // Hydrogen count.
    if (peek() == 'H') {
      ++pos_;
      int h = 1;
      if (is_digit(peek())) {
        h = 0;
        while (is_digit(peek())) {
          h = h * 10 + (peek() - '0');
          ++pos_;
        }
      }
      atom.hydrogens = h;
    }

    // Charge.
    if (peek() == '+' || peek() == '-') {
      int sign = peek() == '+' ? 1 : -1;
      char sym = peek();
      ++pos_;
      int magnitude = 1;
      if (is_digit(peek())) {
        magnitude = 0;
        while (is_digit(peek())) {
          magnitude = magnitude * 10 + (peek() - '0');
          ++pos_;
        }
      } else {
        while (peek() == sym) {
          ++magnitude;
          ++pos_;
        }
      }
      atom.charge = sign * magnitude;
    }

    // Atom map.
    if (peek() == ':') {
      ++pos_;
      if (!is_digit(peek())) {
        throw ParseError("expected digits after ':'", here());
      }
      int map = 0;
      while (is_digit(peek())) {
        map = map * 10 + (peek() - '0');
        ++pos_;
      }
      atom.map_class = map;
    }

    if (peek() != ']') {
      throw ParseError("expected ']'", here());
    }
    ++pos_;
    add_atom(std::move(atom), at);
  }

  // Aromatic bonds count 1 toward the connection sum; doubles and triples
  // keep their order.
  static int order_units(BondOrder order) {
    switch (order) {
      case BondOrder::Double:
        return 2;
      case BondOrder::Triple:
        return 3;
      default:
        return 1;
    }
  }

  void derive_hydrogens() {
    std::vector<int> bond_sum(atoms_.size(), 0);
    for (const Bond &b : bonds_) {
      bond_sum[static_cast<std::size_t>(b.from)] += order_units(b.order);
      bond_sum[static_cast<std::size_t>(b.to)] += order_units(b.order);
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      Atom &a = atoms_[i];
      if (a.hydrogens >= 0) continue;  // bracket atom: explicit count
      auto h = implicit_hydrogens(a.element, a.aromatic, bond_sum[i]);
      if (!h.has_value()) {
        throw ValenceViolation(
            "atom '" + a.element + "' with bond order sum " +
                std::to_string(bond_sum[i]) + " exceeds its valence",
            atom_pos_[i]);
      }
      a.hydrogens = *h;
    }
  }
};

}  // namespace

Molecule parse_smiles(std::string_view text) { return Parser(text).run(); }

std::string canonical_smiles(std::string_view text) {
  return to_canonical_smiles(parse_smiles(text));
}

}  // namespace retro
