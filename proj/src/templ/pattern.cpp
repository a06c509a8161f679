// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "retro/chem/valence.hpp"
#include "retro/errors.hpp"
#include "retro/templ/template.hpp"

namespace retro {

QueryGraph QueryGraph::from_parts(std::vector<AtomPattern> atoms,
                                  std::vector<BondPattern> bonds) {
  QueryGraph g;
  g.atoms_ = std::move(atoms);
  g.bonds_ = std::move(bonds);
  g.adjacency_.assign(g.atoms_.size(), {});
  for (std::size_t i = 0; i < g.bonds_.size(); ++i) {
    const BondPattern &b = g.bonds_[i];
    if (b.from < 0 || b.to < 0 || b.from >= g.atom_count() ||
        b.to >= g.atom_count() || b.from == b.to) {
      throw Error("pattern bond endpoints out of range");
    }
    g.adjacency_[static_cast<std::size_t>(b.from)].push_back(
        static_cast<int>(i));
    g.adjacency_[static_cast<std::size_t>(b.to)].push_back(static_cast<int>(i));
  }
  return g;
}

bool QueryGraph::connected() const {
  if (atoms_.empty()) return false;
  std::vector<bool> seen(atoms_.size(), false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int visited = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int bi : adjacency_[static_cast<std::size_t>(u)]) {
      const BondPattern &b = bonds_[static_cast<std::size_t>(bi)];
      int j = b.from == u ? b.to : b.from;
      if (!seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        ++visited;
        stack.push_back(j);
      }
    }
  }
  return visited == atom_count();
}

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses one side of a template into pattern components. Positions are
// 1-based within the full template text via `offset`.
class SideParser {
public:
  SideParser(std::string_view text, std::size_t offset)
      : text_(text), offset_(offset) {}

  std::vector<QueryGraph> run() {
    if (text_.empty()) {
      throw ParseError("empty pattern", offset_ + 1);
    }
    while (pos_ < text_.size()) {
      step();
    }
    if (!branch_stack_.empty()) {
      throw UnbalancedParenthesis("unmatched '(' in pattern",
                                  branch_stack_.back().second);
    }
    if (pending_.has_value()) {
      throw ParseError("dangling bond symbol in pattern", pending_->second);
    }
    if (!open_rings_.empty()) {
      throw UnclosedRingBond("unclosed ring bond in pattern",
                             open_rings_.begin()->second.pos);
    }
    if (atoms_.empty()) {
      throw ParseError("pattern has no atoms", offset_ + 1);
    }
    return split_components();
  }

private:
  std::string_view text_;
  std::size_t offset_;
  std::size_t pos_ = 0;

  std::vector<AtomPattern> atoms_;
  std::vector<BondPattern> bonds_;
  int prev_atom_ = -1;
  std::optional<std::pair<std::optional<BondOrder>, std::size_t>> pending_;
  std::vector<std::pair<int, std::size_t>> branch_stack_;
  struct Open {
    int atom;
    std::optional<BondOrder> order;
    std::size_t pos;
  };
  std::map<int, Open> open_rings_;

  std::size_t here() const { return offset_ + pos_ + 1; }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void step() {
    char c = text_[pos_];
    switch (c) {
      case '(':
        if (prev_atom_ < 0) {
          throw ParseError("branch before any pattern atom", here());
        }
        branch_stack_.emplace_back(prev_atom_, here());
        ++pos_;
        return;
      case ')':
        if (branch_stack_.empty()) {
          throw UnbalancedParenthesis("unmatched ')' in pattern", here());
        }
        prev_atom_ = branch_stack_.back().first;
        branch_stack_.pop_back();
        ++pos_;
        return;
      case '-':
        set_pending(BondOrder::Single);
        return;
      case '=':
        set_pending(BondOrder::Double);
        return;
      case '#':
        set_pending(BondOrder::Triple);
        return;
      case ':':
        set_pending(BondOrder::Aromatic);
        return;
      case '.':
        if (pending_.has_value() || prev_atom_ < 0 || !branch_stack_.empty()) {
          throw ParseError("misplaced '.' in pattern", here());
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
        read_plain_atom();
    }
  }

  void set_pending(BondOrder order) {
    if (pending_.has_value() || prev_atom_ < 0) {
      throw ParseError("misplaced bond symbol in pattern", here());
    }
    pending_ = {order, here()};
    ++pos_;
  }

  BondOrder default_order(int a, int b) const {
    return atoms_[static_cast<std::size_t>(a)].aromatic &&
                   atoms_[static_cast<std::size_t>(b)].aromatic
               ? BondOrder::Aromatic
               : BondOrder::Single;
  }

  void add_atom(AtomPattern atom) {
    int index = static_cast<int>(atoms_.size());
    atoms_.push_back(std::move(atom));
    if (prev_atom_ >= 0) {
      BondOrder order = pending_.has_value() && pending_->first.has_value()
                            ? *pending_->first
                            : default_order(prev_atom_, index);
      bonds_.push_back(BondPattern{prev_atom_, index, order});
    } else if (pending_.has_value()) {
      throw ParseError("bond symbol before pattern component", pending_->second);
    }
    pending_.reset();
    prev_atom_ = index;
  }

  void ring_bond(int number, std::size_t at) {
    if (prev_atom_ < 0) {
      throw ParseError("ring closure before any pattern atom", at);
    }
    std::optional<BondOrder> order;
    if (pending_.has_value()) {
      order = pending_->first;
      pending_.reset();
    }
    auto it = open_rings_.find(number);
    if (it == open_rings_.end()) {
      open_rings_[number] = Open{prev_atom_, order, at};
      return;
    }
    Open open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_atom_) {
      throw ParseError("ring bond closes on its own atom", at);
    }
    BondOrder final_order = open.order.has_value() ? *open.order
                            : order.has_value()
                                ? *order
                                : default_order(open.atom, prev_atom_);
    bonds_.push_back(BondPattern{open.atom, prev_atom_, final_order});
  }

  void read_plain_atom() {
    std::size_t at = here();
    char c = text_[pos_];
    std::string symbol;
    bool aromatic = false;
    if (is_upper(c)) {
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
      throw UnsupportedPredicate(
          std::string("unsupported pattern token '") + c + "'", at);
    }
    if (!organic_subset(symbol) ||
        (aromatic && !aromatic_form_allowed(symbol))) {
      throw UnsupportedPredicate("unsupported pattern token '" + symbol + "'",
                                 at);
    }
    AtomPattern p;
    p.element = symbol;
    p.aromatic = aromatic;
    add_atom(std::move(p));
  }

  void read_bracket_atom() {
    std::size_t at = here();
    ++pos_;  // '['
    AtomPattern p;

    std::size_t sym_at = here();
    char c = peek();
    if (is_digit(c)) {
      throw UnsupportedPredicate("isotope constraints unsupported", sym_at);
    }
    if (is_upper(c)) {
      std::string symbol{c};
      ++pos_;
      if (is_lower(peek())) {
        symbol += peek();
        ++pos_;
      }
      if (!known_element(symbol)) {
        throw UnsupportedPredicate("unsupported pattern element '" + symbol +
                                       "'",
                                   sym_at);
      }
      p.element = symbol;
    } else if (is_lower(c)) {
      std::string symbol{static_cast<char>(std::toupper(c))};
      if (!known_element(symbol) || !aromatic_form_allowed(symbol)) {
        throw UnsupportedPredicate(
            "unsupported aromatic pattern element '" + std::string{c} + "'",
            sym_at);
      }
      p.element = symbol;
      p.aromatic = true;
      ++pos_;
    } else {
      throw UnsupportedPredicate("expected element symbol in pattern brackets",
                                 sym_at);
    }

    while (peek() != ']') {
      std::size_t pred_at = here();
      char d = peek();
      if (d == 'H') {
        ++pos_;
        int h = 1;
        if (is_digit(peek())) {
          h = 0;
          while (is_digit(peek())) {
            h = h * 10 + (peek() - '0');
            ++pos_;
          }
        }
        p.hydrogens = h;
      } else if (d == '+' || d == '-') {
        int sign = d == '+' ? 1 : -1;
        ++pos_;
        int magnitude = 1;
        if (is_digit(peek())) {
          magnitude = 0;
          while (is_digit(peek())) {
            magnitude = magnitude * 10 + (peek() - '0');
            ++pos_;
          }
        } else {
          while (peek() == d) {
            ++magnitude;
            ++pos_;
          }
        }
        p.charge = sign * magnitude;
      } else if (d == 'D') {
        ++pos_;
        if (!is_digit(peek())) {
          throw ParseError("'D' needs a digit", here());
        }
        int n = 0;
        while (is_digit(peek())) {
          n = n * 10 + (peek() - '0');
          ++pos_;
        }
        p.degree = n;
      } else if (d == 'R') {
        ++pos_;
        if (is_digit(peek())) {
          int n = 0;
          while (is_digit(peek())) {
            n = n * 10 + (peek() - '0');
            ++pos_;
          }
          p.in_ring = n > 0;
        } else {
          p.in_ring = true;
        }
      } else if (d == ':') {
        ++pos_;
        if (!is_digit(peek())) {
          throw ParseError("expected digits after ':'", here());
        }
        int map = 0;
        while (is_digit(peek())) {
          map = map * 10 + (peek() - '0');
          ++pos_;
        }
        p.map_class = map;
      } else if (d == '\0') {
        throw ParseError("unterminated bracket in pattern", at);
      } else {
        throw UnsupportedPredicate(
            std::string("unsupported predicate '") + d + "'", pred_at);
      }
    }
    ++pos_;  // ']'
    add_atom(std::move(p));
  }

  std::vector<QueryGraph> split_components() {
    int n = static_cast<int>(atoms_.size());
    std::vector<int> component(static_cast<std::size_t>(n), -1);
    std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < bonds_.size(); ++i) {
      adjacency[static_cast<std::size_t>(bonds_[i].from)].push_back(
          static_cast<int>(i));
      adjacency[static_cast<std::size_t>(bonds_[i].to)].push_back(
          static_cast<int>(i));
    }
    int components = 0;
    for (int s = 0; s < n; ++s) {
      if (component[static_cast<std::size_t>(s)] >= 0) continue;
      std::vector<int> stack = {s};
      component[static_cast<std::size_t>(s)] = components;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int bi : adjacency[static_cast<std::size_t>(u)]) {
          const BondPattern &b = bonds_[static_cast<std::size_t>(bi)];
          int j = b.from == u ? b.to : b.from;
          if (component[static_cast<std::size_t>(j)] < 0) {
            component[static_cast<std::size_t>(j)] = components;
            stack.push_back(j);
          }
        }
      }
      ++components;
    }
    std::vector<QueryGraph> out;
    for (int ci = 0; ci < components; ++ci) {
      std::vector<int> local(static_cast<std::size_t>(n), -1);
      std::vector<AtomPattern> catoms;
      for (int i = 0; i < n; ++i) {
        if (component[static_cast<std::size_t>(i)] == ci) {
          local[static_cast<std::size_t>(i)] =
              static_cast<int>(catoms.size());
          catoms.push_back(atoms_[static_cast<std::size_t>(i)]);
        }
      }
      std::vector<BondPattern> cbonds;
      for (const BondPattern &b : bonds_) {
        if (component[static_cast<std::size_t>(b.from)] == ci) {
          cbonds.push_back(BondPattern{local[static_cast<std::size_t>(b.from)],
                                       local[static_cast<std::size_t>(b.to)],
                                       b.order});
        }
      }
      out.push_back(QueryGraph::from_parts(std::move(catoms), std::move(cbonds)));
    }
    return out;
  }
};

}  // namespace

ReactionTemplate parse_template(std::string_view text, std::string id,
                                std::string name) {
  std::size_t arrow = text.find(">>");
  if (arrow == std::string_view::npos) {
    throw ParseError("template needs '>>'", text.size() + 1);
  }
  if (text.find(">>", arrow + 2) != std::string_view::npos) {
    throw ParseError("template has more than one '>>'",
                     text.find(">>", arrow + 2) + 1);
  }

  std::vector<QueryGraph> product_side =
      SideParser(text.substr(0, arrow), 0).run();
  if (product_side.size() != 1) {
    throw ParseError("product pattern must be a single connected graph", 1);
  }
  std::vector<QueryGraph> reactants =
      SideParser(text.substr(arrow + 2), arrow + 2).run();

  ReactionTemplate t;
  t.id = std::move(id);
  t.name = std::move(name);
  t.product = std::move(product_side.front());
  t.reactants = std::move(reactants);

  std::set<int> product_maps;
  for (int i = 0; i < t.product.atom_count(); ++i) {
    int map = t.product.atom(i).map_class;
    if (map <= 0) {
      throw UnmappedProductAtom("product pattern atom " + std::to_string(i) +
                                " has no map class");
    }
    if (!product_maps.insert(map).second) {
      throw ParseError("duplicate product map class " + std::to_string(map),
                       1);
    }
  }
  std::set<int> reactant_maps;
  for (const QueryGraph &r : t.reactants) {
    for (int i = 0; i < r.atom_count(); ++i) {
      int map = r.atom(i).map_class;
      if (map == 0) continue;
      if (!reactant_maps.insert(map).second) {
        throw ParseError("duplicate reactant map class " + std::to_string(map),
                         1);
      }
    }
  }
  // Product coverage first: a product map with no reactant home is the
  // stronger diagnosis when both sides are inconsistent.
  for (int map : product_maps) {
    if (reactant_maps.count(map) == 0) {
      throw UnmappedProductAtom("product map class " + std::to_string(map) +
                                " missing from reactant patterns");
    }
  }
  for (int map : reactant_maps) {
    if (product_maps.count(map) == 0) {
      throw ParseError("reactant map class " + std::to_string(map) +
                           " does not appear in the product pattern",
                       1);
    }
  }
  return t;
}

namespace {

std::string pattern_atom_text(const AtomPattern &a) {
  std::string sym = a.element;
  if (a.aromatic) {
    for (char &c : sym) c = static_cast<char>(std::tolower(c));
  }
  std::string out = "[" + sym;
  if (a.degree) out += "D" + std::to_string(*a.degree);
  if (a.in_ring) out += *a.in_ring ? "R" : "R0";
  if (a.hydrogens) out += "H" + std::to_string(*a.hydrogens);
  if (a.charge) {
    int q = *a.charge;
    if (q == 1) {
      out += "+";
    } else if (q == -1) {
      out += "-";
    } else if (q > 1) {
      out += "+" + std::to_string(q);
    } else if (q < -1) {
      out += "-" + std::to_string(-q);
    } else {
      out += "+0";
    }
  }
  if (a.map_class > 0) out += ":" + std::to_string(a.map_class);
  out += "]";
  return out;
}

std::string pattern_bond_text(const QueryGraph &g, const BondPattern &b) {
  BondOrder dflt = g.atom(b.from).aromatic && g.atom(b.to).aromatic
                       ? BondOrder::Aromatic
                       : BondOrder::Single;
  if (b.order == dflt) return "";
  switch (b.order) {
    case BondOrder::Single:
      return "-";
    case BondOrder::Double:
      return "=";
    case BondOrder::Triple:
      return "#";
    case BondOrder::Aromatic:
      return ":";
  }
  return "";
}

}  // namespace

std::string serialize_template(const ReactionTemplate &t) {
  // Emission via DFS with lookahead is fragile for ring-heavy patterns;
  // instead emit tree bonds inline and give every back edge a digit pair,
  // computed with a two-pass walk.
  struct Walk {
    const QueryGraph &g;
    std::vector<int> preorder;
    std::vector<bool> atom_seen;
    std::vector<bool> bond_tree;
    std::vector<std::vector<int>> children;     // atom -> child atom list
    std::vector<int> parent_bond;               // atom -> bond to parent
    std::vector<std::tuple<int, int, int>> backs;  // bond, opener, closer

    explicit Walk(const QueryGraph &graph)
        : g(graph),
          preorder(static_cast<std::size_t>(graph.atom_count()), -1),
          atom_seen(static_cast<std::size_t>(graph.atom_count()), false),
          bond_tree(static_cast<std::size_t>(graph.bond_count()), false),
          children(static_cast<std::size_t>(graph.atom_count())),
          parent_bond(static_cast<std::size_t>(graph.atom_count()), -1) {}

    int clock = 0;

    void dfs(int u) {
      atom_seen[static_cast<std::size_t>(u)] = true;
      preorder[static_cast<std::size_t>(u)] = clock++;
      for (int bi : g.incident_bonds(u)) {
        if (bond_tree[static_cast<std::size_t>(bi)]) continue;
        const BondPattern &b = g.bond(bi);
        int j = b.from == u ? b.to : b.from;
        bond_tree[static_cast<std::size_t>(bi)] = true;
        if (atom_seen[static_cast<std::size_t>(j)]) {
          int opener = preorder[static_cast<std::size_t>(j)] <
                               preorder[static_cast<std::size_t>(u)]
                           ? j
                           : u;
          int closer = opener == j ? u : j;
          backs.emplace_back(bi, opener, closer);
        } else {
          children[static_cast<std::size_t>(u)].push_back(j);
          parent_bond[static_cast<std::size_t>(j)] = bi;
          dfs(j);
        }
      }
    }
  };

  auto emit_pattern = [](const QueryGraph &g) {
    Walk w(g);
    w.dfs(0);
    std::map<int, std::vector<std::pair<int, int>>> openings, closings;
    for (auto &[bi, opener, closer] : w.backs) {
      openings[opener].emplace_back(w.preorder[static_cast<std::size_t>(closer)],
                                    bi);
      closings[closer].emplace_back(w.preorder[static_cast<std::size_t>(opener)],
                                    bi);
    }
    for (auto &[atom, list] : openings) std::sort(list.begin(), list.end());
    for (auto &[atom, list] : closings) std::sort(list.begin(), list.end());
    std::set<int> free_digits;
    for (int d = 1; d < 100; ++d) free_digits.insert(d);
    std::map<int, int> digit_of;

    std::string out;
    auto emit = [&](auto &&self, int u, std::string &acc) -> void {
      acc += pattern_atom_text(g.atom(u));
      if (auto ci = closings.find(u); ci != closings.end()) {
        for (auto &[pre, bi] : ci->second) {
          int d = digit_of.at(bi);
          free_digits.insert(d);
          acc += d < 10 ? std::to_string(d)
                        : "%" + std::to_string(d / 10) + std::to_string(d % 10);
        }
      }
      if (auto oi = openings.find(u); oi != openings.end()) {
        for (auto &[pre, bi] : oi->second) {
          int d = *free_digits.begin();
          free_digits.erase(free_digits.begin());
          digit_of[bi] = d;
          acc += pattern_bond_text(g, g.bond(bi));
          acc += d < 10 ? std::to_string(d)
                        : "%" + std::to_string(d / 10) + std::to_string(d % 10);
        }
      }
      const auto &kids = w.children[static_cast<std::size_t>(u)];
      for (std::size_t k = 0; k < kids.size(); ++k) {
        int c = kids[k];
        std::string segment =
            pattern_bond_text(g, g.bond(w.parent_bond[static_cast<std::size_t>(c)]));
        self(self, c, segment);
        if (k + 1 < kids.size()) {
          acc += "(" + segment + ")";
        } else {
          acc += segment;
        }
      }
    };
    emit(emit, 0, out);
    return out;
  };

  std::string out = emit_pattern(t.product);
  out += ">>";
  for (std::size_t i = 0; i < t.reactants.size(); ++i) {
    if (i > 0) out += ".";
    out += emit_pattern(t.reactants[i]);
  }
  return out;
}

}  // namespace retro
