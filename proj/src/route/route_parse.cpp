// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "retro/errors.hpp"
#include "retro/route/route.hpp"

namespace retro {
namespace {

using nlohmann::ordered_json;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Removes one layer of matching quotes, tolerating a mixed pair; proposer
// text freely alternates between ' and ".
std::string strip_quotes(std::string s) {
  s = trim(s);
  auto is_quote = [](char c) { return c == '\'' || c == '"'; };
  if (s.size() >= 2 && is_quote(s.front()) && is_quote(s.back())) {
    s = s.substr(1, s.size() - 2);
  }
  return trim(s);
}

std::string strip_brackets(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    s = s.substr(1, s.size() - 2);
  }
  return trim(s);
}

// "[A, B]" or "A, B", with or without quoting, into items.
std::vector<std::string> parse_list(const std::string &value) {
  std::string body = strip_brackets(strip_quotes(value));
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t comma = body.find(',', start);
    std::string item = strip_quotes(
        body.substr(start, comma == std::string::npos ? comma : comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

// Lowercases and squeezes separators so "Updated_Molecule  set" and
// "updated molecule set" compare equal.
std::string normalize_key(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return trim(out);
}

enum class Field {
  MoleculeSet,
  Rational,
  Product,
  Reaction,
  Reactants,
  UpdatedMoleculeSet,
  Unknown,
};

Field classify_key(std::string_view raw) {
  std::string key = normalize_key(raw);
  if (key == "molecule set") return Field::MoleculeSet;
  if (key == "rational" || key == "rationale") return Field::Rational;
  if (key == "product") return Field::Product;
  if (key == "reaction") return Field::Reaction;
  if (key == "reactants") return Field::Reactants;
  if (key == "updated molecule set") return Field::UpdatedMoleculeSet;
  return Field::Unknown;
}

const char *field_name(Field f) {
  switch (f) {
    case Field::MoleculeSet: return "molecule_set";
    case Field::Rational: return "rational";
    case Field::Product: return "product";
    case Field::Reaction: return "reaction";
    case Field::Reactants: return "reactants";
    case Field::UpdatedMoleculeSet: return "updated_molecule_set";
    default: return "unknown";
  }
}

struct RawStep {
  bool has[6] = {false, false, false, false, false, false};
  std::string value[6];
};

RouteStep finish_step(const RawStep &raw, std::size_t ordinal) {
  for (int f = 0; f < 6; ++f) {
    if (!raw.has[f]) {
      throw StepSchemaError(ordinal, field_name(static_cast<Field>(f)));
    }
  }
  RouteStep step;
  step.molecule_set =
      parse_list(raw.value[static_cast<int>(Field::MoleculeSet)]);
  step.rational = strip_quotes(raw.value[static_cast<int>(Field::Rational)]);
  std::vector<std::string> product_list =
      parse_list(raw.value[static_cast<int>(Field::Product)]);
  step.product = product_list.empty() ? "" : product_list.front();
  step.reaction = strip_brackets(
      strip_quotes(raw.value[static_cast<int>(Field::Reaction)]));
  step.reactants = parse_list(raw.value[static_cast<int>(Field::Reactants)]);
  step.updated_molecule_set =
      parse_list(raw.value[static_cast<int>(Field::UpdatedMoleculeSet)]);
  return step;
}

// Strict-JSON branch: the step list is a real JSON array. List-valued fields
// may still arrive as "[A, B]" strings, so every value funnels through the
// same coercions as the lenient branch.
std::vector<RouteStep> steps_from_json(const ordered_json &arr) {
  std::vector<RouteStep> steps;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const ordered_json &obj = arr[i];
    if (!obj.is_object()) {
      throw StepSchemaError(i + 1, "step is not a dictionary");
    }
    RawStep raw;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      Field f = classify_key(it.key());
      if (f == Field::Unknown) continue;
      std::string value;
      if (it.value().is_array()) {
        std::string joined;
        for (const auto &item : it.value()) {
          if (!joined.empty()) joined += ", ";
          joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        value = "[" + joined + "]";
      } else if (it.value().is_string()) {
        value = it.value().get<std::string>();
      } else {
        value = it.value().dump();
      }
      raw.has[static_cast<int>(f)] = true;
      raw.value[static_cast<int>(f)] = value;
    }
    steps.push_back(finish_step(raw, i + 1));
  }
  return steps;
}

// Lenient branch: walk the region, split step blocks on braces, then locate
// known keys by their quoted spelling and take everything up to the next
// known key as the value. Free-text rationales with commas survive this.
struct KeySite {
  Field field;
  std::size_t key_begin;
  std::size_t value_begin;
};

std::vector<KeySite> find_keys(std::string_view block) {
  std::vector<KeySite> sites;
  for (std::size_t i = 0; i < block.size(); ++i) {
    char q = block[i];
    if (q != '\'' && q != '"') continue;
    std::size_t close = block.find(q, i + 1);
    if (close == std::string_view::npos) continue;
    Field f = classify_key(block.substr(i + 1, close - i - 1));
    if (f == Field::Unknown) continue;
    std::size_t colon = close + 1;
    while (colon < block.size() &&
           std::isspace(static_cast<unsigned char>(block[colon]))) {
      ++colon;
    }
    if (colon >= block.size() || block[colon] != ':') continue;
    sites.push_back({f, i, colon + 1});
    i = colon;
  }
  return sites;
}

std::vector<RouteStep> steps_from_loose_text(std::string_view region) {
  std::vector<RouteStep> steps;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = region.find('{', pos);
    if (open == std::string_view::npos) break;
    std::size_t close = region.find('}', open + 1);
    if (close == std::string_view::npos) break;
    std::string_view block = region.substr(open + 1, close - open - 1);
    pos = close + 1;

    std::vector<KeySite> sites = find_keys(block);
    if (sites.empty()) continue;
    RawStep raw;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      std::size_t end =
          k + 1 < sites.size() ? sites[k + 1].key_begin : block.size();
      std::string value =
          trim(block.substr(sites[k].value_begin, end - sites[k].value_begin));
      if (!value.empty() && value.back() == ',') {
        value = trim(std::string_view(value).substr(0, value.size() - 1));
      }
      raw.has[static_cast<int>(sites[k].field)] = true;
      raw.value[static_cast<int>(sites[k].field)] = value;
    }
    steps.push_back(finish_step(raw, steps.size() + 1));
  }
  return steps;
}

}  // namespace

Route parse_route_block(std::string_view text) {
  std::size_t open = text.find("<ROUTE>");
  if (open == std::string_view::npos) {
    throw MissingRouteBlock("proposal has no <ROUTE> block");
  }
  std::size_t body = open + 7;
  std::size_t close = text.find("</ROUTE>", body);
  if (close == std::string_view::npos) {
    throw MissingRouteBlock("<ROUTE> block is not closed");
  }
  std::string region = trim(text.substr(body, close - body));

  std::vector<RouteStep> steps;
  ordered_json parsed = ordered_json::parse(region, nullptr, false);
  if (parsed.is_array()) {
    steps = steps_from_json(parsed);
  } else {
    steps = steps_from_loose_text(region);
  }
  if (steps.empty()) throw EmptyRoute("route block contains no steps");

  Route route;
  route.steps = std::move(steps);
  if (!route.steps.front().molecule_set.empty()) {
    route.target = route.steps.front().molecule_set.front();
  }
  return route;
}

std::string serialize_route(const Route &route) {
  ordered_json arr = ordered_json::array();
  for (const RouteStep &step : route.steps) {
    ordered_json obj;
    obj["Molecule set"] = step.molecule_set;
    obj["Rational"] = step.rational;
    obj["Product"] = step.product;
    obj["Reaction"] = step.reaction;
    obj["Reactants"] = step.reactants;
    obj["Updated molecule set"] = step.updated_molecule_set;
    arr.push_back(std::move(obj));
  }
  return "<ROUTE>\n" + arr.dump(4) + "\n</ROUTE>";
}

}  // namespace retro
