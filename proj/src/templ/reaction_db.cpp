// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/templ/reaction_db.hpp"

namespace retro {

void TemplateSet::add(ReactionTemplate t) {
  if (t.id.empty()) {
    throw Error("template needs a nonempty id");
  }
  if (by_id_.count(t.id)) {
    throw Error("duplicate template id '" + t.id + "'");
  }
  by_id_[t.id] = templates_.size();
  templates_.push_back(std::move(t));
}

const ReactionTemplate *TemplateSet::find(const std::string &id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &templates_[it->second];
}

TemplateSet TemplateSet::load_jsonl(const std::string &path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open template file: " + path);
  }
  TemplateSet set;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(path + ": bad JSON (" + e.what() + ")", line_no);
    }
    if (!row.contains("id") || !row.contains("smarts")) {
      throw ParseError(path + ": template row needs 'id' and 'smarts'",
                       line_no);
    }
    std::string name = row.value("name", "");
    try {
      set.add(parse_template(row["smarts"].get<std::string>(),
                             row["id"].get<std::string>(), name));
    } catch (const Error &e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
  }
  return set;
}

ParsedReaction parse_reaction_smiles(std::string_view rsmi,
                                     const Molecule *declared_product) {
  std::size_t arrow = rsmi.find(">>");
  if (arrow == std::string_view::npos) {
    throw ParseError("reaction needs '>>'", rsmi.size() + 1);
  }
  if (rsmi.find(">>", arrow + 2) != std::string_view::npos) {
    throw ParseError("reaction has more than one '>>'",
                     rsmi.find(">>", arrow + 2) + 1);
  }
  Molecule lhs = parse_smiles(rsmi.substr(0, arrow));
  Molecule rhs = parse_smiles(rsmi.substr(arrow + 2));

  // Stored orientation is reactants>>product. A proposal that puts the
  // declared product on the left is flipped before canonicalization.
  bool flip = false;
  if (declared_product != nullptr) {
    std::string declared = to_canonical_smiles(*declared_product);
    std::string lhs_canon = to_canonical_smiles(lhs);
    std::string rhs_canon = to_canonical_smiles(rhs);
    if (rhs_canon != declared && lhs_canon == declared) flip = true;
  }
  Molecule &reactant_side = flip ? rhs : lhs;
  Molecule &product_side = flip ? lhs : rhs;

  ParsedReaction out;
  out.reactants = reactant_side.components();
  out.product = std::move(product_side);

  std::vector<std::string> reactant_strings;
  reactant_strings.reserve(out.reactants.size());
  for (const Molecule &m : out.reactants) {
    reactant_strings.push_back(to_canonical_smiles(m));
  }
  std::sort(reactant_strings.begin(), reactant_strings.end());
  std::string joined;
  for (const std::string &s : reactant_strings) {
    if (!joined.empty()) joined += ".";
    joined += s;
  }
  out.canonical = joined + ">>" + to_canonical_smiles(out.product);
  return out;
}

void ReactionDb::add(const std::string &rsmi,
                     std::optional<std::string> template_id) {
  ParsedReaction parsed = parse_reaction_smiles(rsmi);
  if (by_rsmi_.count(parsed.canonical)) return;  // first occurrence wins

  ReactionRecord record;
  record.rsmi = parsed.canonical;
  for (const Molecule &m : parsed.reactants) {
    record.reactants.push_back(to_canonical_smiles(m));
  }
  std::sort(record.reactants.begin(), record.reactants.end());
  record.product = to_canonical_smiles(parsed.product);
  record.template_id = std::move(template_id);
  record.fingerprint =
      reaction_fingerprint(parsed.reactants, parsed.product, radius_, nbits_);
  by_rsmi_[parsed.canonical] = records_.size();
  records_.push_back(std::move(record));
}

const ReactionRecord *ReactionDb::find_exact(
    const std::string &canonical_rsmi) const {
  auto it = by_rsmi_.find(canonical_rsmi);
  return it == by_rsmi_.end() ? nullptr : &records_[it->second];
}

ReactionDb ReactionDb::load_jsonl(const std::string &path, int radius,
                                  int nbits) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open reaction database: " + path);
  }
  ReactionDb db;
  db.radius_ = radius;
  db.nbits_ = nbits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(path + ": bad JSON (" + e.what() + ")", line_no);
    }
    if (!row.contains("rsmi")) {
      throw ParseError(path + ": reaction row needs 'rsmi'", line_no);
    }
    std::optional<std::string> template_id;
    if (row.contains("template_id") && !row["template_id"].is_null()) {
      template_id = row["template_id"].get<std::string>();
    }
    try {
      db.add(row["rsmi"].get<std::string>(), std::move(template_id));
    } catch (const Error &e) {
      throw ParseError(path + ": " + e.what(), line_no);
    }
  }
  return db;
}

namespace {

// A record is applicable when its template produces at least one reactant
// set for the product; template-free records replay as an exact product
// lookup.
bool record_applicable(const ReactionRecord &record, const Molecule &product,
                       const std::string &product_canonical,
                       const TemplateSet &templates) {
  if (record.template_id) {
    const ReactionTemplate *t = templates.find(*record.template_id);
    if (t == nullptr) return false;
    try {
      return !apply_backward(*t, product).empty();
    } catch (const Error &) {
      return false;
    }
  }
  return record.product == product_canonical;
}

}  // namespace

MatchOutcome ground_reaction(std::string_view proposed_rsmi,
                             const Molecule &product, const ReactionDb &db,
                             const TemplateSet &templates, int top_k) {
  ParsedReaction proposed = parse_reaction_smiles(proposed_rsmi, &product);

  MatchOutcome out;
  if (const ReactionRecord *exact = db.find_exact(proposed.canonical)) {
    out.kind = MatchOutcome::Kind::Exact;
    out.record = *exact;
    out.similarity = 1.0;
    return out;
  }

  if (db.size() == 0) return out;

  BitFingerprint probe =
      reaction_fingerprint(proposed.reactants, proposed.product,
                           db.fingerprint_radius(), db.fingerprint_bits());
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    ranked.emplace_back(tanimoto(probe, db.record(i).fingerprint), i);
  }
  // Ties keep insertion order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto &a, const auto &b) { return a.first > b.first; });
  if (static_cast<int>(ranked.size()) > top_k) {
    ranked.resize(static_cast<std::size_t>(top_k));
  }

  std::string product_canonical = to_canonical_smiles(product);
  for (const auto &[similarity, index] : ranked) {
    const ReactionRecord &record = db.record(index);
    if (record_applicable(record, product, product_canonical, templates)) {
      out.kind = MatchOutcome::Kind::Similar;
      out.record = record;
      out.similarity = similarity;
      return out;
    }
  }
  return out;
}

}  // namespace retro
