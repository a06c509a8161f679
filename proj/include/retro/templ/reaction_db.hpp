// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_TEMPL_REACTION_DB_HPP
#define RETRO_TEMPL_REACTION_DB_HPP

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "retro/chem/molecule.hpp"
#include "retro/fp/fingerprint.hpp"
#include "retro/templ/template.hpp"

namespace retro {

// Named templates loaded from a JSONL file, indexed by id.
class TemplateSet {
public:
  TemplateSet() = default;
  static TemplateSet load_jsonl(const std::string &path);

  void add(ReactionTemplate t);
  const ReactionTemplate *find(const std::string &id) const;
  std::size_t size() const { return templates_.size(); }
  const std::vector<ReactionTemplate> &all() const { return templates_; }

private:
  std::vector<ReactionTemplate> templates_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// One reference reaction, stored in canonical "reactants>>product" form.
struct ReactionRecord {
  std::string rsmi;
  std::vector<std::string> reactants;  // canonical, sorted
  std::string product;                 // canonical
  std::optional<std::string> template_id;
  BitFingerprint fingerprint;
};

// Reference reaction database with an exact-match index and a linear
// fingerprint array for similarity scans.
class ReactionDb {
public:
  ReactionDb() = default;
  static ReactionDb load_jsonl(const std::string &path, int radius = 2,
                               int nbits = 2048);

  void add(const std::string &rsmi,
           std::optional<std::string> template_id = std::nullopt);
  std::size_t size() const { return records_.size(); }
  const ReactionRecord &record(std::size_t i) const { return records_[i]; }
  const ReactionRecord *find_exact(const std::string &canonical_rsmi) const;

  int fingerprint_radius() const { return radius_; }
  int fingerprint_bits() const { return nbits_; }

private:
  std::vector<ReactionRecord> records_;
  std::unordered_map<std::string, std::size_t> by_rsmi_;
  int radius_ = 2;
  int nbits_ = 2048;
};

struct MatchOutcome {
  enum class Kind { Exact, Similar, NonExistent };
  Kind kind = Kind::NonExistent;
  std::optional<ReactionRecord> record;
  double similarity = 0.0;

  bool exists() const { return kind != Kind::NonExistent; }
};

// Canonicalizes a "lhs>>rhs" string into "reactants>>product" order with
// sorted canonical reactants. `declared_product` disambiguates orientation:
// when the left side is exactly the declared product the sides are flipped.
struct ParsedReaction {
  std::vector<Molecule> reactants;
  Molecule product;
  std::string canonical;  // "reactants>>product"
};
ParsedReaction parse_reaction_smiles(std::string_view rsmi,
                                     const Molecule *declared_product = nullptr);

// Grounds a proposed reaction against the database: exact canonical match
// first, then the most similar of the top 100 fingerprint neighbors whose
// template (or, for template-free records, whose recorded product) applies
// to `product`, else NonExistent.
MatchOutcome ground_reaction(std::string_view proposed_rsmi,
                             const Molecule &product, const ReactionDb &db,
                             const TemplateSet &templates, int top_k = 100);

}  // namespace retro

#endif  // RETRO_TEMPL_REACTION_DB_HPP
