// SPDX-License-Identifier: Apache-2.0

#include "retro/proposer/route_db.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/rng.hpp"

namespace retro {

RouteDatabase RouteDatabase::load_jsonl(const std::string &path, int radius,
                                        int nbits) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open route database: " + path);

  RouteDatabase db;
  db.radius_ = radius;
  db.nbits_ = nbits;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    while (!sv.empty() && (sv.back() == '\r' || sv.back() == ' ')) {
      sv.remove_suffix(1);
    }
    if (sv.empty() || sv.front() == '#') continue;

    nlohmann::json row = nlohmann::json::parse(sv, nullptr, false);
    if (row.is_discarded() || !row.is_object() || !row.contains("target") ||
        !row.contains("steps")) {
      throw ParseError(path + ": malformed route record, line", line_no);
    }
    std::vector<ReferenceStep> steps;
    for (const auto &js : row["steps"]) {
      ReferenceStep step;
      step.product = js.at("product").get<std::string>();
      step.reaction = js.at("reaction").get<std::string>();
      for (const auto &r : js.at("reactants")) {
        step.reactants.push_back(r.get<std::string>());
      }
      steps.push_back(std::move(step));
    }
    db.add(row["target"].get<std::string>(), std::move(steps));
  }
  return db;
}

void RouteDatabase::add(const std::string &target,
                        std::vector<ReferenceStep> steps) {
  RouteRecord rec;
  Molecule m = parse_smiles(target);
  rec.target = to_canonical_smiles(m);
  rec.steps = std::move(steps);
  rec.fingerprint = morgan_fingerprint(m, radius_, nbits_);
  records_.push_back(std::move(rec));
}

std::vector<ScoredRoute> RouteDatabase::retrieve_top(const Molecule &target,
                                                     std::size_t n) const {
  if (records_.empty()) throw EmptyDatabase("route database is empty");

  BitFingerprint fp = morgan_fingerprint(target, radius_, nbits_);
  std::vector<ScoredRoute> scored;
  scored.reserve(records_.size());
  for (const RouteRecord &rec : records_) {
    scored.push_back({&rec, tanimoto(fp, rec.fingerprint)});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredRoute &a, const ScoredRoute &b) {
                     return a.similarity > b.similarity;
                   });
  if (scored.size() > n) scored.resize(n);
  return scored;
}

std::vector<ScoredRoute> RouteDatabase::sample_weighted(
    const Molecule &target, std::size_t n, std::mt19937 &rng) const {
  if (records_.empty()) throw EmptyDatabase("route database is empty");

  BitFingerprint fp = morgan_fingerprint(target, radius_, nbits_);
  std::vector<double> weight(records_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    weight[i] = tanimoto(fp, records_[i].fingerprint);
    total += weight[i];
  }
  if (total <= 0.0) {
    std::fill(weight.begin(), weight.end(), 1.0);
    total = static_cast<double>(weight.size());
  }

  std::vector<std::size_t> remaining(records_.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  std::vector<ScoredRoute> out;
  std::size_t draws = std::min(n, records_.size());
  out.reserve(draws);
  while (out.size() < draws) {
    double u = unit_draw(rng) * total;
    double acc = 0.0;
    std::size_t pick = remaining.size() - 1;  // guard against rounding
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      acc += weight[remaining[j]];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    std::size_t idx = remaining[pick];
    out.push_back({&records_[idx], weight[idx]});
    total -= weight[idx];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

Route expand_reference_route(const RouteRecord &record) {
  Route route;
  route.target = record.target;
  route.provenance = RouteProvenance::Scripted;

  std::vector<std::string> current = {record.target};
  for (const ReferenceStep &ref : record.steps) {
    RouteStep step;
    step.molecule_set = current;
    step.rational =
        "Apply the recorded disconnection to " + ref.product + ".";
    step.product = ref.product;
    step.reaction = ref.reaction;
    step.reactants = ref.reactants;

    // Replace the product with its reactants; comparison is canonical so a
    // respelled product still matches.
    std::string product_canon;
    try {
      product_canon = canonical_smiles(ref.product);
    } catch (const ParseError &) {
      product_canon = ref.product;
    }
    std::vector<std::string> next;
    bool removed = false;
    for (const std::string &m : current) {
      std::string canon;
      try {
        canon = canonical_smiles(m);
      } catch (const ParseError &) {
        canon = m;
      }
      if (!removed && canon == product_canon) {
        removed = true;
        continue;
      }
      next.push_back(m);
    }
    next.insert(next.end(), ref.reactants.begin(), ref.reactants.end());
    step.updated_molecule_set = next;
    route.steps.push_back(std::move(step));
    current = std::move(next);
  }
  return route;
}

}  // namespace retro
