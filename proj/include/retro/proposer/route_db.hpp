// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_PROPOSER_ROUTE_DB_HPP
#define RETRO_PROPOSER_ROUTE_DB_HPP

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "retro/chem/molecule.hpp"
#include "retro/fp/fingerprint.hpp"
#include "retro/route/route.hpp"

namespace retro {

// Reference routes carry only the reaction core of each step; the molecule
// sets are reconstructed on demand when a route is rendered into a prompt.
struct ReferenceStep {
  std::string product;
  std::string reaction;
  std::vector<std::string> reactants;
};

struct RouteRecord {
  std::string target;  // canonical
  std::vector<ReferenceStep> steps;
  BitFingerprint fingerprint;
};

struct ScoredRoute {
  const RouteRecord *record = nullptr;
  double similarity = 0.0;
};

// Retrieval set of known synthesis routes, scanned by Tanimoto similarity
// of the stored target fingerprints. Multiple routes per target are allowed.
class RouteDatabase {
public:
  RouteDatabase() = default;
  // JSONL rows: {"target": smiles, "steps": [{"product", "reaction",
  // "reactants"}, ...]}.
  static RouteDatabase load_jsonl(const std::string &path, int radius = 2,
                                  int nbits = 2048);

  void add(const std::string &target, std::vector<ReferenceStep> steps);
  std::size_t size() const { return records_.size(); }
  const RouteRecord &record(std::size_t i) const { return records_[i]; }

  // The n most similar records, descending; ties keep insertion order.
  std::vector<ScoredRoute> retrieve_top(const Molecule &target,
                                        std::size_t n) const;

  // Similarity-weighted sampling without replacement; uniform when every
  // similarity is zero. Draws use raw generator words, so results are
  // identical across platforms for a fixed seed.
  std::vector<ScoredRoute> sample_weighted(const Molecule &target,
                                           std::size_t n,
                                           std::mt19937 &rng) const;

  int fingerprint_radius() const { return radius_; }
  int fingerprint_bits() const { return nbits_; }

private:
  std::vector<RouteRecord> records_;
  int radius_ = 2;
  int nbits_ = 2048;
};

// Rebuilds a full six-field route from a reference record by replaying its
// steps against the evolving molecule set.
Route expand_reference_route(const RouteRecord &record);

}  // namespace retro

#endif  // RETRO_PROPOSER_ROUTE_DB_HPP
