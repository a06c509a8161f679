// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_SEARCH_SEARCH_HPP
#define RETRO_SEARCH_SEARCH_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "retro/chem/molecule.hpp"
#include "retro/proposer/proposer.hpp"
#include "retro/route/route.hpp"
#include "retro/stock.hpp"
#include "retro/templ/reaction_db.hpp"

namespace retro {

// One grounded backward reaction with its self-consistency
// pseudo-probability.
struct StepPrediction {
  std::string reaction;  // canonical "reactants>>product"
  std::optional<std::string> template_id;
  std::vector<std::string> reactants;  // canonical, sorted
  double p = 0.0;
};

enum class SearchAlgo { Mcts, RetroStar };

struct SearchConfig {
  SearchAlgo algorithm = SearchAlgo::Mcts;
  std::size_t iteration_cap = 500;
  std::size_t k = 4;  // proposer samples per expansion
  double ucb_constant = 1.41;
  double policy_temperature = 3.0;  // prior softmax scale
  double value_constant = 0.5;      // non-terminal leaf value
  double probability_floor = 1e-5;  // reaction-cost threshold
  std::size_t max_depth = 12;
};

struct SearchStats {
  std::size_t iterations = 0;
  std::size_t expansions = 0;
  std::size_t predictor_calls = 0;  // unique products expanded
  std::size_t nodes = 1;            // root included
};

struct SearchResult {
  bool solved = false;
  Route route;        // empty unless solved
  double cost = 0.0;  // summed reaction cost (retrostar); 0 for mcts
  SearchStats stats;
};

// Backward-prediction source for the searches. Implementations must be
// deterministic per product within one search run; results are cached by
// canonical product SMILES.
class SingleStepPredictor {
public:
  virtual ~SingleStepPredictor() = default;
  virtual std::vector<StepPrediction> predict(const Molecule &product) = 0;
};

// Frequency estimate over grounded samples: p = count / |samples| per
// unique reaction (identity is the canonical reaction string), descending,
// first-seen order on ties. The probabilities sum to one exactly.
std::vector<StepPrediction> self_consistency(
    const std::vector<StepPrediction> &samples);

// Asks the proposer k times for a backward reaction, grounds each reply
// against the database, drops hallucinated reactions, and folds the
// survivors with self_consistency. Empty when every sample fails.
std::vector<StepPrediction> predict_single_step(const Molecule &product,
                                                Proposer &proposer,
                                                const TemplateSet &templates,
                                                const ReactionDb &db,
                                                std::size_t k);

// Proposer-backed predictor used by the CLI searches.
class ProposerPredictor : public SingleStepPredictor {
public:
  ProposerPredictor(Proposer &proposer, const TemplateSet &templates,
                    const ReactionDb &db, std::size_t k)
      : proposer_(proposer), templates_(templates), db_(db), k_(k) {}
  std::vector<StepPrediction> predict(const Molecule &product) override {
    return predict_single_step(product, proposer_, templates_, db_, k_);
  }

private:
  Proposer &proposer_;
  const TemplateSet &templates_;
  const ReactionDb &db_;
  std::size_t k_;
};

// Monte Carlo tree search over molecule multisets. Child priors are
// softmax(p / temperature) over the predicted reactions; selection maximizes
// Q + c * prior * sqrt(N_parent) / (1 + N_child) with index tie-breaks;
// non-terminal leaves evaluate to the constant value; terminal states score
// 1.0 when fully purchasable and 0.0 at dead ends.
SearchResult mcts_search(const std::string &target, const Stock &stock,
                         SingleStepPredictor &predictor,
                         const SearchConfig &config);

// Retro*-0 over an AND-OR tree: purchasable molecules cost 0, reaction
// nodes cost -log(max(p, floor)), the search heuristic is identically 0,
// and the frontier molecule of the current minimum-cost partial tree is
// expanded each iteration. Returns the cheapest solved route.
SearchResult retrostar_search(const std::string &target, const Stock &stock,
                              SingleStepPredictor &predictor,
                              const SearchConfig &config);

}  // namespace retro

#endif  // RETRO_SEARCH_SEARCH_HPP
