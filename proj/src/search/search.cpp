// SPDX-License-Identifier: Apache-2.0

#include "retro/search/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <unordered_map>

#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/proposer/prompts.hpp"

namespace retro {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_config(const SearchConfig &config) {
  if (config.k < 1 || !(config.policy_temperature > 0.0)) {
    throw DependencyError("search config is unusable: k must be >= 1 and "
                          "the policy temperature positive");
  }
}

// Sorted canonical multiset; the state identity for both searches.
using State = std::vector<std::string>;

State successor(const State &state, const std::string &product,
                const std::vector<std::string> &reactants) {
  State next;
  next.reserve(state.size() - 1 + reactants.size());
  bool removed = false;
  for (const std::string &m : state) {
    if (!removed && m == product) {
      removed = true;
      continue;
    }
    next.push_back(m);
  }
  next.insert(next.end(), reactants.begin(), reactants.end());
  std::sort(next.begin(), next.end());
  return next;
}

// First molecule that still needs synthesis, or nullptr when the state is
// fully purchasable.
const std::string *frontier_molecule(const State &state, const Stock &stock) {
  for (const std::string &m : state) {
    if (!stock.contains_canonical(m)) return &m;
  }
  return nullptr;
}

// Per-run prediction cache keyed by canonical product.
class PredictionCache {
public:
  PredictionCache(SingleStepPredictor &predictor, SearchStats &stats)
      : predictor_(predictor), stats_(stats) {}

  const std::vector<StepPrediction> &get(const std::string &canonical) {
    auto it = cache_.find(canonical);
    if (it != cache_.end()) return it->second;
    ++stats_.predictor_calls;
    std::vector<StepPrediction> preds =
        predictor_.predict(parse_smiles(canonical));
    return cache_.emplace(canonical, std::move(preds)).first->second;
  }

private:
  SingleStepPredictor &predictor_;
  SearchStats &stats_;
  std::unordered_map<std::string, std::vector<StepPrediction>> cache_;
};

RouteStep make_route_step(const State &set, const std::string &product,
                          const StepPrediction &pred, const State &updated) {
  RouteStep step;
  step.molecule_set = set;
  step.rational = "Chosen by the search policy.";
  step.product = product;
  step.reaction = pred.reaction;
  step.reactants = pred.reactants;
  step.updated_molecule_set = updated;
  return step;
}

}  // namespace

std::vector<StepPrediction> self_consistency(
    const std::vector<StepPrediction> &samples) {
  std::vector<StepPrediction> out;
  if (samples.empty()) return out;
  std::vector<std::size_t> counts;
  for (const StepPrediction &s : samples) {
    bool found = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].reaction == s.reaction) {
        ++counts[i];
        found = true;
        break;
      }
    }
    if (!found) {
      out.push_back(s);
      counts.push_back(1);
    }
  }
  double k = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].p = static_cast<double>(counts[i]) / k;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const StepPrediction &a, const StepPrediction &b) {
                     return a.p > b.p;
                   });
  return out;
}

std::vector<StepPrediction> predict_single_step(const Molecule &product,
                                                Proposer &proposer,
                                                const TemplateSet &templates,
                                                const ReactionDb &db,
                                                std::size_t k) {
  std::string product_canon = to_canonical_smiles(product);
  std::string prompt = build_single_step_prompt(product_canon);

  std::vector<StepPrediction> survivors;
  for (std::size_t i = 0; i < k; ++i) {
    std::string reply = proposer.propose(prompt);
    std::optional<std::string> rsmi = extract_tagged_block(reply, "REACTION");
    if (!rsmi) continue;
    MatchOutcome outcome;
    ParsedReaction parsed;
    try {
      parsed = parse_reaction_smiles(*rsmi, &product);
      outcome = ground_reaction(*rsmi, product, db, templates);
    } catch (const Error &) {
      continue;
    }
    if (!outcome.exists()) continue;

    StepPrediction pred;
    if (outcome.record) pred.template_id = outcome.record->template_id;
    // Exact matches adopt the recorded reactants; similar matches keep the
    // proposal's own (already grounded as applicable by ground_reaction).
    if (outcome.kind == MatchOutcome::Kind::Exact && outcome.record) {
      pred.reactants = outcome.record->reactants;
    } else {
      for (const Molecule &m : parsed.reactants) {
        pred.reactants.push_back(to_canonical_smiles(m));
      }
    }
    std::sort(pred.reactants.begin(), pred.reactants.end());
    std::string joined;
    for (std::size_t j = 0; j < pred.reactants.size(); ++j) {
      if (j) joined += '.';
      joined += pred.reactants[j];
    }
    pred.reaction = joined + ">>" + product_canon;
    survivors.push_back(std::move(pred));
  }
  return self_consistency(survivors);
}

namespace {

// ---------------------------------------------------------------------------
// MCTS

struct MctsNode {
  State state;
  std::size_t depth = 0;
  MctsNode *parent = nullptr;
  // Edge that produced this node.
  std::string product;
  StepPrediction reaction;

  bool expanded = false;
  bool terminal = false;
  double terminal_value = 0.0;
  double prior = 0.0;
  std::size_t visits = 0;
  double total_value = 0.0;
  std::vector<std::unique_ptr<MctsNode>> children;

  double q() const { return visits ? total_value / visits : 0.0; }
};

Route route_to(const MctsNode *node, const std::string &target) {
  std::vector<const MctsNode *> chain;
  for (const MctsNode *n = node; n->parent; n = n->parent) chain.push_back(n);
  std::reverse(chain.begin(), chain.end());
  Route route;
  route.target = target;
  route.provenance = RouteProvenance::Scripted;
  for (const MctsNode *n : chain) {
    route.steps.push_back(make_route_step(n->parent->state, n->product,
                                          n->reaction, n->state));
  }
  return route;
}

}  // namespace

SearchResult mcts_search(const std::string &target, const Stock &stock,
                         SingleStepPredictor &predictor,
                         const SearchConfig &config) {
  check_config(config);
  SearchResult result;
  std::string target_canon;
  try {
    target_canon = canonical_smiles(target);
  } catch (const ParseError &e) {
    throw DependencyError(std::string("target does not parse: ") + e.what());
  }

  MctsNode root;
  root.state = {target_canon};
  if (!frontier_molecule(root.state, stock)) {
    result.solved = true;
    result.route.target = target;
    return result;
  }

  PredictionCache cache(predictor, result.stats);

  auto expand = [&](MctsNode &node) {
    node.expanded = true;
    ++result.stats.expansions;
    const std::string *product = frontier_molecule(node.state, stock);
    if (!product || node.depth >= config.max_depth) {
      node.terminal = true;
      node.terminal_value = product ? 0.0 : 1.0;
      return;
    }
    const std::vector<StepPrediction> &preds = cache.get(*product);
    if (preds.empty()) {
      node.terminal = true;
      node.terminal_value = 0.0;
      return;
    }
    // Priors: softmax over the sampled reactions, scaled by temperature.
    double denom = 0.0;
    std::vector<double> weights;
    for (const StepPrediction &p : preds) {
      weights.push_back(std::exp(p.p / config.policy_temperature));
      denom += weights.back();
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      auto child = std::make_unique<MctsNode>();
      child->state = successor(node.state, *product, preds[i].reactants);
      child->depth = node.depth + 1;
      child->parent = &node;
      child->product = *product;
      child->reaction = preds[i];
      child->prior = weights[i] / denom;
      node.children.push_back(std::move(child));
      ++result.stats.nodes;
    }
  };

  for (std::size_t iter = 0; iter < config.iteration_cap; ++iter) {
    ++result.stats.iterations;

    // Selection: descend by the prior-weighted upper confidence bound.
    MctsNode *node = &root;
    while (node->expanded && !node->terminal && !node->children.empty()) {
      MctsNode *best = nullptr;
      double best_score = -kInf;
      for (const auto &child : node->children) {
        double u = config.ucb_constant * child->prior *
                   std::sqrt(static_cast<double>(node->visits)) /
                   (1.0 + static_cast<double>(child->visits));
        double score = child->q() + u;
        if (score > best_score) {  // strict: ties keep the lowest index
          best_score = score;
          best = child.get();
        }
      }
      node = best;
    }

    if (!node->expanded) expand(*node);

    double value;
    if (node->terminal) {
      value = node->terminal_value;
    } else {
      value = config.value_constant;
    }
    if (!frontier_molecule(node->state, stock)) {
      value = 1.0;
      if (!result.solved) {
        result.solved = true;
        result.route = route_to(node, target);
      }
    }

    for (MctsNode *n = node; n; n = n->parent) {
      ++n->visits;
      n->total_value += value;
    }
    if (result.solved) break;
  }
  return result;
}

namespace {

// ---------------------------------------------------------------------------
// Retro*-0 AND-OR tree

struct AndNode;

struct OrNode {
  std::string molecule;
  bool purchasable = false;
  bool expanded = false;
  std::size_t depth = 0;
  std::vector<std::unique_ptr<AndNode>> children;
  double value = kInf;        // cheapest completion cost below this node
  AndNode *best_child = nullptr;
};

struct AndNode {
  StepPrediction reaction;
  double cost = 0.0;
  std::vector<std::unique_ptr<OrNode>> children;
  double value = kInf;
};

// Recomputes subtree values. Purchasable leaves cost 0; unexpanded
// molecules carry the heuristic 0 so the bound stays admissible; expanded
// molecules take the cheapest child reaction; dead ends are infinite.
double evaluate_or(OrNode &node) {
  if (node.purchasable) {
    node.value = 0.0;
    return node.value;
  }
  if (!node.expanded) {
    node.value = 0.0;  // h == 0
    return node.value;
  }
  node.value = kInf;
  node.best_child = nullptr;
  for (auto &child : node.children) {
    child->value = child->cost;
    for (auto &grand : child->children) {
      child->value += evaluate_or(*grand);
    }
    if (child->value < node.value) {
      node.value = child->value;
      node.best_child = child.get();
    }
  }
  return node.value;
}

// First unexpanded, unpurchasable molecule in the current best partial
// tree, preorder.
OrNode *find_frontier(OrNode &node) {
  if (node.purchasable) return nullptr;
  if (!node.expanded) return &node;
  if (!node.best_child) return nullptr;  // dead end
  for (auto &grand : node.best_child->children) {
    if (OrNode *f = find_frontier(*grand)) return f;
  }
  return nullptr;
}

void extract_steps(const OrNode &node, State &current,
                   std::vector<RouteStep> &steps) {
  if (node.purchasable || !node.best_child) return;
  const AndNode &chosen = *node.best_child;
  State updated =
      successor(current, node.molecule, chosen.reaction.reactants);
  steps.push_back(make_route_step(current, node.molecule, chosen.reaction,
                                  updated));
  current = updated;
  for (const auto &grand : chosen.children) {
    extract_steps(*grand, current, steps);
  }
}

}  // namespace

SearchResult retrostar_search(const std::string &target, const Stock &stock,
                              SingleStepPredictor &predictor,
                              const SearchConfig &config) {
  check_config(config);
  SearchResult result;
  std::string target_canon;
  try {
    target_canon = canonical_smiles(target);
  } catch (const ParseError &e) {
    throw DependencyError(std::string("target does not parse: ") + e.what());
  }

  OrNode root;
  root.molecule = target_canon;
  root.purchasable = stock.contains_canonical(target_canon);
  if (root.purchasable) {
    result.solved = true;
    result.cost = 0.0;
    result.route.target = target;
    return result;
  }

  PredictionCache cache(predictor, result.stats);

  for (std::size_t iter = 0; iter < config.iteration_cap; ++iter) {
    evaluate_or(root);
    if (root.value == kInf) break;  // every branch is a dead end

    OrNode *frontier = find_frontier(root);
    if (!frontier) break;  // best tree is complete: solved

    ++result.stats.iterations;
    frontier->expanded = true;
    ++result.stats.expansions;
    if (frontier->depth < config.max_depth) {
      for (const StepPrediction &pred : cache.get(frontier->molecule)) {
        auto and_node = std::make_unique<AndNode>();
        and_node->reaction = pred;
        and_node->cost =
            -std::log(std::max(pred.p, config.probability_floor));
        for (const std::string &reactant : pred.reactants) {
          auto or_child = std::make_unique<OrNode>();
          or_child->molecule = reactant;
          or_child->purchasable = stock.contains_canonical(reactant);
          or_child->depth = frontier->depth + 1;
          and_node->children.push_back(std::move(or_child));
          ++result.stats.nodes;
        }
        frontier->children.push_back(std::move(and_node));
        ++result.stats.nodes;
      }
    }
  }

  evaluate_or(root);
  if (root.value < kInf && !find_frontier(root)) {
    result.solved = true;
    result.cost = root.value;
    result.route.target = target;
    State current = {target_canon};
    extract_steps(root, current, result.route.steps);
    result.route.provenance = RouteProvenance::Scripted;
  }
  return result;
}

}  // namespace retro
