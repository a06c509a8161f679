// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/search/search.hpp"

using namespace retro;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StepPrediction pred(std::string reaction, std::vector<std::string> reactants,
                    double p = 0.0) {
  StepPrediction s;
  s.reaction = std::move(reaction);
  s.reactants = std::move(reactants);
  s.p = p;
  return s;
}

// Table-driven predictor; optional per-seed jitter shuffles the prediction
// order and perturbs the pseudo-probabilities the way resampling would.
class TablePredictor : public SingleStepPredictor {
public:
  std::map<std::string, std::vector<StepPrediction>> table;
  unsigned jitter_seed = 0;
  bool jitter = false;

  std::vector<StepPrediction> predict(const Molecule &product) override {
    auto it = table.find(to_canonical_smiles(product));
    if (it == table.end()) return {};
    std::vector<StepPrediction> preds = it->second;
    if (jitter && preds.size() > 1) {
      std::mt19937 rng(jitter_seed);
      std::shuffle(preds.begin(), preds.end(), rng);
      double total = 0.0;
      for (StepPrediction &p : preds) {
        double noise =
            static_cast<double>(rng() % 400) / 1000.0 - 0.2;  // +-0.2
        p.p = std::clamp(p.p + noise, 0.05, 1.0);
        total += p.p;
      }
      for (StepPrediction &p : preds) p.p /= total;
    }
    return preds;
  }
};

Stock make_stock(std::initializer_list<const char *> smiles) {
  Stock s;
  for (const char *m : smiles) s.add(m);
  return s;
}

}  // namespace

TEST_CASE("self consistency counts unique reactions") {
  auto a = pred("A>>x", {"x"});
  auto b = pred("B>>y", {"y"});

  auto out = self_consistency({a, a, a, b});
  REQUIRE(out.size() == 2);
  CHECK(out[0].reaction == "A>>x");
  CHECK(out[0].p == 0.75);
  CHECK(out[1].p == 0.25);

  out = self_consistency({b, b});
  REQUIRE(out.size() == 1);
  CHECK(out[0].p == 1.0);

  auto c = pred("C>>z", {"z"});
  out = self_consistency({a, b, c});
  REQUIRE(out.size() == 3);
  for (const auto &s : out) CHECK(s.p == doctest::Approx(1.0 / 3));

  CHECK(self_consistency({}).empty());
}

TEST_CASE("self consistency matches brute-force counting for all k <= 8") {
  // Every multiset over a 3-reaction alphabet, enumerated as base-3 digit
  // strings; the alphabet index doubles as the reaction name.
  const std::vector<StepPrediction> alphabet = {
      pred("r0>>a", {"a"}), pred("r1>>b", {"b"}), pred("r2>>c", {"c"})};
  for (std::size_t k = 1; k <= 8; ++k) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < k; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<StepPrediction> samples;
      std::size_t counts[3] = {0, 0, 0};
      std::size_t rest = code;
      for (std::size_t i = 0; i < k; ++i) {
        std::size_t digit = rest % 3;
        rest /= 3;
        samples.push_back(alphabet[digit]);
        ++counts[digit];
      }
      auto out = self_consistency(samples);

      // Exact counting: p * k recovers the integer count, and the counts
      // cover all k samples.
      std::size_t covered = 0;
      double total_p = 0.0;
      for (const auto &s : out) {
        std::size_t idx = static_cast<std::size_t>(s.reaction[1] - '0');
        CHECK(std::abs(s.p * static_cast<double>(k) -
                       static_cast<double>(counts[idx])) < 1e-12);
        covered += counts[idx];
        total_p += s.p;
      }
      CHECK(covered == k);
      CHECK(std::abs(total_p - 1.0) < 1e-12);
      for (std::size_t i = 1; i < out.size(); ++i) {
        CHECK(out[i].p <= out[i - 1].p);
      }
    }
  }
}

namespace {

// Amide world for the proposer-backed tests.
struct World {
  TemplateSet templates;
  ReactionDb db;
  Stock stock;
};

World make_world() {
  World w;
  w.templates.add(parse_template(
      "[C:1](=[O:2])[N:3]>>[C:1](=[O:2])[OH1].[N:3]", "amide"));
  w.db.add("CC(=O)O.CN>>CC(=O)NC", "amide");
  w.db.add("NCC(=O)O.CN>>NCC(=O)NC", "amide");
  w.db.add("CC(=O)O.NCC(=O)NC>>CC(=O)NCC(=O)NC", "amide");
  w.stock.add("CC(=O)O");
  w.stock.add("CN");
  w.stock.add("NCC(=O)O");
  return w;
}

std::string reaction_reply(const std::string &rsmi) {
  return "<EXPLANATION>disconnect</EXPLANATION>\n<REACTION>" + rsmi +
         "</REACTION>";
}

}  // namespace

TEST_CASE("single-step prediction grounds and renormalizes samples") {
  World w = make_world();
  Molecule product = parse_smiles("CC(=O)NC");

  SUBCASE("three of four samples agree") {
    ScriptedProposer proposer;
    for (int i = 0; i < 3; ++i) {
      proposer.push_response(reaction_reply("CC(=O)NC>>CC(=O)O.CN"));
    }
    proposer.push_response(reaction_reply("CC(=O)NC>>CC(=O)OC(C)=O.N"));

    auto preds = predict_single_step(product, proposer, w.templates, w.db, 4);
    REQUIRE(preds.size() == 2);
    CHECK(preds[0].p == 0.75);
    CHECK(preds[1].p == 0.25);
    // The exact match adopts the recorded reactants.
    std::vector<std::string> expected = {canonical_smiles("CC(=O)O"),
                                         canonical_smiles("CN")};
    std::sort(expected.begin(), expected.end());
    CHECK(preds[0].reactants == expected);
    REQUIRE(preds[0].template_id.has_value());
    CHECK(*preds[0].template_id == "amide");
  }

  SUBCASE("hallucinations for an ungroundable product leave nothing") {
    ScriptedProposer proposer;
    for (int i = 0; i < 4; ++i) {
      proposer.push_response(reaction_reply("CCO>>C.CO"));
    }
    auto preds = predict_single_step(parse_smiles("CCO"), proposer,
                                     w.templates, w.db, 4);
    CHECK(preds.empty());
  }

  SUBCASE("failed samples renormalize the survivors") {
    ScriptedProposer proposer;
    proposer.push_response(reaction_reply("CC(=O)NC>>CC(=O)O.CN"));
    proposer.push_response("no reaction block at all");
    proposer.push_response(reaction_reply("CC(=O)NC>>CC(=O)O.CN"));
    proposer.push_response("<REACTION>not smiles at all((</REACTION>");

    auto preds = predict_single_step(product, proposer, w.templates, w.db, 4);
    REQUIRE(preds.size() == 1);
    CHECK(preds[0].p == 1.0);
  }
}

namespace {

// Toy two-step world: CCCCCC splits into {CCCC, CC}; CCCC splits into
// {CC, CC}; the decoy CCCCC dead-ends. Stock holds only CC.
TablePredictor toy_two_step() {
  TablePredictor t;
  t.table["CCCCCC"] = {pred("CCCC.CC>>CCCCCC", {"CCCC", "CC"}, 0.5),
                       pred("CCCCC>>CCCCCC", {"CCCCC"}, 0.5)};
  t.table["CCCC"] = {pred("CC.CC>>CCCC", {"CC", "CC"}, 1.0)};
  return t;
}

}  // namespace

TEST_CASE("mcts solves the degenerate and toy cases") {
  SearchConfig cfg;
  cfg.algorithm = SearchAlgo::Mcts;

  SUBCASE("purchasable target needs no search") {
    TablePredictor t;
    SearchResult res = mcts_search("CC", make_stock({"CC"}), t, cfg);
    CHECK(res.solved);
    CHECK(res.route.steps.empty());
    CHECK(res.stats.iterations == 0);
  }

  SUBCASE("unique two-step solution is found across noisy seeds") {
    Stock stock = make_stock({"CC"});
    int solved = 0;
    for (unsigned seed = 0; seed < 100; ++seed) {
      TablePredictor t = toy_two_step();
      t.jitter = true;
      t.jitter_seed = seed;
      SearchResult res = mcts_search("CCCCCC", stock, t, cfg);
      if (!res.solved) continue;
      ++solved;
      REQUIRE(res.route.steps.size() == 2);
      CHECK(res.route.steps[0].product == "CCCCCC");
      CHECK(res.route.steps[1].updated_molecule_set ==
            std::vector<std::string>({"CC", "CC", "CC"}));
      CHECK(res.stats.iterations <= cfg.iteration_cap);
    }
    CHECK(solved >= 95);
  }

  SUBCASE("equal priors break ties toward the lower index") {
    TablePredictor t;
    t.table["CCCCCC"] = {pred("CC>>CCCCCC", {"CC"}, 0.5),
                         pred("CCC>>CCCCCC", {"CCC"}, 0.5)};
    SearchResult res =
        mcts_search("CCCCCC", make_stock({"CC", "CCC"}), t, cfg);
    REQUIRE(res.solved);
    REQUIRE(res.route.steps.size() == 1);
    CHECK(res.route.steps[0].reaction == "CC>>CCCCCC");
  }

  SUBCASE("dead ends leave the search unsolved") {
    TablePredictor t;
    t.table["CCCCCC"] = {pred("CCCCC>>CCCCCC", {"CCCCC"}, 1.0)};
    SearchConfig small = cfg;
    small.iteration_cap = 50;
    SearchResult res = mcts_search("CCCCCC", make_stock({"CC"}), t, small);
    CHECK(!res.solved);
    CHECK(res.route.steps.empty());
    CHECK(res.stats.iterations == 50);
  }
}

TEST_CASE("retrostar handles the arithmetic base cases") {
  SearchConfig cfg;
  cfg.algorithm = SearchAlgo::RetroStar;

  SUBCASE("purchasable target costs zero") {
    TablePredictor t;
    SearchResult res = retrostar_search("CC", make_stock({"CC"}), t, cfg);
    CHECK(res.solved);
    CHECK(res.cost == 0.0);
    CHECK(res.route.steps.empty());
  }

  SUBCASE("single reaction with p = 0.5") {
    TablePredictor t;
    t.table["CCCCCC"] = {pred("CC.CCC>>CCCCCC", {"CC", "CCC"}, 0.5)};
    SearchResult res =
        retrostar_search("CCCCCC", make_stock({"CC", "CCC"}), t, cfg);
    REQUIRE(res.solved);
    CHECK(res.cost == doctest::Approx(-std::log(0.5)).epsilon(1e-12));
    CHECK(res.route.steps.size() == 1);
  }

  SUBCASE("probability floor caps the reaction cost") {
    TablePredictor t;
    t.table["CCCCCC"] = {pred("CC>>CCCCCC", {"CC"}, 1e-9)};
    SearchResult res = retrostar_search("CCCCCC", make_stock({"CC"}), t, cfg);
    REQUIRE(res.solved);
    CHECK(res.cost == doctest::Approx(-std::log(1e-5)).epsilon(1e-12));
  }

  SUBCASE("exhausted trees report unsolved") {
    TablePredictor t;  // target has no predictions at all
    SearchResult res = retrostar_search("CCCCCC", make_stock({"CC"}), t, cfg);
    CHECK(!res.solved);
  }
}

namespace {

// Random layered AND-OR worlds with an exhaustive dynamic-programming
// oracle. Molecules are linear alkanes so canonicalization is the identity;
// reactants always come from later layers, so every world is acyclic.
struct ToyWorld {
  std::vector<std::string> molecules;  // index -> name
  Stock stock;
  TablePredictor predictor;
  std::vector<std::vector<std::pair<double, std::vector<std::size_t>>>>
      reactions;  // per molecule: (p, reactant indices)
};

ToyWorld random_world(unsigned seed) {
  std::mt19937 rng(seed);
  ToyWorld w;

  // Up to 4 layers of up to 8 molecules; index 0 is the target.
  std::vector<std::vector<std::size_t>> layers;
  std::size_t next = 0;
  std::size_t n_layers = 3 + rng() % 2;
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::size_t width = l == 0 ? 1 : 3 + rng() % 6;
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < width && next < 30; ++i) {
      layer.push_back(next++);
    }
    layers.push_back(layer);
  }
  w.molecules.resize(next);
  w.reactions.resize(next);
  for (std::size_t i = 0; i < next; ++i) {
    w.molecules[i] = std::string(i + 1, 'C');
  }

  // Stock: the whole final layer plus a sprinkle of middle molecules.
  for (std::size_t idx : layers.back()) w.stock.add(w.molecules[idx]);
  for (std::size_t l = 1; l + 1 < layers.size(); ++l) {
    for (std::size_t idx : layers[l]) {
      if (rng() % 10 < 2) w.stock.add(w.molecules[idx]);
    }
  }

  // Reactions for non-stock molecules; a few dead-end on purpose.
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    for (std::size_t idx : layers[l]) {
      if (w.stock.contains_canonical(w.molecules[idx])) continue;
      std::size_t n_rx = (l == 0) ? 1 + rng() % 3 : rng() % 4;  // 0 possible
      std::vector<std::size_t> pool;
      for (std::size_t m = l + 1; m < layers.size(); ++m) {
        pool.insert(pool.end(), layers[m].begin(), layers[m].end());
      }
      std::vector<StepPrediction> preds;
      double total = 0.0;
      std::vector<double> raw;
      for (std::size_t r = 0; r < n_rx; ++r) {
        std::size_t width = 1 + rng() % 3;
        std::vector<std::size_t> chosen;
        for (std::size_t c = 0; c < width; ++c) {
          chosen.push_back(pool[rng() % pool.size()]);
        }
        raw.push_back(0.05 + (rng() % 950) / 1000.0);
        total += raw.back();
        w.reactions[idx].push_back({0.0, chosen});
      }
      for (std::size_t r = 0; r < n_rx; ++r) {
        double p = raw[r] / total;
        w.reactions[idx][r].first = p;
        std::vector<std::string> reactants;
        std::string joined;
        for (std::size_t c : w.reactions[idx][r].second) {
          reactants.push_back(w.molecules[c]);
          if (!joined.empty()) joined += '.';
          joined += w.molecules[c];
        }
        preds.push_back(
            pred(joined + ">>" + w.molecules[idx], reactants, p));
      }
      w.predictor.table[w.molecules[idx]] = preds;
    }
  }
  return w;
}

// Exhaustive minimum route cost per molecule over the acyclic world.
double oracle_cost(const ToyWorld &w, std::size_t idx, double floor,
                   std::vector<double> &memo) {
  if (memo[idx] >= 0.0) return memo[idx];
  if (w.stock.contains_canonical(w.molecules[idx])) return memo[idx] = 0.0;
  double best = kInf;
  for (const auto &[p, reactants] : w.reactions[idx]) {
    double cost = -std::log(std::max(p, floor));
    for (std::size_t r : reactants) {
      cost += oracle_cost(w, r, floor, memo);
      if (cost >= kInf) break;
    }
    best = std::min(best, cost);
  }
  memo[idx] = best;
  return best;
}

}  // namespace

TEST_CASE("retrostar cost equals the exhaustive oracle on random worlds") {
  SearchConfig cfg;
  cfg.algorithm = SearchAlgo::RetroStar;
  cfg.iteration_cap = 5000;

  int solved_worlds = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    ToyWorld w = random_world(seed);
    std::vector<double> memo(w.molecules.size(), -1.0);
    double expected =
        oracle_cost(w, 0, cfg.probability_floor, memo);

    SearchResult res =
        retrostar_search(w.molecules[0], w.stock, w.predictor, cfg);
    if (expected == kInf) {
      CHECK(!res.solved);
    } else {
      REQUIRE(res.solved);
      CHECK(std::abs(res.cost - expected) <= 1e-9);
      ++solved_worlds;
    }
  }
  // The generator must exercise both outcomes for the check to mean much.
  CHECK(solved_worlds > 20);
  CHECK(solved_worlds < 100);
}

TEST_CASE("proposer-backed searches emit routes that re-verify") {
  World w = make_world();
  std::string target = "CC(=O)NCC(=O)NC";
  std::string target_canon = canonical_smiles(target);
  std::string mid_canon = canonical_smiles("NCC(=O)NC");

  auto scripted = [&]() {
    auto p = std::make_unique<ScriptedProposer>();
    p->add_rule(target_canon,
                reaction_reply("CC(=O)NCC(=O)NC>>CC(=O)O.NCC(=O)NC"));
    p->add_rule(mid_canon, reaction_reply("NCC(=O)NC>>NCC(=O)O.CN"));
    return p;
  };

  SearchConfig cfg;
  cfg.k = 1;

  auto verify = [&](const SearchResult &res) {
    REQUIRE(res.solved);
    REQUIRE(res.route.steps.size() == 2);
    EvaluationReport report =
        evaluate_route(res.route, w.stock, w.db, w.templates);
    CHECK(report.solved);
  };

  auto p1 = scripted();
  ProposerPredictor pred1(*p1, w.templates, w.db, cfg.k);
  SearchResult mcts = mcts_search(target, w.stock, pred1, cfg);
  verify(mcts);
  CHECK(mcts.stats.predictor_calls == 2);

  auto p2 = scripted();
  ProposerPredictor pred2(*p2, w.templates, w.db, cfg.k);
  SearchResult rstar = retrostar_search(target, w.stock, pred2, cfg);
  verify(rstar);
  // Both steps ground exactly, p = 1 each, so the route costs nothing.
  CHECK(rstar.cost == doctest::Approx(0.0));
}

TEST_CASE("searches reject unusable configs and targets") {
  TablePredictor t;
  Stock stock = make_stock({"CC"});
  SearchConfig bad;
  bad.k = 0;
  CHECK_THROWS_AS(mcts_search("CC", stock, t, bad), DependencyError);
  bad = SearchConfig{};
  bad.policy_temperature = 0.0;
  CHECK_THROWS_AS(retrostar_search("CC", stock, t, bad), DependencyError);
  CHECK_THROWS_AS(mcts_search("C1CC", stock, t, SearchConfig{}),
                  DependencyError);
}
