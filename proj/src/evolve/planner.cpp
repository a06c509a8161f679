// SPDX-License-Identifier: Apache-2.0

#include "retro/evolve/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>
#include <utility>

#include "json.hpp"
#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"
#include "retro/proposer/prompts.hpp"
#include "retro/rng.hpp"

namespace retro {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t count_invalid(const EvaluationReport &report) {
  std::size_t n = 0;
  for (const StepVerdict &v : report.steps) {
    if (!v.valid) ++n;
  }
  return n;
}

// One proposal request, fully determined before any worker runs: the prompt,
// the prefix the reply is spliced onto, and the provenance tag.
struct ProposalTask {
  std::string prompt;
  Route prefix;
  RouteProvenance provenance = RouteProvenance::Initialization;
};

struct TaskResult {
  std::optional<Candidate> candidate;
  bool skipped = false;
};

}  // namespace

std::size_t sample_parent(const std::vector<Candidate> &members,
                          std::mt19937 &rng) {
  std::vector<double> weights;
  weights.reserve(members.size());
  for (const Candidate &c : members) weights.push_back(std::exp(c.reward));
  return weighted_index(weights, rng);
}

Population select_survivors(std::vector<Candidate> combined,
                            std::size_t n_c) {
  std::stable_sort(combined.begin(), combined.end(),
                   [](const Candidate &a, const Candidate &b) {
                     if (a.reward != b.reward) return a.reward > b.reward;
                     if (a.invalid_steps != b.invalid_steps) {
                       return a.invalid_steps < b.invalid_steps;
                     }
                     return a.created_at < b.created_at;
                   });
  if (combined.size() > n_c) combined.resize(n_c);
  Population pop;
  pop.members = std::move(combined);
  return pop;
}

namespace {

class PlannerRun {
public:
  PlannerRun(const std::string &target, const PlannerConfig &config,
             const Stock &stock, const TemplateSet &templates,
             const ReactionDb &db, const RouteDatabase &routes,
             Proposer &proposer, const ComplexityScorer &scorer,
             std::ostream *log)
      : target_(target),
        config_(config),
        stock_(stock),
        templates_(templates),
        db_(db),
        routes_(routes),
        proposer_(proposer),
        scorer_(scorer),
        log_(log),
        rng_(config.seed),
        started_(Clock::now()) {
    max_calls_ = config.max_calls
                     ? config.max_calls
                     : config.n_c + config.budget * config.num_mutations;
  }

  PlannerResult run() {
    if (config_.n_c < 1 || !(config_.wall_clock_seconds > 0.0)) {
      throw DependencyError("planner config is unusable: n_c must be >= 1 "
                            "and the wall clock positive");
    }
    try {
      target_mol_ = parse_smiles(target_);
    } catch (const ParseError &e) {
      throw DependencyError(std::string("target does not parse: ") +
                            e.what());
    }

    // A purchasable target needs no synthesis at all.
    Candidate trivial =
        evaluate(Route{target_, {}, RouteProvenance::Initialization});
    if (trivial.report.solved) {
      result_.solved = true;
      result_.best_reward_trace.push_back(trivial.reward);
      result_.solutions.push_back(trivial);
      population_.members.push_back(std::move(trivial));
      return finish();
    }

    initialize();
    if (!result_.solved) evolve();
    return finish();
  }

private:
  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - started_).count();
  }
  bool out_of_time() const {
    return elapsed() >= config_.wall_clock_seconds;
  }

  Candidate evaluate(Route route) const {
    Candidate c;
    c.report = evaluate_route(route, stock_, db_, templates_);
    c.reward = route_reward(c.report.frontier, scorer_, stock_);
    c.invalid_steps = count_invalid(c.report);
    c.route = std::move(route);
    return c;
  }

  std::vector<std::string> references(const Molecule &probe) {
    if (routes_.size() == 0) return {};
    std::vector<ScoredRoute> picks =
        config_.sample_references
            ? routes_.sample_weighted(probe, config_.n_o, rng_)
            : routes_.retrieve_top(probe, config_.n_o);
    std::vector<std::string> blocks;
    blocks.reserve(picks.size());
    for (const ScoredRoute &p : picks) {
      blocks.push_back(serialize_route(expand_reference_route(*p.record)));
    }
    return blocks;
  }

  // First molecule in the rework set that still needs synthesis; retrieval
  // anchors on it so the references address the unsolved part.
  Molecule probe_for(const std::vector<std::string> &molecule_set) const {
    for (const std::string &s : molecule_set) {
      try {
        Molecule m = parse_smiles(s);
        if (!stock_.contains(m)) return m;
      } catch (const ParseError &) {
      }
    }
    return target_mol_;
  }

  // Runs a batch of proposal tasks on up to `parallelism` workers. Results
  // land in task order, so worker interleaving never changes the outcome.
  std::vector<TaskResult> run_batch(const std::vector<ProposalTask> &tasks) {
    std::vector<TaskResult> results(tasks.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
      for (std::size_t i = begin; i < tasks.size(); i += stride) {
        results[i] = run_task(tasks[i]);
      }
    };
    std::size_t workers = std::max<std::size_t>(1, config_.parallelism);
    workers = std::min(workers, tasks.size());
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(work, w, workers);
      }
      for (std::thread &t : pool) t.join();
    }
    result_.proposer_calls += tasks.size();
    return results;
  }

  TaskResult run_task(const ProposalTask &task) {
    TaskResult out;
    try {
      std::string reply = proposer_.propose(task.prompt);
      Route proposal = parse_route_block(reply);
      Route spliced;
      spliced.target = target_;
      spliced.provenance = task.provenance;
      spliced.steps = task.prefix.steps;
      spliced.steps.insert(spliced.steps.end(), proposal.steps.begin(),
                           proposal.steps.end());
      out.candidate = evaluate(std::move(spliced));
    } catch (const std::exception &) {
      out.skipped = true;
    }
    return out;
  }

  // Appends usable offspring in task order and collects solved ones.
  void absorb(std::vector<TaskResult> batch,
              std::vector<Candidate> &offspring) {
    for (TaskResult &r : batch) {
      if (r.skipped) {
        ++result_.skipped_proposals;
        continue;
      }
      if (!r.candidate) continue;
      r.candidate->created_at = next_id_++;
      if (r.candidate->report.solved) {
        result_.solved = true;
        result_.solutions.push_back(*r.candidate);
      }
      offspring.push_back(std::move(*r.candidate));
    }
  }

  void log_line(const char *phase) {
    if (!log_) return;
    nlohmann::json line = {
        {"phase", phase},
        {"generation", result_.generations},
        {"best_F", population_.members.empty()
                       ? nlohmann::json()
                       : nlohmann::json(population_.members.front().reward)},
        {"calls", result_.proposer_calls},
        {"solved", result_.solved},
    };
    (*log_) << line.dump() << "\n";
  }

  void push_trace() {
    result_.best_reward_trace.push_back(
        population_.members.empty()
            ? -std::numeric_limits<double>::infinity()
            : population_.members.front().reward);
  }

  void initialize() {
    std::vector<ProposalTask> tasks;
    while (tasks.size() < config_.n_c &&
           result_.proposer_calls + tasks.size() < max_calls_ &&
           !out_of_time()) {
      ProposalTask task;
      task.prompt = build_init_prompt(target_, references(target_mol_));
      task.prefix.target = target_;
      task.provenance = RouteProvenance::Initialization;
      tasks.push_back(std::move(task));
    }
    if (tasks.size() < config_.n_c) {
      if (out_of_time()) {
        result_.timed_out = true;
      } else {
        result_.budget_exhausted = true;
      }
    }

    std::vector<Candidate> members;
    absorb(run_batch(tasks), members);
    population_ = select_survivors(std::move(members), config_.n_c);
    push_trace();
    log_line("init");
  }

  void evolve() {
    for (std::size_t gen = 0; gen < config_.budget; ++gen) {
      if (out_of_time()) {
        result_.timed_out = true;
        break;
      }
      if (result_.proposer_calls >= max_calls_) {
        result_.budget_exhausted = true;
        break;
      }
      if (population_.members.empty()) {
        // Nothing parsed during initialization; no parent exists to mutate.
        result_.budget_exhausted = true;
        break;
      }

      std::vector<ProposalTask> tasks;
      while (tasks.size() < config_.num_mutations &&
             result_.proposer_calls + tasks.size() < max_calls_) {
        std::size_t parent_idx = sample_parent(population_.members, rng_);
        const Candidate &parent = population_.members[parent_idx];
        Feedback fb = render_feedback(parent.route, parent.report);

        ProposalTask task;
        task.prompt = build_mutation_prompt(
            fb.molecule_set, fb.text, references(probe_for(fb.molecule_set)));
        task.prefix.target = target_;
        task.prefix.steps.assign(
            parent.route.steps.begin(),
            parent.route.steps.begin() +
                static_cast<std::ptrdiff_t>(fb.rework_from));
        task.provenance = RouteProvenance::Mutation;
        tasks.push_back(std::move(task));
      }
      if (tasks.empty()) {
        result_.budget_exhausted = true;
        break;
      }

      std::vector<Candidate> combined = population_.members;
      absorb(run_batch(tasks), combined);
      population_ = select_survivors(std::move(combined), config_.n_c);
      population_.generation = gen + 1;
      result_.generations = gen + 1;
      push_trace();
      log_line("generation");
      if (result_.solved) break;
    }
    if (!result_.solved && result_.generations == config_.budget) {
      result_.budget_exhausted = true;
    }
  }

  PlannerResult finish() {
    result_.population = std::move(population_);
    result_.elapsed_seconds = elapsed();
    return std::move(result_);
  }

  const std::string &target_;
  const PlannerConfig &config_;
  const Stock &stock_;
  const TemplateSet &templates_;
  const ReactionDb &db_;
  const RouteDatabase &routes_;
  Proposer &proposer_;
  const ComplexityScorer &scorer_;
  std::ostream *log_;

  Molecule target_mol_;
  std::mt19937 rng_;
  Clock::time_point started_;
  std::size_t max_calls_ = 0;
  std::size_t next_id_ = 0;

  Population population_;
  PlannerResult result_;
};

}  // namespace

PlannerResult run_planner(const std::string &target,
                          const PlannerConfig &config, const Stock &stock,
                          const TemplateSet &templates, const ReactionDb &db,
                          const RouteDatabase &routes, Proposer &proposer,
                          const ComplexityScorer &scorer, std::ostream *log) {
  PlannerRun run(target, config, stock, templates, db, routes, proposer,
                 scorer, log);
  return run.run();
}

}  // namespace retro
