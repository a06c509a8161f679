// SPDX-License-Identifier: Apache-2.0

#include "retro/cli/cli.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "retro/chem/formula.hpp"
#include "retro/design/design.hpp"
#include "retro/errors.hpp"
#include "retro/evolve/planner.hpp"
#include "retro/hash.hpp"
#include "retro/proposer/proposer.hpp"
#include "retro/proposer/route_db.hpp"
#include "retro/route/route.hpp"
#include "retro/route/route_json.hpp"
#include "retro/search/search.hpp"
#include "retro/stock.hpp"
#include "retro/templ/reaction_db.hpp"

#ifndef RETRO_VERSION
#define RETRO_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace retro {

namespace {

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string env_or(const char *name, const std::string &fallback) {
  const char *value = std::getenv(name);
  return value ? value : fallback;
}

void write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

// Input files shared by the world-building commands. Routes are optional;
// an empty database simply yields reference-free prompts.
struct WorldOpts {
  std::string stock_path;
  std::string templates_path;
  std::string reactions_path;
  std::string routes_path;
};

struct World {
  Stock stock;
  TemplateSet templates;
  ReactionDb db;
  RouteDatabase routes;
};

World load_world(const WorldOpts &opts) {
  World w;
  w.stock = load_stock(opts.stock_path);
  w.templates = TemplateSet::load_jsonl(opts.templates_path);
  w.db = ReactionDb::load_jsonl(opts.reactions_path);
  if (!opts.routes_path.empty()) {
    w.routes = RouteDatabase::load_jsonl(opts.routes_path);
  }
  return w;
}

void add_world_options(CLI::App *cmd, WorldOpts &opts, bool with_routes) {
  cmd->add_option("--stock", opts.stock_path, "purchasable molecules (.smi)")
      ->required();
  cmd->add_option("--templates", opts.templates_path,
                  "reaction templates (JSONL)")
      ->required();
  cmd->add_option("--reactions-db", opts.reactions_path,
                  "reference reactions (JSONL)")
      ->required();
  if (with_routes) {
    cmd->add_option("--routes-db", opts.routes_path,
                    "reference routes (JSONL, optional)");
  }
}

struct ProposerOpts {
  std::string kind = "scripted";
  std::string script_path;
  std::string endpoint;
  std::string api_key;
  std::string model = "default";
  double temperature = 0.7;
};

void add_proposer_options(CLI::App *cmd, ProposerOpts &opts) {
  cmd->add_option("--proposer", opts.kind, "proposal backend")
      ->check(CLI::IsMember({"scripted", "http"}));
  cmd->add_option("--script", opts.script_path,
                  "scripted responses (JSON, for --proposer scripted)");
  cmd->add_option("--endpoint", opts.endpoint,
                  "completion endpoint (default env LLM_ENDPOINT)");
  cmd->add_option("--api-key", opts.api_key,
                  "bearer token (default env LLM_API_KEY)");
  cmd->add_option("--model", opts.model, "model name");
  cmd->add_option("--temperature", opts.temperature, "sampling temperature");
}

// Script file: {"rules": [{"contains", "response"}], "responses": [...]},
// or a bare array shorthand for just the response queue.
std::unique_ptr<Proposer> make_proposer(const ProposerOpts &opts) {
  if (opts.kind == "scripted") {
    if (opts.script_path.empty()) {
      throw DependencyError("scripted proposer needs --script");
    }
    std::ifstream in(opts.script_path);
    if (!in) throw IoError("cannot open script: " + opts.script_path);
    nlohmann::json doc = nlohmann::json::parse(in);
    auto proposer = std::make_unique<ScriptedProposer>();
    const nlohmann::json &responses =
        doc.is_array() ? doc : doc.value("responses", nlohmann::json::array());
    if (doc.is_object()) {
      for (const auto &rule : doc.value("rules", nlohmann::json::array())) {
        proposer->add_rule(rule.at("contains").get<std::string>(),
                           rule.at("response").get<std::string>());
      }
    }
    for (const auto &response : responses) {
      proposer->push_response(response.get<std::string>());
    }
    return proposer;
  }

  ProposerConfig config;
  config.endpoint = opts.endpoint.empty() ? env_or("LLM_ENDPOINT", "")
                                          : opts.endpoint;
  config.api_key =
      opts.api_key.empty() ? env_or("LLM_API_KEY", "") : opts.api_key;
  config.model = opts.model;
  config.temperature = opts.temperature;
  if (config.endpoint.empty()) {
    throw DependencyError("http proposer needs --endpoint or LLM_ENDPOINT");
  }
  return std::make_unique<HttpProposer>(config);
}

void add_manifest_input(RunManifest &manifest, const std::string &path) {
  if (!path.empty()) manifest.inputs.emplace_back(path, file_digest(path));
}

void write_run_artifacts(const fs::path &out_dir, const RunManifest &manifest,
                         const nlohmann::json &result) {
  fs::create_directories(out_dir);
  write_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  write_file(out_dir / "result.json", result.dump(2) + "\n");
}

RunManifest make_manifest(const std::string &command, unsigned seed,
                          nlohmann::json config) {
  RunManifest manifest;
  manifest.command = command;
  manifest.version = RETRO_VERSION;
  manifest.seed = seed;
  manifest.config = std::move(config);
  manifest.created_utc = utc_now();
  return manifest;
}

void print_route(std::ostream &out, const Route &route) {
  out << "route:\n";
  for (std::size_t i = 0; i < route.steps.size(); ++i) {
    const RouteStep &step = route.steps[i];
    out << "  " << i + 1 << ". " << step.product << " >>";
    for (const std::string &r : step.reactants) out << " " << r;
    out << "\n";
  }
}

// ---- plan ----------------------------------------------------------------

struct PlanOpts {
  std::string target;
  WorldOpts world;
  ProposerOpts proposer;
  PlannerConfig planner;
  bool top_refs = false;
  std::string out_dir = ".";
};

int cmd_plan(const PlanOpts &opts, std::ostream &out) {
  World w = load_world(opts.world);
  std::unique_ptr<Proposer> proposer = make_proposer(opts.proposer);
  PlannerConfig config = opts.planner;
  config.sample_references = !opts.top_refs;
  HeuristicScScore scorer;

  nlohmann::json snapshot = {
      {"target", opts.target},           {"n_c", config.n_c},
      {"n_o", config.n_o},               {"num_mutations", config.num_mutations},
      {"budget", config.budget},         {"max_calls", config.max_calls},
      {"time_limit", config.wall_clock_seconds},
      {"parallelism", config.parallelism},
      {"sample_references", config.sample_references},
      {"proposer", opts.proposer.kind}};
  RunManifest manifest = make_manifest("plan", config.seed, snapshot);
  add_manifest_input(manifest, opts.world.stock_path);
  add_manifest_input(manifest, opts.world.templates_path);
  add_manifest_input(manifest, opts.world.reactions_path);
  add_manifest_input(manifest, opts.world.routes_path);
  add_manifest_input(manifest, opts.proposer.script_path);

  fs::create_directories(opts.out_dir);
  std::ofstream log(fs::path(opts.out_dir) / "run_log.jsonl");
  PlannerResult result =
      run_planner(opts.target, config, w.stock, w.templates, w.db, w.routes,
                  *proposer, scorer, &log);

  nlohmann::json artifact = {
      {"command", "plan"},
      {"target", opts.target},
      {"solved", result.solved},
      {"seed", config.seed},
      {"route", nullptr},
      {"report", nullptr},
      // Timing is reported on the console only, so the artifact is a pure
      // function of config + inputs + seed.
      {"stats",
       {{"proposer_calls", result.proposer_calls},
        {"skipped_proposals", result.skipped_proposals},
        {"generations", result.generations},
        {"best_reward_trace", result.best_reward_trace},
        {"budget_exhausted", result.budget_exhausted},
        {"timed_out", result.timed_out}}}};

  const Candidate *best = nullptr;
  if (result.solved) {
    best = &result.solutions.front();
  } else if (!result.population.members.empty()) {
    best = &result.population.members.front();
  }
  if (best) {
    artifact["route"] = route_to_json(best->route);
    artifact["report"] = report_to_json(best->report);
  }
  write_run_artifacts(opts.out_dir, manifest, artifact);

  out << "plan " << opts.target << "\n"
      << "solved: " << (result.solved ? "yes" : "no") << "\n"
      << "proposer calls: " << result.proposer_calls << " (skipped "
      << result.skipped_proposals << ")\n"
      << "generations: " << result.generations << ", elapsed "
      << result.elapsed_seconds << " s\n";
  if (!result.solved) {
    if (result.timed_out) out << "stopped: time limit\n";
    else if (result.budget_exhausted) out << "stopped: budget\n";
  }
  if (best) print_route(out, best->route);
  return result.solved ? 0 : 2;
}

// ---- validate --------------------------------------------------------------

struct ValidateOpts {
  std::string route_path;
  WorldOpts world;
  std::string out_dir = ".";
};

int cmd_validate(const ValidateOpts &opts, std::ostream &out) {
  World w = load_world(opts.world);

  std::ifstream in(opts.route_path);
  if (!in) throw IoError("cannot open route file: " + opts.route_path);
  nlohmann::json doc = nlohmann::json::parse(in);
  // Accept both a bare route object and a plan/search result wrapper.
  if (doc.contains("route") && doc["route"].is_object()) doc = doc["route"];
  Route route = route_from_json(doc);

  EvaluationReport report = evaluate_route(route, w.stock, w.db, w.templates);

  RunManifest manifest =
      make_manifest("validate", 0, {{"route", opts.route_path}});
  add_manifest_input(manifest, opts.route_path);
  add_manifest_input(manifest, opts.world.stock_path);
  add_manifest_input(manifest, opts.world.templates_path);
  add_manifest_input(manifest, opts.world.reactions_path);

  nlohmann::json artifact = {{"command", "validate"},
                             {"target", route.target},
                             {"solved", report.solved},
                             {"route", route_to_json(route)},
                             {"report", report_to_json(report)}};
  write_run_artifacts(opts.out_dir, manifest, artifact);

  out << "validate " << route.target << "\n";
  out << "step  molecules  reaction  connected  valid\n";
  for (std::size_t i = 0; i < report.steps.size(); ++i) {
    const StepVerdict &v = report.steps[i];
    auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
    out << "  " << i + 1 << "   " << flag(v.molecules_valid) << "  "
        << flag(v.reaction_valid) << "  " << flag(v.connected) << "  "
        << flag(v.valid) << "\n";
  }
  out << "solved: " << (report.solved ? "yes" : "no") << "\n";
  if (!report.solved && !report.frontier.empty()) {
    out << "frontier:";
    for (const std::string &m : report.frontier) out << " " << m;
    out << "\n";
  }
  return report.solved ? 0 : 2;
}

// ---- search ----------------------------------------------------------------

struct SearchOpts {
  std::string target;
  std::string algo = "retrostar";
  WorldOpts world;
  ProposerOpts proposer;
  SearchConfig config;
  std::string out_dir = ".";
};

int cmd_search(const SearchOpts &opts, std::ostream &out) {
  World w = load_world(opts.world);
  std::unique_ptr<Proposer> proposer = make_proposer(opts.proposer);
  SearchConfig config = opts.config;
  config.algorithm =
      opts.algo == "mcts" ? SearchAlgo::Mcts : SearchAlgo::RetroStar;

  ProposerPredictor predictor(*proposer, w.templates, w.db, config.k);
  SearchResult result =
      config.algorithm == SearchAlgo::Mcts
          ? mcts_search(opts.target, w.stock, predictor, config)
          : retrostar_search(opts.target, w.stock, predictor, config);

  nlohmann::json snapshot = {{"target", opts.target},
                             {"algo", opts.algo},
                             {"iterations", config.iteration_cap},
                             {"k", config.k},
                             {"max_depth", config.max_depth},
                             {"proposer", opts.proposer.kind}};
  RunManifest manifest = make_manifest("search", 0, snapshot);
  add_manifest_input(manifest, opts.world.stock_path);
  add_manifest_input(manifest, opts.world.templates_path);
  add_manifest_input(manifest, opts.world.reactions_path);
  add_manifest_input(manifest, opts.proposer.script_path);

  nlohmann::json artifact = {
      {"command", "search"},
      {"target", opts.target},
      {"algo", opts.algo},
      {"solved", result.solved},
      {"cost", result.cost},
      {"route", nullptr},
      {"report", nullptr},
      {"stats",
       {{"iterations", result.stats.iterations},
        {"expansions", result.stats.expansions},
        {"predictor_calls", result.stats.predictor_calls},
        {"nodes", result.stats.nodes}}}};
  if (result.solved) {
    artifact["route"] = route_to_json(result.route);
    artifact["report"] = report_to_json(
        evaluate_route(result.route, w.stock, w.db, w.templates));
  }
  write_run_artifacts(opts.out_dir, manifest, artifact);

  out << "search " << opts.target << " (" << opts.algo << ")\n"
      << "solved: " << (result.solved ? "yes" : "no") << "\n"
      << "iterations: " << result.stats.iterations
      << ", expansions: " << result.stats.expansions
      << ", predictor calls: " << result.stats.predictor_calls << "\n";
  if (result.solved) {
    out << "cost: " << result.cost << "\n";
    print_route(out, result.route);
  }
  return result.solved ? 0 : 2;
}

// ---- design ----------------------------------------------------------------

struct DesignOpts {
  std::string oracle_spec;
  WorldOpts world;
  ProposerOpts proposer;
  DesignConfig config;
  bool plan_final_only = false;
  std::string out_dir = ".";
};

// "isomers:<Hill formula>", e.g. isomers:C9H10N2O2PF2Cl.
std::unique_ptr<Oracle> make_oracle(const std::string &spec) {
  std::size_t colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  if (kind != "isomers" || colon == std::string::npos) {
    throw DependencyError("unknown oracle spec: " + spec);
  }
  return std::make_unique<IsomersOracle>(
      ElementCounts::parse(spec.substr(colon + 1)));
}

int cmd_design(const DesignOpts &opts, std::ostream &out) {
  World w = load_world(opts.world);
  std::unique_ptr<Proposer> proposer = make_proposer(opts.proposer);
  std::unique_ptr<Oracle> oracle = make_oracle(opts.oracle_spec);
  DesignConfig config = opts.config;
  config.plan_each_round = !opts.plan_final_only;

  nlohmann::json snapshot = {{"oracle", opts.oracle_spec},
                             {"population", config.population},
                             {"generations", config.generations},
                             {"oracle_budget", config.oracle_budget},
                             {"sc_threshold", config.sc_threshold},
                             {"plan_each_round", config.plan_each_round},
                             {"proposer", opts.proposer.kind}};
  RunManifest manifest = make_manifest("design", config.seed, snapshot);
  add_manifest_input(manifest, opts.world.stock_path);
  add_manifest_input(manifest, opts.world.templates_path);
  add_manifest_input(manifest, opts.world.reactions_path);
  add_manifest_input(manifest, opts.world.routes_path);
  add_manifest_input(manifest, opts.proposer.script_path);

  DesignResult result = run_designer(config, w.stock, w.templates, w.db,
                                     w.routes, *proposer, *oracle);

  fs::create_directories(opts.out_dir);
  std::ofstream archive(fs::path(opts.out_dir) / "archive.jsonl");
  write_archive(result.archive, archive);

  const DesignEntry &top = result.top();
  nlohmann::json top_json = {{"molecule", top.smiles},
                             {"score", top.score},
                             {"round", top.round},
                             {"synthesizable", top.synthesizable},
                             {"route", nullptr}};
  if (top.route) top_json["route"] = route_to_json(*top.route);
  nlohmann::json artifact = {{"command", "design"},
                             {"oracle", oracle->name()},
                             {"top", top_json},
                             {"seed", config.seed},
                             {"stats",
                              {{"oracle_calls", result.oracle_calls},
                               {"designer_calls", result.designer_calls},
                               {"planner_calls", result.planner_calls},
                               {"skipped_rounds", result.skipped_rounds},
                               {"archive_size", result.archive.size()}}}};
  write_run_artifacts(opts.out_dir, manifest, artifact);

  out << "design " << oracle->name() << "\n"
      << "top-1: " << top.smiles << " score " << top.score
      << " synthesizable: " << (top.synthesizable ? "yes" : "no") << "\n"
      << "oracle calls: " << result.oracle_calls << ", archive "
      << result.archive.size() << " entries\n";
  if (top.route && !top.route->steps.empty()) print_route(out, *top.route);
  return top.synthesizable ? 0 : 2;
}

}  // namespace

std::string file_digest(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input for digest: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex64(fnv1a(buf.str()));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs_json = nlohmann::json::array();
  for (const auto &[path, digest] : inputs) {
    inputs_json.push_back({{"path", path}, {"fnv1a64", digest}});
  }
  return {{"command", command}, {"version", version},
          {"seed", seed},       {"config", config},
          {"inputs", inputs_json}, {"created_utc", created_utc}};
}

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  CLI::App app{"retrosynthesis planning toolkit", "retroplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RETRO_VERSION);

  PlanOpts plan_opts;
  CLI::App *plan = app.add_subcommand("plan", "evolve a route for a target");
  plan->add_option("--target", plan_opts.target, "target SMILES")->required();
  add_world_options(plan, plan_opts.world, true);
  add_proposer_options(plan, plan_opts.proposer);
  plan->add_option("--population", plan_opts.planner.n_c, "population size");
  plan->add_option("--mutations", plan_opts.planner.num_mutations,
                   "offspring per generation");
  plan->add_option("--refs", plan_opts.planner.n_o,
                   "reference routes per prompt");
  plan->add_option("--budget", plan_opts.planner.budget,
                   "mutation generations");
  plan->add_option("--max-calls", plan_opts.planner.max_calls,
                   "proposer call ceiling (0 derives it)");
  plan->add_option("--time-limit", plan_opts.planner.wall_clock_seconds,
                   "wall clock limit in seconds");
  plan->add_option("--parallelism", plan_opts.planner.parallelism,
                   "proposal workers");
  plan->add_option("--seed", plan_opts.planner.seed, "random seed");
  plan->add_flag("--top-refs", plan_opts.top_refs,
                 "rank references instead of sampling them");
  plan->add_option("--out", plan_opts.out_dir, "artifact directory");

  ValidateOpts validate_opts;
  CLI::App *validate =
      app.add_subcommand("validate", "re-check a route artifact");
  validate->add_option("--route", validate_opts.route_path,
                       "route JSON (bare or a plan/search result)")
      ->required();
  add_world_options(validate, validate_opts.world, false);
  validate->add_option("--out", validate_opts.out_dir, "artifact directory");

  SearchOpts search_opts;
  CLI::App *search =
      app.add_subcommand("search", "tree search with single-step proposals");
  search->add_option("--target", search_opts.target, "target SMILES")
      ->required();
  search->add_option("--algo", search_opts.algo, "search algorithm")
      ->check(CLI::IsMember({"mcts", "retrostar"}));
  add_world_options(search, search_opts.world, false);
  add_proposer_options(search, search_opts.proposer);
  search->add_option("--iterations", search_opts.config.iteration_cap,
                     "iteration cap");
  search->add_option("--k", search_opts.config.k,
                     "proposals per expansion");
  search->add_option("--max-depth", search_opts.config.max_depth,
                     "depth cap");
  search->add_option("--out", search_opts.out_dir, "artifact directory");

  DesignOpts design_opts;
  CLI::App *design =
      app.add_subcommand("design", "evolve molecules against an oracle");
  design->add_option("--oracle", design_opts.oracle_spec,
                     "oracle spec, e.g. isomers:C9H10N2O2PF2Cl")
      ->required();
  add_world_options(design, design_opts.world, true);
  add_proposer_options(design, design_opts.proposer);
  design->add_option("--population", design_opts.config.population,
                     "seed population size");
  design->add_option("--generations", design_opts.config.generations,
                     "proposal rounds");
  design->add_option("--oracle-budget", design_opts.config.oracle_budget,
                     "oracle evaluation budget");
  design->add_option("--sc-threshold", design_opts.config.sc_threshold,
                     "complexity filter threshold");
  design->add_flag("--plan-final-only", design_opts.plan_final_only,
                   "plan synthesis only for the final winner");
  design->add_option("--planner-population", design_opts.config.planner.n_c,
                     "planner population for synthesis checks");
  design->add_option("--planner-budget", design_opts.config.planner.budget,
                     "planner generations for synthesis checks");
  design->add_option("--planner-mutations",
                     design_opts.config.planner.num_mutations,
                     "planner offspring per generation");
  design->add_option("--seed", design_opts.config.seed, "random seed");
  design->add_option("--out", design_opts.out_dir, "artifact directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    // Normalize CLI11's exit-code zoo: help stays 0, usage errors are 1.
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (plan->parsed()) return cmd_plan(plan_opts, out);
    if (validate->parsed()) return cmd_validate(validate_opts, out);
    if (search->parsed()) return cmd_search(search_opts, out);
    if (design->parsed()) return cmd_design(design_opts, out);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace retro
