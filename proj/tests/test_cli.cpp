// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "retro/cli/cli.hpp"
#include "retro/hash.hpp"

using namespace retro;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string &name) {
  return std::string(RETRO_FIXTURE_DIR) + "/cli/" + name;
}

// Fresh artifact directory per test case.
std::string out_dir(const std::string &name) {
  fs::path dir = fs::temp_directory_path() / ("retro_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

nlohmann::json read_json(const fs::path &path) {
  return nlohmann::json::parse(slurp(path));
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun result;
  result.code = run_cli(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::vector<std::string> world_args() {
  return {"--stock",        fixture("stock.smi"),
          "--templates",    fixture("templates.jsonl"),
          "--reactions-db", fixture("reactions.jsonl")};
}

std::vector<std::string> plan_args(const std::string &script,
                                   const std::string &dir,
                                   const std::string &budget = "1") {
  std::vector<std::string> args = {"plan", "--target", "CC(=O)NCC(=O)NC"};
  std::vector<std::string> world = world_args();
  args.insert(args.end(), world.begin(), world.end());
  args.insert(args.end(), {"--routes-db", fixture("routes.jsonl"),
                           "--script", script, "--population", "1",
                           "--budget", budget, "--seed", "3", "--out", dir});
  return args;
}

}  // namespace

TEST_CASE("plan solves the toy fixture bundle and its artifact revalidates") {
  std::string dir = out_dir("plan");
  CliRun plan = run(plan_args(fixture("script_plan.json"), dir));
  CHECK(plan.code == 0);
  CHECK(plan.out.find("solved: yes") != std::string::npos);
  CHECK(plan.err.empty());

  nlohmann::json result = read_json(fs::path(dir) / "result.json");
  CHECK(result["command"] == "plan");
  CHECK(result["solved"] == true);
  REQUIRE(result["route"].is_object());
  CHECK(result["route"]["steps"].size() == 2);
  CHECK(result["stats"]["proposer_calls"] == 1);

  // Artifacts: manifest with digests for every input, plus a run log.
  nlohmann::json manifest = read_json(fs::path(dir) / "manifest.json");
  CHECK(manifest["command"] == "plan");
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["inputs"].size() == 5);
  for (const auto &input : manifest["inputs"]) {
    CHECK(input["fnv1a64"] == file_digest(input["path"].get<std::string>()));
  }
  CHECK(fs::exists(fs::path(dir) / "run_log.jsonl"));

  // The emitted route re-validates with identical verdicts.
  std::string vdir = out_dir("plan_validate");
  std::vector<std::string> vargs = {"validate", "--route",
                                    (fs::path(dir) / "result.json").string()};
  std::vector<std::string> world = world_args();
  vargs.insert(vargs.end(), world.begin(), world.end());
  vargs.insert(vargs.end(), {"--out", vdir});
  CliRun validate = run(vargs);
  CHECK(validate.code == 0);
  nlohmann::json revalidated = read_json(fs::path(vdir) / "result.json");
  CHECK(revalidated["report"] == result["report"]);
  CHECK(revalidated["route"] == result["route"]);
}

TEST_CASE("plan is reproducible from the manifest inputs") {
  std::string first_dir = out_dir("repro_a");
  std::string second_dir = out_dir("repro_b");
  CHECK(run(plan_args(fixture("script_plan.json"), first_dir)).code == 0);
  CHECK(run(plan_args(fixture("script_plan.json"), second_dir)).code == 0);

  CHECK(slurp(fs::path(first_dir) / "result.json") ==
        slurp(fs::path(second_dir) / "result.json"));

  // Manifests agree on everything except the timestamp.
  nlohmann::json first = read_json(fs::path(first_dir) / "manifest.json");
  nlohmann::json second = read_json(fs::path(second_dir) / "manifest.json");
  first.erase("created_utc");
  second.erase("created_utc");
  CHECK(first == second);
}

TEST_CASE("plan reports failure modes with the documented exit codes") {
  SUBCASE("missing required flag is a usage error") {
    CliRun result = run({"plan", "--target", "CCO"});
    CHECK(result.code == 1);
    CHECK(result.err.find("--stock") != std::string::npos);
  }

  SUBCASE("unsolved run exits 2") {
    std::string dir = out_dir("plan_unsolved");
    CliRun result = run(plan_args(fixture("script_noroute.json"), dir, "0"));
    CHECK(result.code == 2);
    CHECK(result.out.find("solved: no") != std::string::npos);
    nlohmann::json artifact = read_json(fs::path(dir) / "result.json");
    CHECK(artifact["solved"] == false);
    CHECK(artifact["route"].is_null());
  }

  SUBCASE("unreadable input is a runtime error") {
    std::string dir = out_dir("plan_badinput");
    std::vector<std::string> args = plan_args("/nonexistent/script.json", dir);
    CliRun result = run(args);
    CHECK(result.code == 1);
    CHECK(result.err.find("error:") != std::string::npos);
  }
}

TEST_CASE("validate prints an all pass verdict table for a solved route") {
  std::string dir = out_dir("validate");
  std::vector<std::string> args = {"validate", "--route",
                                   fixture("route_solved.json")};
  std::vector<std::string> world = world_args();
  args.insert(args.end(), world.begin(), world.end());
  args.insert(args.end(), {"--out", dir});

  CliRun result = run(args);
  CHECK(result.code == 0);
  CHECK(result.out.find("solved: yes") != std::string::npos);
  CHECK(result.out.find("FAIL") == std::string::npos);

  nlohmann::json artifact = read_json(fs::path(dir) / "result.json");
  CHECK(artifact["report"]["solved"] == true);
  CHECK(artifact["report"]["first_invalid_step"].is_null());
  for (const auto &step : artifact["report"]["steps"]) {
    CHECK(step["valid"] == true);
  }
}

TEST_CASE("search solves the two step world with both algorithms") {
  for (const std::string algo : {"retrostar", "mcts"}) {
    std::string dir = out_dir("search_" + algo);
    std::vector<std::string> args = {"search", "--target", "CC(=O)NCC(=O)NC",
                                     "--algo", algo};
    std::vector<std::string> world = world_args();
    args.insert(args.end(), world.begin(), world.end());
    args.insert(args.end(), {"--script", fixture("script_search.json"),
                             "--k", "1", "--out", dir});

    CliRun result = run(args);
    CHECK(result.code == 0);
    nlohmann::json artifact = read_json(fs::path(dir) / "result.json");
    CHECK(artifact["solved"] == true);
    CHECK(artifact["route"]["steps"].size() == 2);
    CHECK(artifact["report"]["solved"] == true);
    if (algo == "retrostar") {
      // Scripted single-candidate proposals give p = 1, so the optimal
      // cost is exactly -log(1) per step.
      CHECK(artifact["cost"].get<double>() == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("design finds the coupling product and archives the run") {
  std::string dir = out_dir("design");
  std::vector<std::string> args = {"design", "--oracle", "isomers:C3H7NO"};
  std::vector<std::string> world = world_args();
  args.insert(args.end(), world.begin(), world.end());
  args.insert(args.end(),
              {"--routes-db", fixture("routes.jsonl"), "--script",
               fixture("script_design.json"), "--population", "2",
               "--generations", "1", "--oracle-budget", "4",
               "--planner-population", "1", "--planner-budget", "0",
               "--out", dir});

  CliRun result = run(args);
  CHECK(result.code == 0);
  CHECK(result.out.find("top-1:") != std::string::npos);

  nlohmann::json artifact = read_json(fs::path(dir) / "result.json");
  CHECK(artifact["top"]["score"].get<double>() == doctest::Approx(1.0));
  CHECK(artifact["top"]["synthesizable"] == true);
  CHECK(artifact["top"]["route"]["steps"].size() == 1);
  CHECK(artifact["stats"]["oracle_calls"] == 3);

  // Archive: one JSON line per entry, seeds first.
  std::istringstream archive(slurp(fs::path(dir) / "archive.jsonl"));
  std::string line;
  std::size_t rows = 0;
  while (std::getline(archive, line)) {
    nlohmann::json row = nlohmann::json::parse(line);
    CHECK(row.contains("molecule"));
    CHECK(row.contains("score"));
    ++rows;
  }
  CHECK(rows == artifact["stats"]["archive_size"].get<std::size_t>());
}

TEST_CASE("cli surface rejects bad invocations") {
  SUBCASE("help exits 0") {
    CliRun result = run({"--help"});
    CHECK(result.code == 0);
    CHECK(result.out.find("Subcommands") != std::string::npos);
  }

  SUBCASE("unknown algo value") {
    std::vector<std::string> args = {"search", "--target", "CCO", "--algo",
                                     "dfs"};
    std::vector<std::string> world = world_args();
    args.insert(args.end(), world.begin(), world.end());
    CHECK(run(args).code == 1);
  }

  SUBCASE("unknown oracle spec") {
    std::string dir = out_dir("bad_oracle");
    std::vector<std::string> args = {"design", "--oracle", "docking:1abc"};
    std::vector<std::string> world = world_args();
    args.insert(args.end(), world.begin(), world.end());
    args.insert(args.end(), {"--script", fixture("script_design.json"),
                             "--out", dir});
    CliRun result = run(args);
    CHECK(result.code == 1);
    CHECK(result.err.find("oracle") != std::string::npos);
  }

  SUBCASE("http proposer without an endpoint") {
    unsetenv("LLM_ENDPOINT");
    std::string dir = out_dir("no_endpoint");
    std::vector<std::string> args = plan_args(fixture("script_plan.json"),
                                              dir);
    args.insert(args.end(), {"--proposer", "http"});
    CliRun result = run(args);
    CHECK(result.code == 1);
    CHECK(result.err.find("LLM_ENDPOINT") != std::string::npos);
  }
}

TEST_CASE("file digests are stable fnv1a over the bytes") {
  fs::path path = fs::temp_directory_path() / "retro_cli_digest.txt";
  std::ofstream(path) << "digest me";
  CHECK(file_digest(path.string()) == hex64(fnv1a("digest me")));
  CHECK_THROWS(file_digest("/nonexistent/file"));
}
