// SPDX-License-Identifier: Apache-2.0

#include "retro/route/route_json.hpp"

#include "retro/errors.hpp"

namespace retro {

namespace {

std::vector<std::string> string_list(const nlohmann::json &step,
                                     const char *key) {
  if (!step.contains(key)) return {};
  std::vector<std::string> out;
  for (const auto &item : step[key]) out.push_back(item.get<std::string>());
  return out;
}

}  // namespace

nlohmann::json route_to_json(const Route &route) {
  nlohmann::json steps = nlohmann::json::array();
  for (const RouteStep &step : route.steps) {
    steps.push_back({{"molecule_set", step.molecule_set},
                     {"rational", step.rational},
                     {"product", step.product},
                     {"reaction", step.reaction},
                     {"reactants", step.reactants},
                     {"updated_molecule_set", step.updated_molecule_set}});
  }
  return {{"target", route.target}, {"steps", steps}};
}

Route route_from_json(const nlohmann::json &j) {
  if (!j.is_object() || !j.contains("steps") || !j["steps"].is_array()) {
    throw Error("route JSON needs a 'steps' array");
  }
  Route route;
  route.target = j.value("target", "");
  std::size_t index = 0;
  for (const nlohmann::json &row : j["steps"]) {
    ++index;
    RouteStep step;
    if (!row.contains("product")) throw StepSchemaError(index, "product");
    if (!row.contains("reaction")) throw StepSchemaError(index, "reaction");
    step.product = row["product"].get<std::string>();
    step.reaction = row["reaction"].get<std::string>();
    step.rational = row.value("rational", "");
    step.molecule_set = string_list(row, "molecule_set");
    step.reactants = string_list(row, "reactants");
    step.updated_molecule_set = string_list(row, "updated_molecule_set");
    route.steps.push_back(std::move(step));
  }
  if (route.target.empty() && !route.steps.empty() &&
      !route.steps.front().molecule_set.empty()) {
    route.target = route.steps.front().molecule_set.front();
  }
  return route;
}

nlohmann::json report_to_json(const EvaluationReport &report) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepVerdict &v : report.steps) {
    steps.push_back({{"molecules_valid", v.molecules_valid},
                     {"available", v.available},
                     {"reaction_exists", v.reaction_exists},
                     {"reaction_valid", v.reaction_valid},
                     {"grounded_reaction", v.grounded_reaction},
                     {"chain_ok", v.chain_ok},
                     {"product_in_set", v.product_in_set},
                     {"update_consistent", v.update_consistent},
                     {"connected", v.connected},
                     {"valid", v.valid}});
  }
  nlohmann::json out = {{"solved", report.solved},
                        {"frontier", report.frontier},
                        {"steps", steps},
                        {"first_invalid_step", nullptr}};
  if (report.first_invalid_step) {
    out["first_invalid_step"] = *report.first_invalid_step + 1;
  }
  return out;
}

}  // namespace retro
