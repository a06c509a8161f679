// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_ROUTE_ROUTE_JSON_HPP
#define RETRO_ROUTE_ROUTE_JSON_HPP

#include "json.hpp"
#include "retro/route/route.hpp"

namespace retro {

// {"target": ..., "steps": [{"molecule_set": [...], "rational": ...,
//  "product": ..., "reaction": ..., "reactants": [...],
//  "updated_molecule_set": [...]}]}
nlohmann::json route_to_json(const Route &route);

// Inverse of route_to_json, lenient about optional fields: a step needs
// product and reaction, the list fields default to empty, and a missing
// target falls back to the first step's molecule set. Throws
// StepSchemaError on a missing required field, Error on a malformed shape.
Route route_from_json(const nlohmann::json &j);

// Verdict report with one object per step plus solved flag, frontier, and
// the 1-based first invalid step (null when every step passes).
nlohmann::json report_to_json(const EvaluationReport &report);

}  // namespace retro

#endif  // RETRO_ROUTE_ROUTE_JSON_HPP
