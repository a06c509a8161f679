// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_CLI_CLI_HPP
#define RETRO_CLI_CLI_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace retro {

// Everything needed to replay a scripted run: the resolved configuration,
// digests of every input file, and the seed. Timestamps and version are
// bookkeeping; the run itself is a function of config + inputs + seed.
struct RunManifest {
  std::string command;
  std::string version;
  unsigned seed = 0;
  nlohmann::json config;
  // (path, fnv1a-64 hex of the file bytes) per input, in flag order.
  std::vector<std::pair<std::string, std::string>> inputs;
  std::string created_utc;

  nlohmann::json to_json() const;
};

std::string file_digest(const std::string &path);

// Entry point behind the retroplan binary. `args` excludes the program
// name. Subcommands: plan, validate, search, design. Writes result JSON, a
// manifest, and command-specific artifacts into --out; prints a short text
// report to `out` and errors to `err`. Returns 0 when the command produced
// a solved/synthesizable outcome, 2 when it completed without one, 1 on
// usage or runtime errors.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

}  // namespace retro

#endif  // RETRO_CLI_CLI_HPP
