// SPDX-License-Identifier: Apache-2.0

#ifndef RETRO_PROPOSER_PROMPTS_HPP
#define RETRO_PROPOSER_PROMPTS_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "retro/route/route.hpp"

namespace retro {

// Evaluation outcome rendered for the mutation prompt. `rework_from` is the
// index of the first step that must be regenerated; it equals steps.size()
// when every step is valid but leaves remain unpurchasable, meaning the
// route should be extended rather than repaired.
struct Feedback {
  std::size_t rework_from = 0;
  std::vector<std::string> molecule_set;  // starting set for the rework
  std::string text;
};

Feedback render_feedback(const Route &route, const EvaluationReport &report);

// Prompt builders are pure string functions: same inputs, same bytes.

// Full-route request for a single target. Reference blocks are pre-rendered
// <ROUTE> texts (see serialize_route); an empty list omits the reference
// section entirely.
std::string build_init_prompt(const std::string &target,
                              const std::vector<std::string> &reference_blocks);

// Route request for an intermediate molecule set plus evaluator feedback.
std::string build_mutation_prompt(
    const std::vector<std::string> &molecule_set, const std::string &feedback,
    const std::vector<std::string> &reference_blocks);

// One backward reaction for a product, answered in a <REACTION> block.
std::string build_single_step_prompt(const std::string &product);

// Property-improvement request over two scored exemplars, answered in an
// <EXPLANATION> + <MOLECULE> pair.
std::string build_designer_prompt(const std::string &smiles1, double score1,
                                  const std::string &smiles2, double score2,
                                  const std::string &oracle_name,
                                  const std::string &oracle_description);

// Content of the first <TAG>...</TAG> region, trimmed; nullopt when the pair
// is absent or unclosed.
std::optional<std::string> extract_tagged_block(std::string_view text,
                                                std::string_view tag);

// "[A, B, C]" rendering shared by the prompts and the feedback text.
std::string render_molecule_list(const std::vector<std::string> &smiles);

}  // namespace retro

#endif  // RETRO_PROPOSER_PROMPTS_HPP
