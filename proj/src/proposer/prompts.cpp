// SPDX-License-Identifier: Apache-2.0

#include "retro/proposer/prompts.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

#include "retro/chem/smiles.hpp"
#include "retro/errors.hpp"

namespace retro {

namespace {

// Shared schema walkthrough. The example keeps the loose pseudo-JSON texture
// the route parser is built to accept, so a model that imitates it verbatim
// still round-trips.
constexpr const char *kRouteSchema =
    "The route should be a list of steps wrapped in <ROUTE></ROUTE> with "
    "<EXPLANATION></EXPLANATION> after it. Each step in the list should be a "
    "dictionary. You need to keep a molecule set, which consists of the "
    "molecules we need to synthesize or purchase. In each step, you need to "
    "select a molecule from the 'Molecule set' as the product molecule in "
    "this step and use a backward reaction to find the reactants. After "
    "taking the backward reaction in this step, you need to remove the "
    "product molecule from the molecule set and add the reactants you find "
    "into the molecule set, and then name this updated set as the 'Updated "
    "molecule set' in this step. In the next step, the starting molecule set "
    "should be the 'Updated molecule set' from the previous step. In the "
    "last step, all the molecules in the 'Updated molecule set' should be "
    "purchasable. Here is an example:\n"
    "<ROUTE>\n"
    "    [\n"
    "        {\n"
    "            'Molecule set': \"[Target Molecule]\",\n"
    "            'Rational': Step analysis,\n"
    "            'Product': \"[Product molecule]\",\n"
    "            'Reaction': \"[Reaction template]\",\n"
    "            'Reactants': \"[Reactant1, Reactant2]\",\n"
    "            'Updated molecule set': \"[Reactant1, Reactant2]\"\n"
    "        },\n"
    "        {\n"
    "            'Molecule set': \"[Reactant1, Reactant2]\",\n"
    "            'Rational': Step analysis,\n"
    "            'Product': \"[Product molecule]\",\n"
    "            'Reaction': \"[Reaction template]\",\n"
    "            'Reactants': \"[subReactant1, subReactant2]\",\n"
    "            'Updated molecule set': \"[Reactant1, subReactant1, "
    "subReactant2]\"\n"
    "        }\n"
    "    ]\n"
    "</ROUTE>\n"
    "<EXPLANATION>: Explanation for the whole route. </EXPLANATION>\n";

constexpr const char *kRouteRequirementsHead =
    "Requirements:\n"
    "1. The 'Molecule set' contains molecules we need to synthesize at this "
    "stage. ";

constexpr const char *kRouteRequirementsTail =
    "In the following steps, it should be the 'Updated molecule set' from "
    "the previous step.\n"
    "2. The 'Rational' part in each step should be your analysis for "
    "synthesis planning in this step. It should be in the string format.\n"
    "3. 'Product' is the molecule we plan to synthesize in this step. It "
    "should be from the 'Molecule set'.\n"
    "4. 'Reaction' is a reaction that can synthesize the product molecule. "
    "It should be in SMILES format, for example Product>>Reactant1."
    "Reactant2.\n"
    "5. 'Reactants' are the reactants of the reaction, in SMILES format.\n"
    "6. The 'Updated molecule set' should be molecules we need to purchase "
    "or synthesize after taking this reaction. To get the 'Updated molecule "
    "set', you need to remove the product molecule from the 'Molecule set' "
    "and then add the reactants in this step into it. In the last step, all "
    "the molecules in the 'Updated molecule set' should be purchasable.\n"
    "7. In the <EXPLANATION>, you should analyze the whole route and ensure "
    "the molecules in the 'Updated molecule set' in the last step are all "
    "purchasable.\n";

constexpr const char *kSmilesConventions =
    "All the molecules should be in SMILES format. For example, Cl2 should "
    "be ClCl in SMILES format. Br2 should be BrBr in SMILES format. H2O "
    "should be O in SMILES format. HBr should be [H]Br in SMILES format. "
    "NH3 should be N in SMILES format. Hydrogen atoms are implicitly "
    "understood unless explicit clarity is needed.";

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", score);
  return buf;
}

void append_reference_section(std::ostringstream &out,
                              const std::vector<std::string> &blocks,
                              const char *lead) {
  if (blocks.empty()) return;
  out << lead << "\n";
  for (const std::string &block : blocks) {
    out << block << "\n";
  }
}

}  // namespace

std::string render_molecule_list(const std::vector<std::string> &smiles) {
  std::string out = "[";
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    if (i) out += ", ";
    out += smiles[i];
  }
  out += "]";
  return out;
}

std::string build_init_prompt(
    const std::string &target, const std::vector<std::string> &reference_blocks) {
  std::ostringstream out;
  out << "As a professional chemist specialized in synthesis analysis, you "
         "are tasked with generating a retrosynthesis route for a target "
         "molecule provided in SMILES format.\n\n"
         "A retrosynthesis route is a series of retrosynthesis steps that "
         "starts from the target molecule and ends with some commercially "
         "purchasable compounds. The reactions are drawn from the reference "
         "reaction database. Please also consider reactions in "
         "stereochemistry.\n\n";
  out << kRouteSchema << kRouteRequirementsHead
      << "In the first step, it should be the target molecule. "
      << kRouteRequirementsTail;
  out << "My target molecule is:\n" << target << "\n";
  append_reference_section(
      out, reference_blocks,
      "To assist you, example retrosynthesis routes that are either close "
      "to the target molecule or representative will be provided.");
  out << "Please propose a retrosynthesis route for my target molecule.";
  if (!reference_blocks.empty()) {
    out << " The provided reference routes may be helpful.";
  }
  out << " You can also design a synthetic route based on your own "
         "knowledge.\n";
  return out.str();
}

std::string build_mutation_prompt(
    const std::vector<std::string> &molecule_set, const std::string &feedback,
    const std::vector<std::string> &reference_blocks) {
  std::ostringstream out;
  out << "As a professional chemist specialized in synthesis analysis, you "
         "are tasked with modifying a retrosynthesis route for target "
         "molecules provided in SMILES format.\n\n"
         "A retrosynthesis route is a series of retrosynthesis steps that "
         "starts from the given target molecule set and ends with some "
         "commercially purchasable compounds. The reactions are drawn from "
         "the reference reaction database. Please also take reactions in "
         "stereochemistry into consideration. For example, E-configuration "
         "or Z-configuration.\n\n";
  out << kRouteSchema << kRouteRequirementsHead
      << "In the first step, it should be the target molecule set given "
         "below. "
      << kRouteRequirementsTail;
  out << "My target molecule set is:\n"
      << render_molecule_list(molecule_set) << "\n";
  out << "Here is the feedback for the route:\n" << feedback << "\n";
  append_reference_section(
      out, reference_blocks,
      "To assist you, example retrosynthesis routes that are close to the "
      "target molecules in the starting molecule set will be provided.");
  out << "Please propose a retrosynthesis route for the starting molecule "
         "set.";
  if (!reference_blocks.empty()) {
    out << " The provided reference routes may be helpful.";
  }
  out << " You can also design a synthetic route based on your own "
         "knowledge. "
      << kSmilesConventions << "\n";
  return out.str();
}

std::string build_single_step_prompt(const std::string &product) {
  std::ostringstream out;
  out << "As a professional chemist specialized in synthesis analysis, you "
         "are tasked with proposing one single retrosynthesis step for a "
         "product molecule provided in SMILES format.\n\n"
         "A retrosynthesis step is a backward reaction that transforms the "
         "product molecule into one or more reactant molecules. The "
         "reactions are drawn from the reference reaction database. Please "
         "also consider reactions in stereochemistry.\n\n"
         "Your output should follow the format:\n"
         "<EXPLANATION>Your analysis</EXPLANATION>\n"
         "<REACTION>Product>>Reactant1.Reactant2</REACTION>\n\n"
         "Here are the requirements:\n"
         "1. In the <EXPLANATION>, you should analyze which bond "
         "disconnection is the most plausible for the product molecule.\n"
         "2. In the <REACTION>, you should provide the backward reaction "
         "written as Product>>Reactants, with multiple reactants separated "
         "by '.'.\n"
         "3. "
      << kSmilesConventions << "\n\n"
      << "My product molecule is:\n"
      << product << "\n";
  return out.str();
}

std::string build_designer_prompt(const std::string &smiles1, double score1,
                                  const std::string &smiles2, double score2,
                                  const std::string &oracle_name,
                                  const std::string &oracle_description) {
  std::ostringstream out;
  out << "I have two molecules and their " << oracle_name << " scores. The "
      << oracle_name << " score measures " << oracle_description << "\n"
      << smiles1 << ", " << format_score(score1) << "\n"
      << smiles2 << ", " << format_score(score2) << "\n\n"
      << "Now I want to synthesize a new molecule that has a higher "
      << oracle_name
      << " score. Please propose a new synthesizable molecule that has a "
         "higher "
      << oracle_name
      << " score. You can either make crossovers and mutations based on the "
         "given molecules or just propose a new molecule based on your "
         "knowledge.\n\n"
         "Your output should follow the format:\n"
         "<EXPLANATION>Your analysis</EXPLANATION>\n"
         "<MOLECULE>The SMILES of your proposed molecule</MOLECULE>\n\n"
         "Here are the requirements:\n"
         "1. In the <EXPLANATION>, you should analyze how to edit the given "
         "molecules to get a better property score and then propose your "
         "edited molecule or your proposed new molecule, and how to "
         "synthesize your proposed/edited molecule.\n"
         "2. In the <MOLECULE>, you should provide the SMILES of the "
         "molecule you propose.\n";
  return out.str();
}

std::optional<std::string> extract_tagged_block(std::string_view text,
                                                std::string_view tag) {
  std::string open = "<" + std::string(tag) + ">";
  std::string close = "</" + std::string(tag) + ">";
  std::size_t begin = text.find(open);
  if (begin == std::string_view::npos) return std::nullopt;
  begin += open.size();
  std::size_t end = text.find(close, begin);
  if (end == std::string_view::npos) return std::nullopt;
  std::string_view inner = text.substr(begin, end - begin);
  while (!inner.empty() && std::isspace(static_cast<unsigned char>(
                               inner.front()))) {
    inner.remove_prefix(1);
  }
  while (!inner.empty() &&
         std::isspace(static_cast<unsigned char>(inner.back()))) {
    inner.remove_suffix(1);
  }
  return std::string(inner);
}

namespace {

std::string canon_or_raw(const std::string &s) {
  try {
    return canonical_smiles(s);
  } catch (const ParseError &) {
    return s;
  }
}

// Names the molecules in a step that fail to parse.
std::vector<std::string> unparsable_molecules(const RouteStep &step) {
  std::vector<std::string> bad;
  auto check = [&bad](const std::string &s) {
    try {
      parse_smiles(s);
    } catch (const ParseError &) {
      bad.push_back(s);
    }
  };
  for (const std::string &s : step.molecule_set) check(s);
  check(step.product);
  for (const std::string &s : step.reactants) check(s);
  for (const std::string &s : step.updated_molecule_set) check(s);
  return bad;
}

}  // namespace

Feedback render_feedback(const Route &route, const EvaluationReport &report) {
  Feedback fb;

  if (!report.first_invalid_step) {
    fb.rework_from = route.steps.size();
    fb.molecule_set = report.frontier;
    if (report.solved) {
      fb.text =
          "The route is valid and every molecule in the final molecule set "
          "is purchasable.";
      return fb;
    }
    std::ostringstream out;
    out << "Every step in the route is valid, but the route is not finished "
           "yet: the following molecules in the final molecule set are not "
           "purchasable and still need to be synthesized: "
        << render_molecule_list(report.frontier)
        << ". Please continue the route from this molecule set until every "
           "molecule is purchasable.";
    fb.text = out.str();
    return fb;
  }

  std::size_t idx = *report.first_invalid_step;
  const RouteStep &step = route.steps[idx];
  const StepVerdict &v = report.steps[idx];
  fb.rework_from = idx;
  // The rework starts where the valid prefix ends, not at whatever set the
  // broken step declared; when the chain itself broke the two differ.
  if (idx == 0) {
    fb.molecule_set = {canon_or_raw(route.target)};
  } else {
    for (const std::string &s : route.steps[idx - 1].updated_molecule_set) {
      fb.molecule_set.push_back(canon_or_raw(s));
    }
  }

  std::ostringstream out;
  out << "Step " << (idx + 1) << " of the proposed route is invalid; every "
         "step before it is kept, so please repropose the route starting "
         "from the molecule set "
      << render_molecule_list(fb.molecule_set)
      << ". Problems found in step " << (idx + 1) << ":\n";
  if (!v.molecules_valid) {
    std::vector<std::string> bad = unparsable_molecules(step);
    out << "- These entries are not valid SMILES strings: "
        << render_molecule_list(bad) << ".\n";
  }
  if (!v.reaction_exists) {
    out << "- The proposed reaction does not exist: no identical or similar "
           "applicable reaction is recorded in the reference reaction "
           "database.\n";
  } else if (!v.reaction_valid) {
    out << "- The proposed reaction is recorded, but it cannot be applied "
           "backward to the product " << step.product << ".\n";
  }
  if (v.molecules_valid) {
    if (!v.chain_ok) {
      out << "- The 'Molecule set' of this step does not equal the 'Updated "
             "molecule set' of the previous step.\n";
    }
    if (!v.product_in_set) {
      out << "- The product " << step.product
          << " is not a member of this step's 'Molecule set'.\n";
    }
    if (!v.update_consistent) {
      out << "- The 'Updated molecule set' is inconsistent: it must be the "
             "'Molecule set' minus the product plus the reactants.\n";
    }
  }
  fb.text = out.str();
  return fb;
}

}  // namespace retro
