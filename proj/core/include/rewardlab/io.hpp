#pragma once

#include <string>

#include "rewardlab/mdp.hpp"
#include "rewardlab/modal.hpp"
#include "rewardlab/objectives.hpp"
#include "rewardlab/risk.hpp"

namespace rewardlab {

/// Whole-file read; ParseError when the file cannot be opened.
std::string read_file(const std::string& path);

/// Write-temp-then-rename, so concurrent readers never observe a torn file.
void write_file_atomic(const std::string& path, const std::string& content);

// JSON codecs. Parse failures throw ParseError with the underlying line and
// column diagnostics; schema failures name the offending key.
//
// MOMDP schema: {"states": [names], "actions": [names], "gamma": float,
// "mu0": [float], "transition": [s][a][s'] floats, "rewards": [k][s][a]
// floats}. The affordance schema drops "rewards" and adds "affordances":
// [{"reward": [s][a], "gamma": float}] and "modal_form": {"kind": "tanh_gate"
// | "value_penalty" | "fixed", "base_reward": [s][a], "affordance_index":
// int, "scale": float}. Transform schema: {"kind": string, "alpha"?, "b"?,
// "a"?}. Objective schema: {"kind": string, "thresholds"?, "c"?, "alpha"?,
// "weights"?}.

Momdp momdp_from_json(const std::string& text);
std::string momdp_to_json(const Momdp& momdp);
Momdp load_momdp(const std::string& path);

ObjectiveSpec objective_from_json(const std::string& text);
std::string objective_to_json(const ObjectiveSpec& spec);

AffordanceMdp affordance_mdp_from_json(const std::string& text);
std::string affordance_mdp_to_json(const AffordanceMdp& amdp);
AffordanceMdp load_affordance_mdp(const std::string& path);

UtilityTransform transform_from_json(const std::string& text);
std::string transform_to_json(const UtilityTransform& transform);

/// Schema sniffing for `lab validate`: parses the document as whichever
/// payload its keys announce, revalidating every invariant, and returns a
/// one-line description. ParseError when nothing matches.
std::string validate_document(const std::string& text);

} // namespace rewardlab
