#pragma once

#include <pathcg/problem.hpp>

#include <filesystem>
#include <string>

namespace pathcg {

/// Instance file format (JSON):
///
///   { "format": "pathcg-instance", "version": 1,
///     "N": .., "T": ..,
///     "subsystems": [ { "n": .., "m": .., "nu": ..,
///                       "stages": [ { "Q": [[..]], "S": .., "R": .., "A": .., "B": ..,
///                                     "E": .., "F": .., "C": .., "D": .., "kappa": [..] }, ... ] } ],
///     "boundary": { "n_left": .., "n_right": .., "xi": [[..]], "chi": [[..]], "zeta": [[..]] } }
///
/// Matrices are arrays of rows. The terminal stage omits A, B, E and F. Numbers
/// use the shortest decimal form that parses back to the same double, so a
/// save/load cycle is bit-exact.
std::string instance_to_json(const ProblemInstance &inst, int indent = -1);
ProblemInstance instance_from_json(const std::string &text);

void save_instance(const ProblemInstance &inst, const std::filesystem::path &path);
ProblemInstance load_instance(const std::filesystem::path &path);

/// Bitwise equality of every stored number and dimension.
bool identical(const ProblemInstance &a, const ProblemInstance &b);

} // namespace pathcg
