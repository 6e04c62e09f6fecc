#pragma once

#include <vector>

#include "modlog/program.hpp"

namespace modlog {

// Combines parsed modules into one flat program:
//  * occurrences of functors hidden by the enclosing module are rebuilt
//    with that module's qualifier; everything else stays user-qualified
//  * body call literals are resolved to local predicates, declared imports
//    or builtins (anything else is a visibility violation)
//  * imports are validated against the exporting module
//  * assertions are normalized into checking conditions
//  * per-module defs/exps/imps symbol sets are computed
//
// Deterministic: the same sources always yield a structurally identical
// program. Throws LoadError on any inconsistency.
FlatProgram flatten(const std::vector<ModuleSource>& sources);

}  // namespace modlog
