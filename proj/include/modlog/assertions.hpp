#pragma once

#include <functional>
#include <set>

#include "modlog/program.hpp"

namespace modlog {

// Maps a property-literal name/arity to its (qualified) predicate symbol.
// Throws LoadError when the name cannot be resolved in context.
using PropResolver = std::function<SymId(const std::string&, uint32_t)>;

// Turns the pred assertions of one predicate into the checking conditions:
// one calls condition whose precondition is the disjunction of all stated
// preconditions, plus one success condition per assertion. Condition k of
// p/N in module m gets id "m:p/N#k"; the calls condition is k = 0.
//
// Requirements checked here: heads must apply the same predicate to
// distinct variables, every literal must be a unary property applied to a
// head variable (or int/term/usr), and assertion bodies may not mention
// variables missing from the head.
std::vector<AssertionCondition> normalize_assertions(
    const std::string& module, const std::string& pred_name, uint32_t arity,
    const std::vector<RawAssertion>& assertions, const PropResolver& resolve);

// Property names mentioned in a condition formula: the set of root symbols
// of literals applied to any of the given variables (all variables when the
// set is omitted).
std::set<SymId> lit_names(const std::vector<Term>& conj);
std::set<SymId> lit_names(const std::vector<Term>& conj,
                          const std::vector<VarId>& vars);

}  // namespace modlog
