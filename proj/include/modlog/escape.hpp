#pragma once

#include "modlog/program.hpp"

namespace modlog {

// Which terms can cross module m's boundary: the union of the properties
// stated in the success postconditions of m's exported predicates and in
// the calls preconditions of the predicates m imports, plus arbitrary
// user-functor terms (the usr component).
struct EscapeDescription {
    std::string module;
    std::vector<SymId> props;  // name-sorted, containment-pruned
    bool has_top = false;      // a `term` literal appeared: anything escapes
};

// The description made checkable: esc_<m>/1 with one clause per
// hidden-functor clause of each contributing property (bodies preserved),
// plus the usr fallback.
struct MaterializedEscape {
    std::string module;
    SymId sym = 0;  // esc_<m>/1, qualified by m
    std::vector<Clause> clauses;
    bool has_top = false;
};

EscapeDescription escaping_terms(const FlatProgram& p,
                                 const std::string& module);

MaterializedEscape materialize(const FlatProgram& p,
                               const EscapeDescription& desc);

// Registers the esc predicate so engines over p can evaluate it.
void install_escape(FlatProgram& p, const MaterializedEscape& esc);

// Listing form, hidden functors printed with their module qualifier.
std::string escape_to_string(const MaterializedEscape& esc);

}  // namespace modlog
