#pragma once

#include <string>

#include "modlog/program.hpp"

namespace modlog {

struct PrintOptions {
    // print m:f for functors whose qualifier is not `user`
    bool qualify = false;
    // source names for variables; ids beyond the table print as _G<n>
    const std::vector<std::string>* var_names = nullptr;
};

std::string term_to_string(const Term& t, const PrintOptions& opts = {});

// Listing names for the variables of a clause-sized group of terms:
// A1, A2, ... in first-occurrence order, _ for variables occurring once.
std::vector<std::string> listing_names(const std::vector<const Term*>& terms);

// Clause in listing form: variables are renamed A1, A2, ... in order of
// first occurrence; variables occurring exactly once print as _.
std::string clause_to_string(const Clause& c, bool qualify = false);

// "m:p/2#1: success(p(A1,A2), (guard), (post))."
std::string condition_to_string(const AssertionCondition& c,
                                bool qualify = false);

// All conditions of one module, predicates in name order.
std::string module_conditions_to_string(const FlatProgram& p,
                                        const std::string& module);

}  // namespace modlog
