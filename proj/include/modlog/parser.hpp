#pragma once

#include <string_view>

#include "modlog/program.hpp"

namespace modlog {

// Parses one module file. `origin` names the source in error messages.
// Throws LoadError (ParseError or HiddenFunctorLeak) on bad input.
ModuleSource parse_module(std::string_view text, std::string_view origin = "");

// Parses a query conjunction such as "insert(5,empty,T), peek(T,K)".
//
// When a program is given and `trusted` is set, functors that some loaded
// module hides are resolved to that module's qualified symbol (the query
// then acts as a driver belonging to the program). Untrusted parsing
// leaves every functor user-qualified, so hidden terms cannot be forged.
Query parse_query(std::string_view text, const FlatProgram* prog = nullptr,
                  bool trusted = true);

// Parses a single term; functors are user-qualified. For tests and tools.
Term parse_term_text(std::string_view text,
                     std::vector<std::string>* var_names = nullptr);

}  // namespace modlog
