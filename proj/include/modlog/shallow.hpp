#pragma once

#include <map>
#include <string>

#include "modlog/escape.hpp"
#include "modlog/program.hpp"

namespace modlog {

// Decides sub ⊆ super over deterministic regular types, coinductively:
// a pair already in progress is assumed to hold, and results proved under
// such assumptions are committed only when the outermost query succeeds.
// Sound but incomplete; "don't know" comes back false.
class ContainmentCache {
public:
    bool contains(const FlatProgram& p, SymId sub, SymId super);

private:
    std::map<std::pair<SymId, SymId>, bool> memo_;
};

bool containment(const FlatProgram& p, SymId sub, SymId super);

// spec(prop): drop a body literal r(Xj) of a hidden-functor clause when the
// escape description already guarantees e(Xj) with e ⊆ r.  Positions without
// such cover, var-headed clauses, and non-regtype props stay untouched.
// Returns per-clause sets of dropped body-literal indices; empty map means
// the prop is unchanged.
std::map<uint32_t, std::vector<uint32_t>> spec_prop(const FlatProgram& p,
                                                    const MaterializedEscape& esc,
                                                    SymId prop,
                                                    ContainmentCache& cache);

// A module rewritten so exported predicates check the shallow variants of
// their preconditions at the boundary while inner recursion keeps the
// original conditions: each exported asserted predicate p gets a wrapper
// p :- p$inner, the clauses move to p$inner, and every prop q in the
// wrapper's preconditions whose spec differs becomes q#.
struct ShallowModule {
    ModuleSource source;
    // condition id in the transformed program -> id it descends from
    std::map<std::string, std::string> condition_rename;
};

ShallowModule shallow_interface(const FlatProgram& p,
                                const ModuleSource& original);

// Reloadable concrete-syntax listing of the transformed module.
std::string shallow_module_to_string(const ShallowModule& m);

// Transforms every module of a program and reflattens.
struct ShallowProgram {
    FlatProgram program;
    std::map<std::string, std::string> condition_rename;
};

ShallowProgram shallow_flatten(const std::vector<ModuleSource>& sources);

}  // namespace modlog
