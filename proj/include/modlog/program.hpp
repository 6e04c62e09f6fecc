#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "modlog/term.hpp"

namespace modlog {

// name/arity pair as written in export, import, hide and regtype lists
struct PredArity {
    std::string name;
    uint32_t arity = 0;

    auto operator<=>(const PredArity&) const = default;
};

// A `:- pred Head : Pre => Post.` declaration, before normalization.
struct RawAssertion {
    Term head = Term::integer(0);
    std::vector<Term> pre;   // empty means `true`
    std::vector<Term> post;  // empty means `true`
    std::vector<std::string> var_names;
    int line = 0;
};

// One module as parsed from source, before flattening.
struct ModuleSource {
    std::string name;
    std::vector<PredArity> exports;  // declaration order
    std::vector<std::pair<std::string, std::vector<PredArity>>> imports;
    std::vector<PredArity> hidden;
    std::vector<PredArity> regtypes;
    std::vector<Clause> clauses;  // source order; functors all user-qualified
    std::vector<RawAssertion> assertions;
};

enum class LoadErrorKind {
    HiddenFunctorLeak,
    ImportNotExported,
    DuplicateDefinition,
    ParseError,
    VisibilityViolation,
};

std::string_view load_error_kind_name(LoadErrorKind k);

class LoadError : public std::runtime_error {
public:
    LoadError(LoadErrorKind kind, std::string message, std::string where = "",
              int line = 0)
        : std::runtime_error(std::move(message)), kind_(kind),
          where_(std::move(where)), line_(line) {}

    LoadErrorKind kind() const { return kind_; }
    const std::string& where() const { return where_; }
    int line() const { return line_; }

private:
    LoadErrorKind kind_;
    std::string where_;  // module name or file
    int line_;
};

// Run-time evaluation failure (e.g. comparison on an unbound variable).
// Distinct from assertion violations, which are reported as verdicts.
class EvalError : public std::runtime_error {
public:
    EvalError(std::string message, Term culprit)
        : std::runtime_error(std::move(message)), culprit_(std::move(culprit)) {}
    const Term& culprit() const { return culprit_; }

private:
    Term culprit_;
};

// Normalized check condition attached to a predicate. Literals are terms
// over formal argument variables 0..arity-1.
struct AssertionCondition {
    enum class Kind : uint8_t { Calls, Success };

    std::string id;  // "<module>:<name>/<arity>#<k>"
    SymId pred = 0;
    uint32_t arity = 0;
    Kind kind = Kind::Calls;
    std::vector<std::vector<Term>> pre;  // Calls: disjuncts; Success: one guard
    std::vector<Term> post;              // Success only
};

struct ModuleInfo {
    std::string name;
    uint32_t index = 0;  // position in FlatProgram::mod_names
    std::vector<PredArity> export_list;
    std::set<SymId> defs, exps, imps;  // interface symbol sets
    std::set<SymId> hidden;            // hidden functor symbols (qualified)
    std::set<SymId> import_syms;       // predicates visible through use_module
    std::vector<std::pair<std::string, std::vector<PredArity>>> import_decls;
};

struct Predicate {
    SymId sym = 0;  // qualified by the defining module
    std::string module;
    uint32_t mod_idx = 0;
    uint32_t arity = 0;
    bool exported = false;
    bool is_regtype = false;
    std::vector<Clause> clauses;
    std::vector<uint32_t> conditions;  // indices into FlatProgram::conditions

    // first-argument index; ordinals always increase within each bucket
    struct FirstArgIndex {
        bool usable = false;
        std::vector<uint32_t> var_heads;
        std::map<std::pair<int64_t, int64_t>, std::vector<uint32_t>> buckets;
    } index;
};

struct FlatProgram {
    std::vector<std::string> mod_names;  // [0] is the query pseudo-module
    std::map<std::string, ModuleInfo> modules;
    std::map<SymId, Predicate> preds;
    std::vector<AssertionCondition> conditions;
    std::map<std::string, uint32_t> condition_index;  // id -> slot
    // (name, arity) -> modules hiding that functor, for query resolution
    std::map<PredArity, std::vector<std::string>> hidden_by_name;
    // exported predicate symbols of all modules; the query module imports these
    std::set<SymId> query_imports;

    uint32_t mod_index(std::string_view name) const;
    const Predicate* find_pred(SymId s) const;
    const AssertionCondition& condition(uint32_t idx) const {
        return conditions[idx];
    }
};

// A parsed query: conjunction of goals over variables 0..var_names.size()-1,
// run from the query pseudo-module.
struct Query {
    std::vector<Term> goals;
    std::vector<std::string> var_names;
};

// Builtin recognition (comparisons, unification, type tests).
bool is_builtin(SymId s);
SymId builtin_sym(std::string_view name, uint32_t arity);

// True when the predicate g may be called from module `from` (by name).
// Builtins are visible everywhere; otherwise g must be defined in `from`
// or be exported and imported by `from`.
bool visible(const FlatProgram& p, SymId g, std::string_view from);
bool visible(const FlatProgram& p, SymId g, uint32_t from_idx);

// True when t is built from user-qualified functors and integers only
// (unbound variables count as user).
bool usr_only(const Term& t);

// (Re)builds pred.index from pred.clauses.
void build_first_arg_index(Predicate& pred);

}  // namespace modlog
