#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modlog {

using VarId = uint32_t;
using SymId = uint32_t;

// The distinguished module that owns every functor not hidden anywhere.
inline constexpr std::string_view kUserModule = "user";

// A functor symbol: name + arity + owning module. Two symbols are equal
// iff all three components match; interning makes that an id comparison.
struct Symbol {
    std::string name;
    uint32_t arity;
    std::string qualifier;  // kUserModule unless hidden by some module

    bool is_user() const { return qualifier == kUserModule; }
};

// Process-wide append-only intern table. Interning takes a lock; lookup
// by id is lock-free (entries are immutable once published).
SymId intern_symbol(std::string_view name, uint32_t arity,
                    std::string_view qualifier = kUserModule);
const Symbol& symbol(SymId id);

// Immutable first-order term: variable, integer constant, or compound.
// Compounds share their argument vector, so copying a handle is cheap.
class Term {
public:
    enum class Kind : uint8_t { Var, Int, Comp };

    static Term var(VarId v) {
        Term t;
        t.kind_ = Kind::Var;
        t.val_ = v;
        t.ground_ = false;
        return t;
    }
    static Term integer(int64_t v) {
        Term t;
        t.kind_ = Kind::Int;
        t.val_ = v;
        t.ground_ = true;
        return t;
    }
    static Term comp(SymId f, std::vector<Term> args);
    // 0-ary compound (an atom constant)
    static Term atom(SymId f) { return comp(f, {}); }

    Kind kind() const { return kind_; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_int() const { return kind_ == Kind::Int; }
    bool is_comp() const { return kind_ == Kind::Comp; }
    // true when no variable occurs anywhere in the term
    bool ground() const { return ground_; }

    VarId var_id() const { return static_cast<VarId>(val_); }
    int64_t int_value() const { return val_; }
    SymId sym() const { return sym_; }
    std::span<const Term> args() const {
        if (!args_) return {};
        return {args_->data(), args_->size()};
    }
    size_t arity() const { return args_ ? args_->size() : 0; }

    bool operator==(const Term& o) const;
    bool operator!=(const Term& o) const { return !(*this == o); }

private:
    Term() = default;

    Kind kind_ = Kind::Int;
    bool ground_ = true;
    SymId sym_ = 0;
    int64_t val_ = 0;
    std::shared_ptr<const std::vector<Term>> args_;
};

// Collects the distinct variables of t in first-occurrence order.
void collect_vars(const Term& t, std::vector<VarId>& out);
std::vector<VarId> vars_of(const Term& t);

// Mutable binding environment for one derivation. Bindings are recorded
// on a trail so choice points can undo them; variable allocation is
// likewise rewindable via marks.
class Store {
public:
    struct Mark {
        size_t trail;
        size_t vars;
    };

    VarId fresh();
    // Makes sure variables [0, n) exist (used when seeding from a query).
    void reserve_vars(size_t n);
    size_t num_vars() const { return binding_.size(); }

    bool is_bound(VarId v) const;
    void bind(VarId v, Term t);  // trailed; v must be unbound

    Mark mark() const { return {trail_.size(), binding_.size()}; }
    void undo_to(const Mark& m);

    // Dereferences a variable chain; stops at an unbound var or non-var.
    Term walk(Term t) const;
    // Deep substitution of all bound variables. Shares subterms when
    // nothing changed, so ground terms come back untouched.
    Term resolve(const Term& t) const;
    // resolve + collect the unbound variables of the result.
    Term resolve_collect(const Term& t, std::vector<VarId>& unbound) const;

    // Syntactic unification with occurs check. On failure the store is
    // left exactly as it was.
    bool unify(const Term& a, const Term& b);

private:
    bool occurs(VarId v, const Term& t) const;
    bool unify_rec(Term a, Term b);

    std::vector<Term> binding_;  // binding_[v] == var(v) means unbound
    std::vector<VarId> trail_;
};

// Value-semantics substitution used at API boundaries (answers, tests).
// Kept idempotent: range terms never mention domain variables.
class Subst {
public:
    const Term* lookup(VarId v) const;
    void set(VarId v, Term t);
    bool empty() const { return map_.empty(); }
    size_t size() const { return map_.size(); }
    auto begin() const { return map_.begin(); }
    auto end() const { return map_.end(); }

    bool operator==(const Subst& o) const { return map_ == o.map_; }

private:
    std::map<VarId, Term> map_;
};

// Applies s to t, substituting transitively.
Term apply(const Subst& s, const Term& t);

// Most general unifier of a and b extending s; nullopt on failure.
std::optional<Subst> unify(const Term& a, const Term& b, const Subst& s);

// A clause: head atom plus body literals. var_names[i] is the source
// name of variable i (clause-locally numbered from 0).
struct Clause {
    Term head = Term::integer(0);
    std::vector<Term> body;
    std::vector<std::string> var_names;
    int line = 0;
};

// Fresh copy of c with variables renumbered from counter upward.
Clause rename_apart(const Clause& c, VarId& counter);

// Renames the free variables of t to 0,1,2,... in first-occurrence
// order. Used to compare answers and traces up to variable identity.
Term canonical(const Term& t);

}  // namespace modlog
