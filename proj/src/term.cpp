#include "modlog/term.hpp"

#include <cassert>
#include <deque>
#include <mutex>
#include <unordered_map>

namespace modlog {

// ---------------------------------------------------------------------------
// symbol interning

namespace {

struct SymbolTable {
    std::mutex mu;
    std::deque<Symbol> entries;  // deque: references stay valid while growing
    std::unordered_map<std::string, SymId> index;

    static std::string key(std::string_view name, uint32_t arity,
                           std::string_view qualifier) {
        std::string k;
        k.reserve(name.size() + qualifier.size() + 8);
        k.append(qualifier);
        k.push_back(':');
        k.append(name);
        k.push_back('/');
        k.append(std::to_string(arity));
        return k;
    }
};

SymbolTable& table() {
    static SymbolTable t;
    return t;
}

}  // namespace

SymId intern_symbol(std::string_view name, uint32_t arity,
                    std::string_view qualifier) {
    auto& t = table();
    std::string k = SymbolTable::key(name, arity, qualifier);
    std::lock_guard<std::mutex> lock(t.mu);
    auto it = t.index.find(k);
    if (it != t.index.end()) return it->second;
    SymId id = static_cast<SymId>(t.entries.size());
    t.entries.push_back(Symbol{std::string(name), arity, std::string(qualifier)});
    t.index.emplace(std::move(k), id);
    return id;
}

const Symbol& symbol(SymId id) {
    return table().entries[id];
}

// ---------------------------------------------------------------------------
// terms

Term Term::comp(SymId f, std::vector<Term> args) {
    Term t;
    t.kind_ = Kind::Comp;
    t.sym_ = f;
    t.ground_ = true;
    for (const Term& a : args) {
        if (!a.ground()) {
            t.ground_ = false;
            break;
        }
    }
    if (!args.empty())
        t.args_ = std::make_shared<const std::vector<Term>>(std::move(args));
    return t;
}

bool Term::operator==(const Term& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
        case Kind::Var:
        case Kind::Int:
            return val_ == o.val_;
        case Kind::Comp: {
            if (sym_ != o.sym_) return false;
            auto a = args(), b = o.args();
            if (a.size() != b.size()) return false;
            for (size_t i = 0; i < a.size(); ++i)
                if (!(a[i] == b[i])) return false;
            return true;
        }
    }
    return false;
}

void collect_vars(const Term& t, std::vector<VarId>& out) {
    if (t.ground()) return;
    switch (t.kind()) {
        case Term::Kind::Var: {
            VarId v = t.var_id();
            for (VarId u : out)
                if (u == v) return;
            out.push_back(v);
            break;
        }
        case Term::Kind::Int:
            break;
        case Term::Kind::Comp:
            for (const Term& a : t.args()) collect_vars(a, out);
            break;
    }
}

std::vector<VarId> vars_of(const Term& t) {
    std::vector<VarId> out;
    collect_vars(t, out);
    return out;
}

// ---------------------------------------------------------------------------
// store

VarId Store::fresh() {
    VarId v = static_cast<VarId>(binding_.size());
    binding_.push_back(Term::var(v));
    return v;
}

void Store::reserve_vars(size_t n) {
    while (binding_.size() < n) fresh();
}

bool Store::is_bound(VarId v) const {
    const Term& b = binding_[v];
    return !(b.is_var() && b.var_id() == v);
}

void Store::bind(VarId v, Term t) {
    assert(!is_bound(v));
    binding_[v] = std::move(t);
    trail_.push_back(v);
}

void Store::undo_to(const Mark& m) {
    while (trail_.size() > m.trail) {
        VarId v = trail_.back();
        trail_.pop_back();
        binding_[v] = Term::var(v);
    }
    assert(binding_.size() >= m.vars);
    binding_.erase(binding_.begin() + static_cast<ptrdiff_t>(m.vars),
                   binding_.end());
}

Term Store::walk(Term t) const {
    while (t.is_var()) {
        const Term& b = binding_[t.var_id()];
        if (b.is_var() && b.var_id() == t.var_id()) return t;
        t = b;
    }
    return t;
}

Term Store::resolve(const Term& t) const {
    if (t.ground()) return t;
    Term w = walk(t);
    if (w.ground() || w.is_var()) return w;
    bool changed = !(w == t);
    std::vector<Term> args;
    args.reserve(w.arity());
    for (const Term& a : w.args()) {
        Term r = resolve(a);
        if (!(r == a)) changed = true;
        args.push_back(std::move(r));
    }
    if (!changed) return t;
    return Term::comp(w.sym(), std::move(args));
}

Term Store::resolve_collect(const Term& t, std::vector<VarId>& unbound) const {
    Term r = resolve(t);
    collect_vars(r, unbound);
    return r;
}

bool Store::occurs(VarId v, const Term& t) const {
    if (t.ground()) return false;
    Term w = walk(t);
    switch (w.kind()) {
        case Term::Kind::Var:
            return w.var_id() == v;
        case Term::Kind::Int:
            return false;
        case Term::Kind::Comp:
            for (const Term& a : w.args())
                if (occurs(v, a)) return true;
            return false;
    }
    return false;
}

bool Store::unify_rec(Term a, Term b) {
    a = walk(std::move(a));
    b = walk(std::move(b));
    if (a.is_var()) {
        if (b.is_var()) {
            if (a.var_id() == b.var_id()) return true;
            // bind the younger variable to the older one
            if (a.var_id() < b.var_id()) std::swap(a, b);
            bind(a.var_id(), b);
            return true;
        }
        if (occurs(a.var_id(), b)) return false;
        bind(a.var_id(), b);
        return true;
    }
    if (b.is_var()) {
        if (occurs(b.var_id(), a)) return false;
        bind(b.var_id(), a);
        return true;
    }
    if (a.is_int() || b.is_int())
        return a.is_int() && b.is_int() && a.int_value() == b.int_value();
    if (a.sym() != b.sym() || a.arity() != b.arity()) return false;
    auto as = a.args(), bs = b.args();
    for (size_t i = 0; i < as.size(); ++i)
        if (!unify_rec(as[i], bs[i])) return false;
    return true;
}

bool Store::unify(const Term& a, const Term& b) {
    Mark m = mark();
    if (unify_rec(a, b)) return true;
    undo_to(m);
    return false;
}

// ---------------------------------------------------------------------------
// substitutions

const Term* Subst::lookup(VarId v) const {
    auto it = map_.find(v);
    return it == map_.end() ? nullptr : &it->second;
}

void Subst::set(VarId v, Term t) {
    map_.insert_or_assign(v, std::move(t));
}

Term apply(const Subst& s, const Term& t) {
    if (t.ground() || s.empty()) return t;
    switch (t.kind()) {
        case Term::Kind::Var: {
            const Term* b = s.lookup(t.var_id());
            if (!b) return t;
            return apply(s, *b);
        }
        case Term::Kind::Int:
            return t;
        case Term::Kind::Comp: {
            bool changed = false;
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const Term& a : t.args()) {
                Term r = apply(s, a);
                if (!(r == a)) changed = true;
                args.push_back(std::move(r));
            }
            if (!changed) return t;
            return Term::comp(t.sym(), std::move(args));
        }
    }
    return t;
}

std::optional<Subst> unify(const Term& a, const Term& b, const Subst& s) {
    Store st;
    size_t maxv = 0;
    auto track = [&maxv](const Term& t) {
        for (VarId v : vars_of(t)) maxv = std::max<size_t>(maxv, v + 1);
    };
    track(a);
    track(b);
    for (const auto& [v, t] : s) {
        maxv = std::max<size_t>(maxv, v + 1);
        track(t);
    }
    st.reserve_vars(maxv);
    for (const auto& [v, t] : s)
        if (!st.unify(Term::var(v), t)) return std::nullopt;  // s inconsistent
    if (!st.unify(a, b)) return std::nullopt;
    Subst out;
    for (VarId v = 0; v < st.num_vars(); ++v)
        if (st.is_bound(v)) out.set(v, st.resolve(Term::var(v)));
    return out;
}

// ---------------------------------------------------------------------------
// renaming

namespace {

Term rename_with(const Term& t, std::vector<std::optional<VarId>>& mapping,
                 VarId& counter) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            VarId v = t.var_id();
            if (v >= mapping.size()) mapping.resize(v + 1);
            if (!mapping[v]) mapping[v] = counter++;
            return Term::var(*mapping[v]);
        }
        case Term::Kind::Int:
            return t;
        case Term::Kind::Comp: {
            if (t.ground()) return t;
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const Term& a : t.args())
                args.push_back(rename_with(a, mapping, counter));
            return Term::comp(t.sym(), std::move(args));
        }
    }
    return t;
}

}  // namespace

Clause rename_apart(const Clause& c, VarId& counter) {
    std::vector<std::optional<VarId>> mapping;
    Clause out;
    out.head = rename_with(c.head, mapping, counter);
    out.body.reserve(c.body.size());
    for (const Term& l : c.body) out.body.push_back(rename_with(l, mapping, counter));
    out.line = c.line;
    return out;
}

Term canonical(const Term& t) {
    std::vector<std::optional<VarId>> mapping;
    VarId counter = 0;
    return rename_with(t, mapping, counter);
}

}  // namespace modlog
