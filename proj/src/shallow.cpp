#include "modlog/shallow.hpp"

#include <algorithm>
#include <sstream>

#include "modlog/flatten.hpp"
#include "modlog/printer.hpp"

namespace modlog {

namespace {

// One production of a deterministic regular type.
struct Alt {
    enum class Kind : uint8_t { Int, Functor, Defer } kind = Kind::Defer;
    int64_t value = 0;  // Int
    SymId functor = 0;  // Functor
    std::vector<std::vector<SymId>> arg_props;  // Functor: per position
    std::vector<SymId> defer;  // Defer: conjunction; empty means top
};

struct Prods {
    bool top = false;      // `term`
    bool int_any = false;  // `int`
    bool opaque = false;   // usr, non-regtypes, unknowns: equality only
    std::vector<Alt> alts;
};

Prods productions_of(const FlatProgram& p, SymId s) {
    Prods out;
    if (s == builtin_sym("term", 1)) {
        out.top = true;
        return out;
    }
    if (s == builtin_sym("int", 1)) {
        out.int_any = true;
        return out;
    }
    const Predicate* pred = p.find_pred(s);
    if (!pred || !pred->is_regtype || pred->arity != 1) {
        out.opaque = true;
        return out;
    }
    for (const Clause& c : pred->clauses) {
        const Term& pattern = c.head.args()[0];
        Alt alt;
        switch (pattern.kind()) {
            case Term::Kind::Var:
                alt.kind = Alt::Kind::Defer;
                for (const Term& lit : c.body) alt.defer.push_back(lit.sym());
                break;
            case Term::Kind::Int:
                alt.kind = Alt::Kind::Int;
                alt.value = pattern.int_value();
                break;
            case Term::Kind::Comp: {
                alt.kind = Alt::Kind::Functor;
                alt.functor = pattern.sym();
                alt.arg_props.resize(pattern.arity());
                for (const Term& lit : c.body) {
                    VarId v = lit.args()[0].var_id();
                    for (size_t i = 0; i < pattern.arity(); ++i)
                        if (pattern.args()[i].var_id() == v)
                            alt.arg_props[i].push_back(lit.sym());
                }
                break;
            }
        }
        out.alts.push_back(std::move(alt));
    }
    return out;
}

// Coinductive containment solver. Pairs currently being proved are assumed
// to hold; successes reached under assumptions become definitive only when
// the outermost query succeeds. Failures are definitive immediately
// (assumptions only ever enlarge coverage).
struct Solver {
    const FlatProgram& p;
    std::map<std::pair<SymId, SymId>, bool>& memo;
    std::set<std::pair<SymId, SymId>> in_progress;
    std::vector<std::pair<SymId, SymId>> pending;

    static constexpr int kMaxDepth = 64;

    SymId term_sym() const { return builtin_sym("term", 1); }
    SymId int_sym() const { return builtin_sym("int", 1); }

    bool pair(SymId sub, SymId super, int depth) {
        if (sub == super) return true;
        if (depth > kMaxDepth) return false;
        auto key = std::make_pair(sub, super);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        if (in_progress.contains(key)) return true;

        Prods q = productions_of(p, super);
        if (q.top) {
            memo[key] = true;
            return true;
        }
        Prods s = productions_of(p, sub);
        if (s.opaque || q.opaque) {
            memo[key] = false;
            return false;
        }

        in_progress.insert(key);
        bool ok;
        if (s.top) {
            ok = top_covered(q, depth + 1);
        } else if (s.int_any) {
            ok = exists_defer(q, [&](const Alt& d) {
                return all_of_defer(d, [&](SymId r) {
                    return pair(int_sym(), r, depth + 1);
                });
            });
        } else {
            ok = true;
            for (const Alt& alt : s.alts)
                if (!alt_covered(alt, super, q, depth + 1)) {
                    ok = false;
                    break;
                }
        }
        in_progress.erase(key);
        if (ok)
            pending.push_back(key);
        else
            memo[key] = false;
        return ok;
    }

    template <class F>
    bool exists_defer(const Prods& q, F f) const {
        for (const Alt& a : q.alts)
            if (a.kind == Alt::Kind::Defer && f(a)) return true;
        return false;
    }

    template <class F>
    static bool all_of_defer(const Alt& d, F f) {
        return std::all_of(d.defer.begin(), d.defer.end(), f);
    }

    bool top_covered(const Prods& q, int depth) {
        if (q.top) return true;
        return exists_defer(q, [&](const Alt& d) {
            return all_of_defer(
                d, [&](SymId r) { return pair(term_sym(), r, depth); });
        });
    }

    // v ∈ language(r)?
    bool int_member(int64_t v, SymId r, int depth) {
        if (depth > kMaxDepth) return false;
        if (r == builtin_sym("usr", 1)) return true;  // integers are usr
        Prods q = productions_of(p, r);
        if (q.top || q.int_any) return true;
        for (const Alt& a : q.alts) {
            if (a.kind == Alt::Kind::Int && a.value == v) return true;
            if (a.kind == Alt::Kind::Defer &&
                all_of_defer(a, [&](SymId x) {
                    return int_member(v, x, depth + 1);
                }))
                return true;
        }
        return false;
    }

    bool alt_covered(const Alt& alt, SymId super, const Prods& q, int depth) {
        if (depth > kMaxDepth) return false;
        if (q.top) return true;
        switch (alt.kind) {
            case Alt::Kind::Int: {
                if (q.int_any) return true;
                for (const Alt& a : q.alts)
                    if (a.kind == Alt::Kind::Int && a.value == alt.value)
                        return true;
                return exists_defer(q, [&](const Alt& d) {
                    return all_of_defer(d, [&](SymId r) {
                        return int_member(alt.value, r, depth + 1);
                    });
                });
            }
            case Alt::Kind::Functor: {
                // determinism: at most one production per functor
                for (const Alt& a : q.alts) {
                    if (a.kind != Alt::Kind::Functor ||
                        a.functor != alt.functor)
                        continue;
                    for (size_t i = 0; i < a.arg_props.size(); ++i) {
                        for (SymId rq : a.arg_props[i]) {
                            bool held;
                            if (alt.arg_props[i].empty()) {
                                held = pair(term_sym(), rq, depth + 1);
                            } else {
                                held = std::any_of(
                                    alt.arg_props[i].begin(),
                                    alt.arg_props[i].end(), [&](SymId rp) {
                                        return pair(rp, rq, depth + 1);
                                    });
                            }
                            if (!held) return false;
                        }
                    }
                    return true;
                }
                return exists_defer(q, [&](const Alt& d) {
                    return all_of_defer(d, [&](SymId r) {
                        return alt_covered(alt, r, productions_of(p, r),
                                           depth + 1);
                    });
                });
            }
            case Alt::Kind::Defer: {
                if (alt.defer.empty()) return top_covered(q, depth + 1);
                // intersection of the conjuncts: any one inside super works
                return std::any_of(
                    alt.defer.begin(), alt.defer.end(),
                    [&](SymId r) { return pair(r, super, depth + 1); });
            }
        }
        return false;
    }
};

}  // namespace

bool ContainmentCache::contains(const FlatProgram& p, SymId sub, SymId super) {
    Solver solver{p, memo_};
    bool ok = solver.pair(sub, super, 0);
    if (ok)
        for (const auto& key : solver.pending) memo_.emplace(key, true);
    return ok;
}

bool containment(const FlatProgram& p, SymId sub, SymId super) {
    ContainmentCache cache;
    return cache.contains(p, sub, super);
}

std::map<uint32_t, std::vector<uint32_t>> spec_prop(const FlatProgram& p,
                                                    const MaterializedEscape& esc,
                                                    SymId prop,
                                                    ContainmentCache& cache) {
    std::map<uint32_t, std::vector<uint32_t>> out;
    if (esc.has_top) return out;
    const Predicate* pred = p.find_pred(prop);
    if (!pred)
        throw LoadError(LoadErrorKind::VisibilityViolation,
                        esc.module + ": property " + symbol(prop).name +
                            " is not defined",
                        esc.module);
    if (!pred->is_regtype || pred->arity != 1) return out;

    // the escape production for each hidden functor, where unique
    std::map<SymId, const Clause*> by_functor;
    std::set<SymId> ambiguous;
    for (const Clause& c : esc.clauses) {
        const Term& pat = c.head.args()[0];
        if (!pat.is_comp()) continue;  // usr fallback
        if (!by_functor.emplace(pat.sym(), &c).second) ambiguous.insert(pat.sym());
    }

    auto position_of = [](const Term& pattern, VarId v) -> int {
        for (size_t i = 0; i < pattern.arity(); ++i)
            if (pattern.args()[i].is_var() && pattern.args()[i].var_id() == v)
                return static_cast<int>(i);
        return -1;
    };

    for (uint32_t ci = 0; ci < pred->clauses.size(); ++ci) {
        const Clause& c = pred->clauses[ci];
        const Term& pat = c.head.args()[0];
        if (!pat.is_comp()) continue;  // var/int heads stay verbatim
        if (symbol(pat.sym()).qualifier != esc.module) continue;
        auto hit = by_functor.find(pat.sym());
        if (hit == by_functor.end() || ambiguous.contains(pat.sym())) continue;

        const Clause& e = *hit->second;
        const Term& epat = e.head.args()[0];
        std::vector<std::vector<SymId>> guarantees(pat.arity());
        for (const Term& lit : e.body) {
            int pos = position_of(epat, lit.args()[0].var_id());
            if (pos >= 0) guarantees[pos].push_back(lit.sym());
        }

        // group the clause's literals by argument position; a position's
        // literals drop only when every one of them is covered
        std::map<int, std::vector<uint32_t>> by_pos;
        for (uint32_t li = 0; li < c.body.size(); ++li) {
            int pos = position_of(pat, c.body[li].args()[0].var_id());
            if (pos >= 0) by_pos[pos].push_back(li);
        }
        std::vector<uint32_t> drops;
        for (const auto& [pos, lits] : by_pos) {
            bool all = std::all_of(lits.begin(), lits.end(), [&](uint32_t li) {
                SymId want = c.body[li].sym();
                return std::any_of(guarantees[pos].begin(),
                                   guarantees[pos].end(), [&](SymId have) {
                                       return cache.contains(p, have, want);
                                   });
            });
            if (all)
                drops.insert(drops.end(), lits.begin(), lits.end());
        }
        if (!drops.empty()) {
            std::sort(drops.begin(), drops.end());
            out.emplace(ci, std::move(drops));
        }
    }
    return out;
}

namespace {

PredArity head_pa(const Term& head) {
    return {symbol(head.sym()).name, static_cast<uint32_t>(head.arity())};
}

Term rename_root(const Term& t, const std::string& name) {
    std::vector<Term> args(t.args().begin(), t.args().end());
    return Term::comp(
        intern_symbol(name, static_cast<uint32_t>(t.arity())), std::move(args));
}

}  // namespace

ShallowModule shallow_interface(const FlatProgram& p,
                                const ModuleSource& original) {
    ShallowModule out;
    out.source = original;
    if (original.exports.empty()) return out;

    const ModuleSource& m = original;
    EscapeDescription desc = escaping_terms(p, m.name);
    MaterializedEscape esc = materialize(p, desc);
    ContainmentCache cache;

    std::set<PredArity> exported(m.exports.begin(), m.exports.end());
    std::set<PredArity> with_clauses, with_assertions;
    for (const Clause& c : m.clauses) with_clauses.insert(head_pa(c.head));
    for (const RawAssertion& a : m.assertions)
        with_assertions.insert(head_pa(a.head));

    std::set<PredArity> wrapped;
    for (const PredArity& e : m.exports)
        if (with_clauses.contains(e) || with_assertions.contains(e))
            wrapped.insert(e);

    // local names already taken, to reject collisions with generated ones
    std::set<PredArity> taken(exported);
    for (const auto& pa : m.regtypes) taken.insert(pa);
    for (const auto& pa : with_clauses) taken.insert(pa);
    for (const auto& pa : with_assertions) taken.insert(pa);
    auto claim = [&](const PredArity& pa) {
        if (taken.contains(pa))
            throw LoadError(LoadErrorKind::DuplicateDefinition,
                            m.name + ": generated predicate " + pa.name + "/" +
                                std::to_string(pa.arity) +
                                " collides with an existing one",
                            m.name);
    };

    // props in exported preconditions whose specialization drops literals
    std::map<std::string, std::map<uint32_t, std::vector<uint32_t>>> changed;
    std::set<std::string> settled;
    for (const RawAssertion& a : m.assertions) {
        if (!exported.contains(head_pa(a.head))) continue;
        for (const Term& lit : a.pre) {
            if (!lit.is_comp() || lit.arity() != 1) continue;
            const std::string& n = symbol(lit.sym()).name;
            if (!settled.insert(n).second) continue;
            if (n == "int" || n == "term" || n == "usr") continue;
            const Predicate* pr = p.find_pred(intern_symbol(n, 1, m.name));
            if (!pr || !pr->is_regtype) continue;  // imported or not a regtype
            auto drops = spec_prop(p, esc, pr->sym, cache);
            if (!drops.empty()) changed.emplace(n, std::move(drops));
        }
    }

    ModuleSource t;
    t.name = m.name;
    t.exports = m.exports;
    t.imports = m.imports;
    t.hidden = m.hidden;
    t.regtypes = m.regtypes;

    auto inner_of = [](const PredArity& pa) {
        return PredArity{pa.name + "$inner", pa.arity};
    };
    for (const PredArity& pa : wrapped) claim(inner_of(pa));

    // clauses: exported heads move to $inner, call sites follow; the
    // wrapper clause goes right before the first moved clause
    std::set<PredArity> wrapper_emitted;
    for (const Clause& c : m.clauses) {
        Clause nc = c;
        PredArity pa = head_pa(c.head);
        bool moves = wrapped.contains(pa);
        if (moves && wrapper_emitted.insert(pa).second) {
            Clause w;
            std::vector<Term> args;
            for (uint32_t i = 0; i < pa.arity; ++i)
                args.push_back(Term::var(i));
            w.head = Term::comp(intern_symbol(pa.name, pa.arity), args);
            w.body.push_back(Term::comp(
                intern_symbol(inner_of(pa).name, pa.arity), std::move(args)));
            t.clauses.push_back(std::move(w));
        }
        if (moves) nc.head = rename_root(c.head, inner_of(pa).name);
        for (Term& lit : nc.body) {
            if (!lit.is_comp()) continue;
            PredArity called = head_pa(lit);
            if (wrapped.contains(called))
                lit = rename_root(lit, inner_of(called).name);
        }
        t.clauses.push_back(std::move(nc));
    }
    // wrappers for exported predicates that have assertions but no clauses
    for (const PredArity& pa : m.exports) {
        if (!wrapped.contains(pa) || wrapper_emitted.contains(pa)) continue;
        Clause w;
        std::vector<Term> args;
        for (uint32_t i = 0; i < pa.arity; ++i) args.push_back(Term::var(i));
        w.head = Term::comp(intern_symbol(pa.name, pa.arity), args);
        w.body.push_back(Term::comp(
            intern_symbol(inner_of(pa).name, pa.arity), std::move(args)));
        t.clauses.push_back(std::move(w));
    }

    // assertions: the wrapper keeps the predicate's name with shallow
    // preconditions; the inner predicate carries the original conditions
    for (const RawAssertion& a : m.assertions) {
        PredArity pa = head_pa(a.head);
        if (!wrapped.contains(pa)) {
            t.assertions.push_back(a);
            continue;
        }
        RawAssertion wrapper = a;
        for (Term& lit : wrapper.pre) {
            if (!lit.is_comp() || lit.arity() != 1) continue;
            const std::string& n = symbol(lit.sym()).name;
            if (changed.contains(n)) lit = rename_root(lit, n + "#");
        }
        RawAssertion inner = a;
        inner.head = rename_root(a.head, inner_of(pa).name);
        t.assertions.push_back(std::move(wrapper));
        t.assertions.push_back(std::move(inner));
    }

    // shallow regtype variants
    for (const auto& [n, drops] : changed) {
        PredArity spa{n + "#", 1};
        claim(spa);
        t.regtypes.push_back(spa);
        uint32_t ci = 0;
        for (const Clause& c : m.clauses) {
            if (head_pa(c.head) != PredArity{n, 1}) continue;
            Clause nc;
            nc.line = c.line;
            nc.head = rename_root(c.head, spa.name);
            auto hit = drops.find(ci);
            for (uint32_t li = 0; li < c.body.size(); ++li) {
                bool drop = hit != drops.end() &&
                            std::binary_search(hit->second.begin(),
                                               hit->second.end(), li);
                if (!drop) nc.body.push_back(c.body[li]);
            }
            t.clauses.push_back(std::move(nc));
            ++ci;
        }
    }

    // wrapper condition ids coincide with the original ones; inner ids map
    // back through the renaming
    for (const PredArity& pa : wrapped) {
        size_t count = 0;
        for (const RawAssertion& a : m.assertions)
            if (head_pa(a.head) == pa) ++count;
        if (count == 0) continue;
        std::string ar = "/" + std::to_string(pa.arity) + "#";
        for (size_t k = 0; k <= count; ++k) {
            std::string suffix = ar + std::to_string(k);
            out.condition_rename.emplace(
                m.name + ":" + inner_of(pa).name + suffix,
                m.name + ":" + pa.name + suffix);
        }
    }

    out.source = std::move(t);
    return out;
}

namespace {

void write_conj_src(std::ostream& os, const std::vector<Term>& conj,
                    const PrintOptions& opts) {
    os << '(';
    for (size_t i = 0; i < conj.size(); ++i) {
        if (i) os << ", ";
        os << term_to_string(conj[i], opts);
    }
    os << ')';
}

void write_assertion_src(std::ostream& os, const RawAssertion& a) {
    std::vector<const Term*> terms{&a.head};
    for (const Term& l : a.pre) terms.push_back(&l);
    for (const Term& l : a.post) terms.push_back(&l);
    std::vector<std::string> names = listing_names(terms);
    PrintOptions opts{.qualify = false, .var_names = &names};
    os << ":- pred " << term_to_string(a.head, opts);
    if (!a.pre.empty()) {
        os << " : ";
        write_conj_src(os, a.pre, opts);
    }
    if (!a.post.empty()) {
        os << " => ";
        write_conj_src(os, a.post, opts);
    }
    os << ".\n";
}

std::string pa_src(const PredArity& pa) {
    return pa.name + "/" + std::to_string(pa.arity);
}

}  // namespace

std::string shallow_module_to_string(const ShallowModule& sm) {
    const ModuleSource& m = sm.source;
    std::ostringstream os;
    os << ":- module(" << m.name << ", [";
    for (size_t i = 0; i < m.exports.size(); ++i) {
        if (i) os << ", ";
        os << pa_src(m.exports[i]);
    }
    os << "]).\n";
    for (const auto& [from, list] : m.imports) {
        os << ":- use_module(" << from << ", [";
        for (size_t i = 0; i < list.size(); ++i) {
            if (i) os << ", ";
            os << pa_src(list[i]);
        }
        os << "]).\n";
    }
    for (const PredArity& h : m.hidden) os << ":- hide(" << pa_src(h) << ").\n";

    std::set<PredArity> regtypes(m.regtypes.begin(), m.regtypes.end());
    std::map<PredArity, std::vector<const RawAssertion*>> asserts;
    std::vector<PredArity> assert_order;
    for (const RawAssertion& a : m.assertions) {
        PredArity pa = head_pa(a.head);
        if (!asserts.contains(pa)) assert_order.push_back(pa);
        asserts[pa].push_back(&a);
    }

    auto write_block = [&](const PredArity& pa) {
        os << '\n';
        if (regtypes.contains(pa)) os << ":- regtype " << pa_src(pa) << ".\n";
        if (auto it = asserts.find(pa); it != asserts.end())
            for (const RawAssertion* a : it->second) write_assertion_src(os, *a);
        for (const Clause& c : m.clauses)
            if (head_pa(c.head) == pa) os << clause_to_string(c) << '\n';
    };

    // regtype blocks first (declaration order), then predicates in order
    // of first clause, then assertion-only predicates
    std::set<PredArity> done;
    for (const PredArity& pa : m.regtypes)
        if (done.insert(pa).second) write_block(pa);
    for (const Clause& c : m.clauses) {
        PredArity pa = head_pa(c.head);
        if (done.insert(pa).second) write_block(pa);
    }
    for (const PredArity& pa : assert_order)
        if (done.insert(pa).second) write_block(pa);
    return os.str();
}

ShallowProgram shallow_flatten(const std::vector<ModuleSource>& sources) {
    FlatProgram flat = flatten(sources);
    ShallowProgram out;
    std::vector<ModuleSource> transformed;
    transformed.reserve(sources.size());
    for (const ModuleSource& src : sources) {
        ShallowModule sm = shallow_interface(flat, src);
        out.condition_rename.insert(sm.condition_rename.begin(),
                                    sm.condition_rename.end());
        transformed.push_back(std::move(sm.source));
    }
    out.program = flatten(transformed);
    return out;
}

}  // namespace modlog
