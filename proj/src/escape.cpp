#include "modlog/escape.hpp"

#include <algorithm>
#include <sstream>

#include "modlog/printer.hpp"
#include "modlog/shallow.hpp"

namespace modlog {

namespace {

SymId exported_pred_sym(const std::string& module, const PredArity& pa) {
    return intern_symbol(pa.name, pa.arity, module);
}

struct PropCollector {
    std::set<SymId> props;
    bool has_top = false;

    void add(SymId s) {
        const Symbol& sym = symbol(s);
        if (s == builtin_sym("term", 1)) {
            has_top = true;
            return;
        }
        if (s == builtin_sym("usr", 1)) return;  // usr is always included
        props.insert(s);
        (void)sym;
    }

    void add_conj(const std::vector<Term>& conj) {
        for (const Term& lit : conj)
            if (lit.is_comp()) add(lit.sym());
    }
};

bool name_before(SymId a, SymId b) {
    const Symbol& sa = symbol(a);
    const Symbol& sb = symbol(b);
    return std::tie(sa.name, sa.arity, sa.qualifier) <
           std::tie(sb.name, sb.arity, sb.qualifier);
}

}  // namespace

EscapeDescription escaping_terms(const FlatProgram& p,
                                 const std::string& module) {
    const ModuleInfo& info = p.modules.at(module);
    PropCollector out;

    // Posts of success conditions of exported predicates
    for (const PredArity& pa : info.export_list) {
        const Predicate* pred = p.find_pred(exported_pred_sym(module, pa));
        if (!pred) continue;
        for (uint32_t slot : pred->conditions) {
            const AssertionCondition& c = p.condition(slot);
            if (c.kind == AssertionCondition::Kind::Success)
                out.add_conj(c.post);
        }
    }

    // Pres of calls conditions of imported predicates
    for (const auto& [from, list] : info.import_decls) {
        for (const PredArity& pa : list) {
            const Predicate* pred = p.find_pred(exported_pred_sym(from, pa));
            if (!pred) continue;
            for (uint32_t slot : pred->conditions) {
                const AssertionCondition& c = p.condition(slot);
                if (c.kind != AssertionCondition::Kind::Calls) continue;
                for (const auto& disjunct : c.pre) out.add_conj(disjunct);
            }
        }
    }

    EscapeDescription desc;
    desc.module = module;
    desc.has_top = out.has_top;
    if (out.has_top) return desc;  // everything escapes; props are moot

    std::vector<SymId> props(out.props.begin(), out.props.end());
    std::sort(props.begin(), props.end(), name_before);

    // subsumption pruning: drop P when some kept Q already contains it
    // (an equivalent pair keeps its name-order representative)
    ContainmentCache cache;
    std::vector<bool> dropped(props.size(), false);
    for (size_t i = 0; i < props.size(); ++i) {
        for (size_t j = 0; j < props.size(); ++j) {
            if (i == j || dropped[j]) continue;
            if (!cache.contains(p, props[i], props[j])) continue;
            if (j > i && cache.contains(p, props[j], props[i])) continue;
            dropped[i] = true;
            break;
        }
    }
    for (size_t i = 0; i < props.size(); ++i)
        if (!dropped[i]) desc.props.push_back(props[i]);
    return desc;
}

MaterializedEscape materialize(const FlatProgram& p,
                               const EscapeDescription& desc) {
    MaterializedEscape out;
    out.module = desc.module;
    out.sym = intern_symbol("esc_" + desc.module, 1, desc.module);
    out.has_top = desc.has_top;

    VarId v0 = 0;
    auto head_of = [&](Term arg) { return Term::comp(out.sym, {arg}); };

    if (desc.has_top) {
        out.clauses.push_back({head_of(Term::var(v0)), {}, {}, 0});
        return out;
    }

    // hidden-functor productions reachable from the props (variable-headed
    // prop clauses defer to the props in their bodies)
    std::vector<SymId> work(desc.props.begin(), desc.props.end());
    std::set<SymId> seen(work.begin(), work.end());
    std::vector<Clause> emitted;
    for (size_t w = 0; w < work.size(); ++w) {
        const Predicate* pred = p.find_pred(work[w]);
        if (!pred) {
            if (is_builtin(work[w])) continue;  // int: covered by usr
            throw LoadError(LoadErrorKind::VisibilityViolation,
                            desc.module + ": escape property " +
                                symbol(work[w]).name + " is not defined",
                            desc.module);
        }
        for (const Clause& c : pred->clauses) {
            const Term& pattern = c.head.args()[0];
            if (pattern.is_var()) {
                for (const Term& lit : c.body)
                    if (lit.is_comp() && seen.insert(lit.sym()).second)
                        work.push_back(lit.sym());
                continue;
            }
            // user-functor and integer heads are subsumed by the usr clause
            if (!pattern.is_comp()) continue;
            if (symbol(pattern.sym()).qualifier != desc.module) continue;
            Clause ec{head_of(pattern), c.body, c.var_names, c.line};
            bool dup = std::any_of(
                emitted.begin(), emitted.end(), [&](const Clause& e) {
                    return e.head == ec.head && e.body == ec.body;
                });
            if (!dup) emitted.push_back(std::move(ec));
        }
    }

    std::stable_sort(emitted.begin(), emitted.end(),
                     [](const Clause& a, const Clause& b) {
                         return name_before(a.head.args()[0].sym(),
                                            b.head.args()[0].sym());
                     });
    out.clauses = std::move(emitted);

    Term x = Term::var(v0);
    out.clauses.push_back(
        {head_of(x), {Term::comp(builtin_sym("usr", 1), {x})}, {}, 0});
    return out;
}

void install_escape(FlatProgram& p, const MaterializedEscape& esc) {
    if (p.preds.contains(esc.sym))
        throw LoadError(LoadErrorKind::DuplicateDefinition,
                        esc.module + ": predicate " + symbol(esc.sym).name +
                            "/1 already exists",
                        esc.module);
    Predicate pred;
    pred.sym = esc.sym;
    pred.module = esc.module;
    pred.mod_idx = p.mod_index(esc.module);
    pred.arity = 1;
    pred.clauses = esc.clauses;
    build_first_arg_index(pred);
    p.preds.emplace(esc.sym, std::move(pred));
}

std::string escape_to_string(const MaterializedEscape& esc) {
    std::ostringstream os;
    for (const Clause& c : esc.clauses)
        os << clause_to_string(c, /*qualify=*/true) << '\n';
    return os.str();
}

}  // namespace modlog
