#include "modlog/flatten.hpp"

#include <algorithm>
#include <map>

#include "modlog/assertions.hpp"

namespace modlog {

namespace {

struct ModuleCtx {
    const ModuleSource* src = nullptr;
    uint32_t index = 0;
    std::map<PredArity, SymId> local_preds;
    std::map<PredArity, std::string> import_from;  // name/arity -> module
    std::set<PredArity> hidden;
};

[[noreturn]] void err(LoadErrorKind kind, const std::string& module,
                      const std::string& msg, int line = 0) {
    throw LoadError(kind, module.empty() ? msg : module + ": " + msg, module,
                    line);
}

std::string pa_str(const PredArity& pa) {
    return pa.name + "/" + std::to_string(pa.arity);
}

bool is_builtin_name(const PredArity& pa) {
    static const PredArity names[] = {
        {"=", 2},  {"<", 2},   {">", 2},    {"=<", 2}, {">=", 2},
        {"=:=", 2}, {"int", 1}, {"term", 1}, {"usr", 1}, {"true", 0},
    };
    for (const auto& n : names)
        if (n == pa) return true;
    return false;
}

// data-position qualification: hidden functors take the module qualifier
Term qualify_data(const Term& t, const ModuleCtx& ctx) {
    switch (t.kind()) {
        case Term::Kind::Var:
        case Term::Kind::Int:
            return t;
        case Term::Kind::Comp: {
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const Term& a : t.args()) args.push_back(qualify_data(a, ctx));
            const Symbol& sym = symbol(t.sym());
            SymId s = t.sym();
            if (ctx.hidden.contains(
                    PredArity{sym.name, static_cast<uint32_t>(t.arity())}))
                s = intern_symbol(sym.name, static_cast<uint32_t>(t.arity()),
                                  ctx.src->name);
            return Term::comp(s, std::move(args));
        }
    }
    return t;
}

SymId resolve_call(const PredArity& pa, const ModuleCtx& ctx, int line) {
    auto local = ctx.local_preds.find(pa);
    if (local != ctx.local_preds.end()) return local->second;
    auto imp = ctx.import_from.find(pa);
    if (imp != ctx.import_from.end())
        return intern_symbol(pa.name, pa.arity, imp->second);
    if (is_builtin_name(pa)) return intern_symbol(pa.name, pa.arity);
    err(LoadErrorKind::VisibilityViolation, ctx.src->name,
        "unknown predicate " + pa_str(pa) + " in clause body", line);
}

Term qualify_literal(const Term& lit, const ModuleCtx& ctx, int line) {
    const Symbol& sym = symbol(lit.sym());
    PredArity pa{sym.name, static_cast<uint32_t>(lit.arity())};
    SymId root = resolve_call(pa, ctx, line);
    std::vector<Term> args;
    args.reserve(lit.arity());
    for (const Term& a : lit.args()) args.push_back(qualify_data(a, ctx));
    return Term::comp(root, std::move(args));
}

// Deterministic regular types: heads must be a variable, an integer, or a
// functor applied to distinct variables; bodies apply unary properties to
// head variables. Either a single variable-head clause or functor/integer
// heads with pairwise distinct keys.
void validate_regtype(const Predicate& pred, const std::string& module) {
    size_t var_heads = 0;
    std::set<std::pair<int64_t, int64_t>> keys;
    for (const Clause& c : pred.clauses) {
        const Term& arg = c.head.args()[0];
        std::vector<VarId> pattern_vars;
        switch (arg.kind()) {
            case Term::Kind::Var:
                ++var_heads;
                pattern_vars.push_back(arg.var_id());
                break;
            case Term::Kind::Int:
                if (!keys.insert({1, arg.int_value()}).second)
                    err(LoadErrorKind::DuplicateDefinition, module,
                        "regtype " + symbol(pred.sym).name +
                            " has two clauses for the same integer",
                        c.line);
                break;
            case Term::Kind::Comp: {
                if (!keys.insert({0, static_cast<int64_t>(arg.sym())}).second)
                    err(LoadErrorKind::DuplicateDefinition, module,
                        "regtype " + symbol(pred.sym).name +
                            " has two clauses for functor " +
                            symbol(arg.sym()).name,
                        c.line);
                for (const Term& sub : arg.args()) {
                    if (!sub.is_var())
                        err(LoadErrorKind::ParseError, module,
                            "regtype clause head must apply a functor to "
                            "variables",
                            c.line);
                    if (std::find(pattern_vars.begin(), pattern_vars.end(),
                                  sub.var_id()) != pattern_vars.end())
                        err(LoadErrorKind::ParseError, module,
                            "regtype clause head repeats a variable", c.line);
                    pattern_vars.push_back(sub.var_id());
                }
                break;
            }
        }
        for (const Term& lit : c.body) {
            bool ok = lit.is_comp() && lit.arity() == 1 &&
                      lit.args()[0].is_var() &&
                      std::find(pattern_vars.begin(), pattern_vars.end(),
                                lit.args()[0].var_id()) != pattern_vars.end();
            if (!ok)
                err(LoadErrorKind::ParseError, module,
                    "regtype body must apply unary properties to head "
                    "variables",
                    c.line);
        }
    }
    if (var_heads > 1 || (var_heads == 1 && pred.clauses.size() > 1))
        err(LoadErrorKind::DuplicateDefinition, module,
            "regtype " + symbol(pred.sym).name +
                " must have a single variable clause or distinct functor "
                "clauses");
}

void collect_syms(const Term& t, std::set<SymId>& out) {
    if (t.is_comp()) {
        out.insert(t.sym());
        for (const Term& a : t.args()) collect_syms(a, out);
    }
}

}  // namespace

FlatProgram flatten(const std::vector<ModuleSource>& sources) {
    FlatProgram prog;
    prog.mod_names.push_back(std::string(kUserModule));

    std::map<std::string, ModuleCtx> ctxs;
    for (const ModuleSource& src : sources) {
        if (src.name == kUserModule)
            err(LoadErrorKind::DuplicateDefinition, src.name,
                "module name 'user' is reserved");
        if (ctxs.contains(src.name))
            err(LoadErrorKind::DuplicateDefinition, src.name,
                "module " + src.name + " is loaded twice");
        ModuleCtx ctx;
        ctx.src = &src;
        ctx.index = static_cast<uint32_t>(prog.mod_names.size());
        prog.mod_names.push_back(src.name);
        ctxs.emplace(src.name, std::move(ctx));
    }

    // interfaces: hidden functors, exports, local predicate symbols
    for (const ModuleSource& src : sources) {
        ModuleCtx& ctx = ctxs.at(src.name);
        ModuleInfo info;
        info.name = src.name;
        info.index = ctx.index;
        info.export_list = src.exports;
        info.import_decls = src.imports;

        for (const PredArity& h : src.hidden) {
            ctx.hidden.insert(h);
            info.hidden.insert(intern_symbol(h.name, h.arity, src.name));
            prog.hidden_by_name[h].push_back(src.name);
        }

        auto add_local = [&](const PredArity& pa) {
            if (is_builtin_name(pa))
                err(LoadErrorKind::DuplicateDefinition, src.name,
                    "predicate " + pa_str(pa) + " redefines a builtin");
            ctx.local_preds.emplace(pa,
                                    intern_symbol(pa.name, pa.arity, src.name));
        };
        for (const Clause& c : src.clauses)
            add_local(PredArity{symbol(c.head.sym()).name,
                                static_cast<uint32_t>(c.head.arity())});
        for (const PredArity& r : src.regtypes) add_local(r);
        for (const PredArity& e : src.exports) add_local(e);
        for (const RawAssertion& a : src.assertions)
            add_local(PredArity{symbol(a.head.sym()).name,
                                static_cast<uint32_t>(a.head.arity())});

        prog.modules.emplace(src.name, std::move(info));
    }

    // imports: must name loaded modules and exported predicates
    for (const ModuleSource& src : sources) {
        ModuleCtx& ctx = ctxs.at(src.name);
        ModuleInfo& info = prog.modules.at(src.name);
        for (const auto& [from, list] : src.imports) {
            auto exporter = ctxs.find(from);
            if (exporter == ctxs.end())
                err(LoadErrorKind::ImportNotExported, src.name,
                    "imported module " + from + " is not loaded");
            for (const PredArity& pa : list) {
                const auto& exps = exporter->second.src->exports;
                if (std::find(exps.begin(), exps.end(), pa) == exps.end())
                    err(LoadErrorKind::ImportNotExported, src.name,
                        pa_str(pa) + " is not exported by " + from);
                auto [it, fresh] = ctx.import_from.emplace(pa, from);
                if (!fresh && it->second != from)
                    err(LoadErrorKind::VisibilityViolation, src.name,
                        pa_str(pa) + " imported from both " + it->second +
                            " and " + from);
                if (ctx.hidden.contains(pa))
                    err(LoadErrorKind::VisibilityViolation, src.name,
                        pa_str(pa) + " is hidden here but imported from " +
                            from);
                info.import_syms.insert(intern_symbol(pa.name, pa.arity, from));
            }
        }
    }

    // clauses: qualify data, resolve calls, attach to predicates
    for (const ModuleSource& src : sources) {
        ModuleCtx& ctx = ctxs.at(src.name);
        auto ensure_pred = [&](const PredArity& pa) -> Predicate& {
            SymId s = ctx.local_preds.at(pa);
            auto [it, fresh] = prog.preds.try_emplace(s);
            Predicate& p = it->second;
            if (fresh) {
                p.sym = s;
                p.module = src.name;
                p.mod_idx = ctx.index;
                p.arity = pa.arity;
            }
            return p;
        };
        for (const auto& [pa, s] : ctx.local_preds) ensure_pred(pa);
        for (const PredArity& e : src.exports) ensure_pred(e).exported = true;
        for (const PredArity& r : src.regtypes) ensure_pred(r).is_regtype = true;

        for (const Clause& c : src.clauses) {
            PredArity pa{symbol(c.head.sym()).name,
                         static_cast<uint32_t>(c.head.arity())};
            Predicate& pred = ensure_pred(pa);
            Clause qc;
            qc.line = c.line;
            qc.var_names = c.var_names;
            std::vector<Term> head_args;
            head_args.reserve(c.head.arity());
            for (const Term& a : c.head.args())
                head_args.push_back(qualify_data(a, ctx));
            qc.head = Term::comp(pred.sym, std::move(head_args));
            qc.body.reserve(c.body.size());
            for (const Term& lit : c.body)
                qc.body.push_back(qualify_literal(lit, ctx, c.line));
            pred.clauses.push_back(std::move(qc));
        }
    }

    // assertions, grouped per predicate in order of first appearance
    for (const ModuleSource& src : sources) {
        ModuleCtx& ctx = ctxs.at(src.name);
        std::vector<PredArity> order;
        std::map<PredArity, std::vector<RawAssertion>> groups;
        for (const RawAssertion& a : src.assertions) {
            PredArity pa{symbol(a.head.sym()).name,
                         static_cast<uint32_t>(a.head.arity())};
            if (!groups.contains(pa)) order.push_back(pa);
            groups[pa].push_back(a);
        }
        PropResolver resolve = [&](const std::string& name,
                                   uint32_t arity) -> SymId {
            return resolve_call(PredArity{name, arity}, ctx, 0);
        };
        for (const PredArity& pa : order) {
            auto conditions = normalize_assertions(src.name, pa.name, pa.arity,
                                                   groups.at(pa), resolve);
            Predicate& pred = prog.preds.at(ctx.local_preds.at(pa));
            for (AssertionCondition& c : conditions) {
                uint32_t slot = static_cast<uint32_t>(prog.conditions.size());
                prog.condition_index.emplace(c.id, slot);
                pred.conditions.push_back(slot);
                prog.conditions.push_back(std::move(c));
            }
        }
    }

    // regtype shape checks and first-argument indexes
    for (auto& [sym, pred] : prog.preds) {
        if (pred.is_regtype) validate_regtype(pred, pred.module);
        build_first_arg_index(pred);
    }

    // interface symbol sets (defs/exps/imps) and the query import set
    for (const ModuleSource& src : sources) {
        ModuleCtx& ctx = ctxs.at(src.name);
        ModuleInfo& info = prog.modules.at(src.name);
        for (const auto& [pa, s] : ctx.local_preds) info.defs.insert(s);
        for (SymId h : info.hidden) info.defs.insert(h);
        for (const PredArity& e : src.exports)
            info.exps.insert(ctx.local_preds.at(e));

        std::set<SymId> seen;
        for (const auto& [pa, s] : ctx.local_preds) {
            auto it = prog.preds.find(s);
            if (it == prog.preds.end()) continue;
            for (const Clause& c : it->second.clauses) {
                collect_syms(c.head, seen);
                for (const Term& lit : c.body) collect_syms(lit, seen);
            }
        }
        for (SymId s : seen)
            if (!info.defs.contains(s)) info.imps.insert(s);

        for (SymId e : info.exps) prog.query_imports.insert(e);
    }

    return prog;
}

}  // namespace modlog
