#include "modlog/program.hpp"

#include <array>

namespace modlog {

std::string_view load_error_kind_name(LoadErrorKind k) {
    switch (k) {
        case LoadErrorKind::HiddenFunctorLeak: return "hidden-functor-leak";
        case LoadErrorKind::ImportNotExported: return "import-not-exported";
        case LoadErrorKind::DuplicateDefinition: return "duplicate-definition";
        case LoadErrorKind::ParseError: return "parse-error";
        case LoadErrorKind::VisibilityViolation: return "visibility-violation";
    }
    return "?";
}

namespace {

struct Builtins {
    SymId unify, lt, gt, le, ge, eq_num, int1, term1, usr1;
    std::array<SymId, 9> all;

    Builtins() {
        unify = intern_symbol("=", 2);
        lt = intern_symbol("<", 2);
        gt = intern_symbol(">", 2);
        le = intern_symbol("=<", 2);
        ge = intern_symbol(">=", 2);
        eq_num = intern_symbol("=:=", 2);
        int1 = intern_symbol("int", 1);
        term1 = intern_symbol("term", 1);
        usr1 = intern_symbol("usr", 1);
        all = {unify, lt, gt, le, ge, eq_num, int1, term1, usr1};
    }
};

const Builtins& builtins() {
    static Builtins b;
    return b;
}

}  // namespace

bool is_builtin(SymId s) {
    for (SymId b : builtins().all)
        if (b == s) return true;
    return false;
}

SymId builtin_sym(std::string_view name, uint32_t arity) {
    return intern_symbol(name, arity);
}

uint32_t FlatProgram::mod_index(std::string_view name) const {
    for (uint32_t i = 0; i < mod_names.size(); ++i)
        if (mod_names[i] == name) return i;
    return 0;
}

const Predicate* FlatProgram::find_pred(SymId s) const {
    auto it = preds.find(s);
    return it == preds.end() ? nullptr : &it->second;
}

bool visible(const FlatProgram& p, SymId g, uint32_t from_idx) {
    if (is_builtin(g)) return true;
    const Predicate* pred = p.find_pred(g);
    if (!pred) return false;
    if (pred->mod_idx == from_idx) return true;
    if (!pred->exported) return false;
    if (from_idx == 0) return p.query_imports.contains(g);
    auto it = p.modules.find(p.mod_names[from_idx]);
    return it != p.modules.end() && it->second.import_syms.contains(g);
}

bool visible(const FlatProgram& p, SymId g, std::string_view from) {
    return visible(p, g, p.mod_index(from));
}

bool usr_only(const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Var:
        case Term::Kind::Int:
            return true;
        case Term::Kind::Comp: {
            if (!symbol(t.sym()).is_user()) return false;
            for (const Term& a : t.args())
                if (!usr_only(a)) return false;
            return true;
        }
    }
    return true;
}

void build_first_arg_index(Predicate& pred) {
    pred.index = {};
    if (pred.arity == 0) return;
    pred.index.usable = true;
    for (uint32_t i = 0; i < pred.clauses.size(); ++i) {
        const Term& arg = pred.clauses[i].head.args()[0];
        switch (arg.kind()) {
            case Term::Kind::Var:
                pred.index.var_heads.push_back(i);
                break;
            case Term::Kind::Int:
                pred.index.buckets[{1, arg.int_value()}].push_back(i);
                break;
            case Term::Kind::Comp:
                pred.index.buckets[{0, static_cast<int64_t>(arg.sym())}]
                    .push_back(i);
                break;
        }
    }
}

}  // namespace modlog
