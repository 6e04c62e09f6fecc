#include "modlog/assertions.hpp"

#include <algorithm>

namespace modlog {

namespace {

// head must be p(X1,...,Xn) with distinct variables; returns var -> position
std::vector<std::optional<uint32_t>> head_positions(const RawAssertion& a,
                                                    const std::string& module,
                                                    const std::string& name) {
    std::vector<std::optional<uint32_t>> pos;
    uint32_t i = 0;
    for (const Term& arg : a.head.args()) {
        if (!arg.is_var())
            throw LoadError(LoadErrorKind::ParseError,
                            module + ": assertion head for " + name +
                                " must apply the predicate to variables",
                            module, a.line);
        VarId v = arg.var_id();
        if (v >= pos.size()) pos.resize(v + 1);
        if (pos[v])
            throw LoadError(LoadErrorKind::ParseError,
                            module + ": assertion head for " + name +
                                " repeats a variable",
                            module, a.line);
        pos[v] = i++;
    }
    return pos;
}

Term formalize_literal(const Term& lit,
                       const std::vector<std::optional<uint32_t>>& pos,
                       const PropResolver& resolve, const std::string& module,
                       int line) {
    auto bad = [&](const std::string& why) -> LoadError {
        return LoadError(LoadErrorKind::ParseError,
                         module + ": " + why + " in assertion", module, line);
    };
    if (!lit.is_comp() || lit.arity() != 1)
        throw bad("property literal must be a unary application");
    const Term& arg = lit.args()[0];
    if (!arg.is_var()) throw bad("property literal must be applied to a variable");
    VarId v = arg.var_id();
    if (v >= pos.size() || !pos[v])
        throw bad("variable not present in the assertion head");

    const Symbol& sym = symbol(lit.sym());
    SymId resolved;
    if (sym.name == "int" || sym.name == "term" || sym.name == "usr")
        resolved = builtin_sym(sym.name, 1);
    else
        resolved = resolve(sym.name, 1);
    return Term::comp(resolved, {Term::var(*pos[v])});
}

std::vector<Term> formalize_conj(const std::vector<Term>& conj,
                                 const std::vector<std::optional<uint32_t>>& pos,
                                 const PropResolver& resolve,
                                 const std::string& module, int line) {
    std::vector<Term> out;
    out.reserve(conj.size());
    for (const Term& lit : conj)
        out.push_back(formalize_literal(lit, pos, resolve, module, line));
    return out;
}

}  // namespace

std::vector<AssertionCondition> normalize_assertions(
    const std::string& module, const std::string& pred_name, uint32_t arity,
    const std::vector<RawAssertion>& assertions, const PropResolver& resolve) {
    std::vector<AssertionCondition> out;
    if (assertions.empty()) return out;

    SymId pred = intern_symbol(pred_name, arity, module);
    std::string base =
        module + ":" + pred_name + "/" + std::to_string(arity) + "#";

    AssertionCondition calls;
    calls.id = base + "0";
    calls.pred = pred;
    calls.arity = arity;
    calls.kind = AssertionCondition::Kind::Calls;

    std::vector<AssertionCondition> successes;
    uint32_t k = 1;
    for (const RawAssertion& a : assertions) {
        auto pos = head_positions(a, module, pred_name);
        std::vector<Term> pre =
            formalize_conj(a.pre, pos, resolve, module, a.line);
        std::vector<Term> post =
            formalize_conj(a.post, pos, resolve, module, a.line);

        calls.pre.push_back(pre);

        AssertionCondition s;
        s.id = base + std::to_string(k++);
        s.pred = pred;
        s.arity = arity;
        s.kind = AssertionCondition::Kind::Success;
        s.pre.push_back(std::move(pre));
        s.post = std::move(post);
        successes.push_back(std::move(s));
    }

    out.push_back(std::move(calls));
    for (auto& s : successes) out.push_back(std::move(s));
    return out;
}

std::set<SymId> lit_names(const std::vector<Term>& conj) {
    std::set<SymId> out;
    for (const Term& lit : conj)
        if (lit.is_comp()) out.insert(lit.sym());
    return out;
}

std::set<SymId> lit_names(const std::vector<Term>& conj,
                          const std::vector<VarId>& vars) {
    std::set<SymId> out;
    for (const Term& lit : conj) {
        if (!lit.is_comp() || lit.arity() != 1) continue;
        const Term& arg = lit.args()[0];
        if (!arg.is_var()) continue;
        if (std::find(vars.begin(), vars.end(), arg.var_id()) != vars.end())
            out.insert(lit.sym());
    }
    return out;
}

}  // namespace modlog
