#include "modlog/printer.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace modlog {

namespace {

bool infix_builtin(const Symbol& s) {
    return s.arity == 2 && s.is_user() &&
           (s.name == "=" || s.name == "<" || s.name == ">" ||
            s.name == "=<" || s.name == ">=" || s.name == "=:=");
}

void write_term(std::ostream& os, const Term& t, const PrintOptions& opts) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            VarId v = t.var_id();
            if (opts.var_names && v < opts.var_names->size() &&
                !(*opts.var_names)[v].empty()) {
                os << (*opts.var_names)[v];
            } else {
                os << "_G" << v;
            }
            return;
        }
        case Term::Kind::Int:
            os << t.int_value();
            return;
        case Term::Kind::Comp: {
            const Symbol& sym = symbol(t.sym());
            if (infix_builtin(sym)) {
                write_term(os, t.args()[0], opts);
                os << ' ' << sym.name << ' ';
                write_term(os, t.args()[1], opts);
                return;
            }
            if (opts.qualify && !sym.is_user()) os << sym.qualifier << ':';
            os << sym.name;
            if (t.arity() > 0) {
                os << '(';
                for (size_t i = 0; i < t.arity(); ++i) {
                    if (i) os << ',';
                    write_term(os, t.args()[i], opts);
                }
                os << ')';
            }
            return;
        }
    }
}

// Call-position rendering: the root functor prints without its qualifier
// (predicate ownership is not part of the concrete syntax); argument terms
// still honour opts.qualify for hidden data functors.
void write_literal(std::ostream& os, const Term& t, const PrintOptions& opts) {
    if (!t.is_comp()) {
        write_term(os, t, opts);
        return;
    }
    const Symbol& sym = symbol(t.sym());
    if (infix_builtin(sym)) {
        write_term(os, t.args()[0], opts);
        os << ' ' << sym.name << ' ';
        write_term(os, t.args()[1], opts);
        return;
    }
    os << sym.name;
    if (t.arity() > 0) {
        os << '(';
        for (size_t i = 0; i < t.arity(); ++i) {
            if (i) os << ',';
            write_term(os, t.args()[i], opts);
        }
        os << ')';
    }
}

void count_vars(const Term& t, std::map<VarId, int>& counts,
                std::vector<VarId>& order) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            auto [it, fresh] = counts.emplace(t.var_id(), 0);
            if (fresh) order.push_back(t.var_id());
            ++it->second;
            return;
        }
        case Term::Kind::Int:
            return;
        case Term::Kind::Comp:
            for (const Term& a : t.args()) count_vars(a, counts, order);
            return;
    }
}

}  // namespace

std::string term_to_string(const Term& t, const PrintOptions& opts) {
    std::ostringstream os;
    write_term(os, t, opts);
    return os.str();
}

// Listing names: A1, A2, ... in order of first occurrence; variables that
// occur exactly once in the clause print as _.
std::vector<std::string> listing_names(const std::vector<const Term*>& terms) {
    std::map<VarId, int> counts;
    std::vector<VarId> order;
    for (const Term* t : terms) count_vars(*t, counts, order);
    VarId max_id = 0;
    for (VarId v : order) max_id = std::max(max_id, v);
    std::vector<std::string> names(order.empty() ? 0 : max_id + 1, "_");
    int next = 1;
    for (VarId v : order)
        if (counts[v] > 1) names[v] = "A" + std::to_string(next++);
    return names;
}

std::string clause_to_string(const Clause& c, bool qualify) {
    std::vector<const Term*> terms;
    terms.push_back(&c.head);
    for (const Term& l : c.body) terms.push_back(&l);
    std::vector<std::string> names = listing_names(terms);
    PrintOptions opts{.qualify = qualify, .var_names = &names};

    std::ostringstream os;
    write_literal(os, c.head, opts);
    if (!c.body.empty()) {
        os << " :- ";
        for (size_t i = 0; i < c.body.size(); ++i) {
            if (i) os << ", ";
            write_literal(os, c.body[i], opts);
        }
    }
    os << '.';
    return os.str();
}

namespace {

void write_conj(std::ostream& os, const std::vector<Term>& conj,
                const PrintOptions& opts) {
    if (conj.empty()) {
        os << "true";
        return;
    }
    os << '(';
    for (size_t i = 0; i < conj.size(); ++i) {
        if (i) os << ", ";
        write_literal(os, conj[i], opts);
    }
    os << ')';
}

}  // namespace

std::string condition_to_string(const AssertionCondition& c, bool qualify) {
    // formal variables print positionally as A1..An
    std::vector<std::string> names;
    names.reserve(c.arity);
    for (uint32_t i = 0; i < c.arity; ++i)
        names.push_back("A" + std::to_string(i + 1));
    PrintOptions opts{.qualify = qualify, .var_names = &names};

    const Symbol& pred = symbol(c.pred);
    std::vector<Term> head_args;
    for (uint32_t i = 0; i < c.arity; ++i) head_args.push_back(Term::var(i));
    Term head = Term::comp(intern_symbol(pred.name, c.arity), head_args);

    std::ostringstream os;
    os << c.id << ": ";
    if (c.kind == AssertionCondition::Kind::Calls) {
        os << "calls(";
        write_term(os, head, opts);
        os << ", ";
        if (c.pre.size() == 1) {
            write_conj(os, c.pre[0], opts);
        } else {
            os << '(';
            for (size_t i = 0; i < c.pre.size(); ++i) {
                if (i) os << " ; ";
                write_conj(os, c.pre[i], opts);
            }
            os << ')';
        }
        os << ").";
    } else {
        os << "success(";
        write_term(os, head, opts);
        os << ", ";
        write_conj(os, c.pre[0], opts);
        os << ", ";
        write_conj(os, c.post, opts);
        os << ").";
    }
    return os.str();
}

std::string module_conditions_to_string(const FlatProgram& p,
                                        const std::string& module) {
    std::vector<const Predicate*> preds;
    for (const auto& [sym, pred] : p.preds)
        if (pred.module == module && !pred.conditions.empty())
            preds.push_back(&pred);
    std::sort(preds.begin(), preds.end(),
              [](const Predicate* a, const Predicate* b) {
                  const Symbol& sa = symbol(a->sym);
                  const Symbol& sb = symbol(b->sym);
                  return std::tie(sa.name, sa.arity) < std::tie(sb.name, sb.arity);
              });
    std::ostringstream os;
    for (const Predicate* pred : preds)
        for (uint32_t slot : pred->conditions)
            os << condition_to_string(p.conditions[slot]) << '\n';
    return os.str();
}

}  // namespace modlog
