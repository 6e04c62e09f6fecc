#include "modlog/parser.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace modlog {

namespace {

enum class Tok : uint8_t {
    Atom,    // lower-case name (may contain $, trailing #)
    Var,     // upper-case or _ name
    Int,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Slash,
    Neck,    // :-
    Colon,
    Arrow,   // =>
    Op,      // = < > =< >= =:=
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int64_t value = 0;
    int line = 1;
};

class Lexer {
public:
    Lexer(std::string_view text, std::string_view origin)
        : text_(text), origin_(origin) {}

    const Token& peek() {
        if (!have_) {
            cur_ = lex();
            have_ = true;
        }
        return cur_;
    }

    Token next() {
        peek();
        have_ = false;
        return cur_;
    }

    [[noreturn]] void fail(const std::string& msg, int line) const {
        std::ostringstream os;
        if (!origin_.empty()) os << origin_ << ":";
        os << line << ": " << msg;
        throw LoadError(LoadErrorKind::ParseError, os.str(),
                        std::string(origin_), line);
    }

private:
    static bool atom_start(char c) { return c >= 'a' && c <= 'z'; }
    static bool var_start(char c) { return (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
    }

    char at(size_t i) const { return i < text_.size() ? text_[i] : '\0'; }

    Token lex() {
        // skip layout and comments
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '%') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
        int line = line_;
        if (pos_ >= text_.size()) return {Tok::End, "", 0, line};
        char c = text_[pos_];

        if (atom_start(c)) {
            size_t start = pos_;
            while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
            while (pos_ < text_.size() && text_[pos_] == '#') ++pos_;
            return {Tok::Atom, std::string(text_.substr(start, pos_ - start)), 0,
                    line};
        }
        if (var_start(c)) {
            size_t start = pos_;
            ++pos_;
            while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
            return {Tok::Var, std::string(text_.substr(start, pos_ - start)), 0,
                    line};
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '-' && std::isdigit(static_cast<unsigned char>(at(pos_ + 1))))) {
            size_t start = pos_;
            if (c == '-') ++pos_;
            while (pos_ < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            std::string_view digits = text_.substr(start, pos_ - start);
            int64_t value = 0;
            auto [p, ec] =
                std::from_chars(digits.data(), digits.data() + digits.size(), value);
            if (ec != std::errc() || p != digits.data() + digits.size())
                fail("integer out of range", line);
            return {Tok::Int, std::string(digits), value, line};
        }

        auto two = text_.substr(pos_, 2);
        auto three = text_.substr(pos_, 3);
        if (three == "=:=") {
            pos_ += 3;
            return {Tok::Op, "=:=", 0, line};
        }
        if (two == ":-") {
            pos_ += 2;
            return {Tok::Neck, ":-", 0, line};
        }
        if (two == "=>") {
            pos_ += 2;
            return {Tok::Arrow, "=>", 0, line};
        }
        if (two == "=<" || two == ">=") {
            pos_ += 2;
            return {Tok::Op, std::string(two), 0, line};
        }
        ++pos_;
        switch (c) {
            case '(': return {Tok::LParen, "(", 0, line};
            case ')': return {Tok::RParen, ")", 0, line};
            case '[': return {Tok::LBracket, "[", 0, line};
            case ']': return {Tok::RBracket, "]", 0, line};
            case ',': return {Tok::Comma, ",", 0, line};
            case '.': return {Tok::Dot, ".", 0, line};
            case '/': return {Tok::Slash, "/", 0, line};
            case ':': return {Tok::Colon, ":", 0, line};
            case '=': return {Tok::Op, "=", 0, line};
            case '<': return {Tok::Op, "<", 0, line};
            case '>': return {Tok::Op, ">", 0, line};
            default:
                fail(std::string("unexpected character '") + c + "'", line);
        }
    }

    std::string_view text_;
    std::string_view origin_;
    size_t pos_ = 0;
    int line_ = 1;
    Token cur_;
    bool have_ = false;
};

// Variable scope of one clause/directive/query.
struct VarScope {
    std::map<std::string, VarId> named;
    std::vector<std::string> names;  // by id

    VarId get(const std::string& name) {
        if (name == "_") {
            VarId v = static_cast<VarId>(names.size());
            names.push_back("_");
            return v;
        }
        auto it = named.find(name);
        if (it != named.end()) return it->second;
        VarId v = static_cast<VarId>(names.size());
        names.push_back(name);
        named.emplace(name, v);
        return v;
    }
};

class Parser {
public:
    Parser(std::string_view text, std::string_view origin)
        : lex_(text, origin), origin_(origin) {}

    ModuleSource parse_module_file() {
        ModuleSource m;
        bool have_module = false;
        while (lex_.peek().kind != Tok::End) {
            if (lex_.peek().kind == Tok::Neck) {
                int line = lex_.next().line;
                parse_directive(m, have_module, line);
            } else {
                if (!have_module)
                    lex_.fail("module declaration must come first", lex_.peek().line);
                m.clauses.push_back(parse_clause());
            }
        }
        if (!have_module)
            lex_.fail("missing module declaration", lex_.peek().line);
        check_hidden_exports(m);
        return m;
    }

    std::vector<Term> parse_goal_list(std::vector<std::string>* names) {
        VarScope scope;
        std::vector<Term> goals = parse_conj(scope);
        expect(Tok::End, "end of query");
        if (names) *names = scope.names;
        return goals;
    }

    Term parse_single_term(std::vector<std::string>* names) {
        VarScope scope;
        Term t = parse_term(scope);
        expect(Tok::End, "end of term");
        if (names) *names = scope.names;
        return t;
    }

private:
    Token expect(Tok kind, const std::string& what) {
        Token t = lex_.next();
        if (t.kind != kind)
            lex_.fail("expected " + what + ", found '" + t.text + "'", t.line);
        return t;
    }

    void expect_dot() { expect(Tok::Dot, "'.'"); }

    PredArity parse_pred_arity() {
        Token name = expect(Tok::Atom, "name");
        expect(Tok::Slash, "'/'");
        Token ar = expect(Tok::Int, "arity");
        if (ar.value < 0 || ar.value > 255)
            lex_.fail("arity out of range", ar.line);
        return {name.text, static_cast<uint32_t>(ar.value)};
    }

    std::vector<PredArity> parse_pred_list() {
        expect(Tok::LBracket, "'['");
        std::vector<PredArity> out;
        if (lex_.peek().kind != Tok::RBracket) {
            out.push_back(parse_pred_arity());
            while (lex_.peek().kind == Tok::Comma) {
                lex_.next();
                out.push_back(parse_pred_arity());
            }
        }
        expect(Tok::RBracket, "']'");
        return out;
    }

    void parse_directive(ModuleSource& m, bool& have_module, int line) {
        Token head = expect(Tok::Atom, "directive name");
        if (head.text == "module") {
            if (have_module) lex_.fail("duplicate module declaration", line);
            expect(Tok::LParen, "'('");
            m.name = expect(Tok::Atom, "module name").text;
            expect(Tok::Comma, "','");
            m.exports = parse_pred_list();
            expect(Tok::RParen, "')'");
            expect_dot();
            for (size_t i = 0; i < m.exports.size(); ++i)
                for (size_t j = i + 1; j < m.exports.size(); ++j)
                    if (m.exports[i] == m.exports[j])
                        lex_.fail("duplicate export " + m.exports[i].name, line);
            have_module = true;
            return;
        }
        if (!have_module)
            lex_.fail("module declaration must come first", line);
        if (head.text == "use_module") {
            expect(Tok::LParen, "'('");
            std::string from = expect(Tok::Atom, "module name").text;
            expect(Tok::Comma, "','");
            std::vector<PredArity> preds = parse_pred_list();
            expect(Tok::RParen, "')'");
            expect_dot();
            if (from == m.name)
                lex_.fail("module cannot import itself", line);
            m.imports.emplace_back(std::move(from), std::move(preds));
            return;
        }
        if (head.text == "hide" || head.text == "regtype") {
            bool paren = lex_.peek().kind == Tok::LParen;
            if (paren) lex_.next();
            PredArity pa = parse_pred_arity();
            if (paren) expect(Tok::RParen, "')'");
            expect_dot();
            auto& list = head.text == "hide" ? m.hidden : m.regtypes;
            for (const PredArity& old : list)
                if (old == pa)
                    lex_.fail("duplicate " + head.text + " declaration for " +
                                  pa.name,
                              line);
            if (head.text == "regtype" && pa.arity != 1)
                lex_.fail("regtype must have arity 1", line);
            list.push_back(std::move(pa));
            return;
        }
        if (head.text == "pred") {
            RawAssertion a;
            a.line = line;
            VarScope scope;
            a.head = parse_term(scope);
            if (!a.head.is_comp())
                lex_.fail("assertion head must be a predicate application", line);
            if (lex_.peek().kind == Tok::Colon) {
                lex_.next();
                a.pre = parse_conj(scope);
            }
            if (lex_.peek().kind == Tok::Arrow) {
                lex_.next();
                a.post = parse_conj(scope);
            }
            expect_dot();
            a.var_names = scope.names;
            m.assertions.push_back(std::move(a));
            return;
        }
        lex_.fail("unknown directive '" + head.text + "'", line);
    }

    Clause parse_clause() {
        Clause c;
        c.line = lex_.peek().line;
        VarScope scope;
        c.head = parse_term(scope);
        if (!c.head.is_comp())
            lex_.fail("clause head must be an atom or compound", c.line);
        if (lex_.peek().kind == Tok::Neck) {
            lex_.next();
            c.body = parse_conj(scope);
        }
        expect_dot();
        c.var_names = scope.names;
        return c;
    }

    // conjunction: literals separated by commas; parenthesized groups are
    // spliced; a bare `true` disappears
    std::vector<Term> parse_conj(VarScope& scope) {
        std::vector<Term> out;
        parse_conj_into(scope, out);
        return out;
    }

    void parse_conj_into(VarScope& scope, std::vector<Term>& out) {
        while (true) {
            if (lex_.peek().kind == Tok::LParen) {
                lex_.next();
                parse_conj_into(scope, out);
                expect(Tok::RParen, "')'");
            } else {
                Term lit = parse_literal(scope);
                bool is_true = lit.is_comp() && lit.arity() == 0 &&
                               symbol(lit.sym()).name == "true";
                if (!is_true) out.push_back(std::move(lit));
            }
            if (lex_.peek().kind == Tok::Comma) {
                lex_.next();
                continue;
            }
            break;
        }
    }

    Term parse_literal(VarScope& scope) {
        Term left = parse_term(scope);
        if (lex_.peek().kind == Tok::Op) {
            Token op = lex_.next();
            Term right = parse_term(scope);
            SymId s = builtin_sym(op.text, 2);
            return Term::comp(s, {std::move(left), std::move(right)});
        }
        return left;
    }

    Term parse_term(VarScope& scope) {
        Token t = lex_.next();
        switch (t.kind) {
            case Tok::Int:
                return Term::integer(t.value);
            case Tok::Var:
                return Term::var(scope.get(t.text));
            case Tok::Atom: {
                std::vector<Term> args;
                if (lex_.peek().kind == Tok::LParen) {
                    lex_.next();
                    args.push_back(parse_term(scope));
                    while (lex_.peek().kind == Tok::Comma) {
                        lex_.next();
                        args.push_back(parse_term(scope));
                    }
                    expect(Tok::RParen, "')'");
                }
                SymId s = intern_symbol(t.text, static_cast<uint32_t>(args.size()));
                return Term::comp(s, std::move(args));
            }
            default:
                lex_.fail("expected a term, found '" + t.text + "'", t.line);
        }
    }

    void check_hidden_exports(const ModuleSource& m) {
        for (const PredArity& h : m.hidden)
            for (const PredArity& e : m.exports)
                if (h == e)
                    throw LoadError(
                        LoadErrorKind::HiddenFunctorLeak,
                        m.name + ": hidden functor " + h.name + "/" +
                            std::to_string(h.arity) + " appears in the export list",
                        m.name);
    }

    Lexer lex_;
    std::string_view origin_;
};

}  // namespace

ModuleSource parse_module(std::string_view text, std::string_view origin) {
    Parser p(text, origin);
    return p.parse_module_file();
}

Term parse_term_text(std::string_view text, std::vector<std::string>* var_names) {
    Parser p(text, "<term>");
    return p.parse_single_term(var_names);
}

namespace {

// Rebuilds t, giving hidden data functors their hiding module's qualifier.
Term resolve_query_data(const Term& t, const FlatProgram& prog, bool trusted,
                        bool root) {
    switch (t.kind()) {
        case Term::Kind::Var:
        case Term::Kind::Int:
            return t;
        case Term::Kind::Comp: {
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const Term& a : t.args())
                args.push_back(resolve_query_data(a, prog, trusted, false));
            SymId s = t.sym();
            if (!root && trusted) {
                const Symbol& sym = symbol(s);
                auto it = prog.hidden_by_name.find(
                    PredArity{sym.name, static_cast<uint32_t>(t.arity())});
                if (it != prog.hidden_by_name.end()) {
                    if (it->second.size() > 1)
                        throw LoadError(LoadErrorKind::VisibilityViolation,
                                        "functor " + sym.name + "/" +
                                            std::to_string(t.arity()) +
                                            " is hidden by more than one module");
                    s = intern_symbol(sym.name, static_cast<uint32_t>(t.arity()),
                                      it->second.front());
                }
            }
            return Term::comp(s, std::move(args));
        }
    }
    return t;
}

// Resolves a query goal's root to an exported predicate or builtin symbol.
Term resolve_query_goal(const Term& goal, const FlatProgram& prog,
                        bool trusted) {
    if (!goal.is_comp())
        throw LoadError(LoadErrorKind::ParseError,
                        "query goal must be a predicate application");
    std::vector<Term> args;
    args.reserve(goal.arity());
    for (const Term& a : goal.args())
        args.push_back(resolve_query_data(a, prog, trusted, false));

    SymId root = goal.sym();
    if (is_builtin(root)) return Term::comp(root, std::move(args));

    const Symbol& sym = symbol(root);
    SymId found = 0;
    int hits = 0;
    for (const auto& [name, info] : prog.modules) {
        for (const PredArity& e : info.export_list) {
            if (e.name == sym.name && e.arity == goal.arity()) {
                found = intern_symbol(e.name, e.arity, name);
                ++hits;
            }
        }
    }
    if (hits == 0)
        throw LoadError(LoadErrorKind::VisibilityViolation,
                        "predicate " + sym.name + "/" +
                            std::to_string(goal.arity()) +
                            " is not exported by any loaded module");
    if (hits > 1)
        throw LoadError(LoadErrorKind::VisibilityViolation,
                        "predicate " + sym.name + "/" +
                            std::to_string(goal.arity()) +
                            " is exported by more than one loaded module");
    return Term::comp(found, std::move(args));
}

}  // namespace

Query parse_query(std::string_view text, const FlatProgram* prog, bool trusted) {
    Parser p(text, "<query>");
    Query q;
    q.goals = p.parse_goal_list(&q.var_names);
    if (prog) {
        for (Term& g : q.goals) g = resolve_query_goal(g, *prog, trusted);
    }
    return q;
}

}  // namespace modlog
