#include "doctest.h"

#include "modlog/printer.hpp"
#include "modlog/term.hpp"

using namespace modlog;

namespace {

Term v(VarId n) { return Term::var(n); }
Term i(int64_t n) { return Term::integer(n); }
Term c(const char* name, std::vector<Term> args,
       const char* qual = "user") {
    return Term::comp(
        intern_symbol(name, static_cast<uint32_t>(args.size()), qual),
        std::move(args));
}

}  // namespace

TEST_CASE("symbol interning is by name and arity and qualifier") {
    SymId a = intern_symbol("f", 2);
    CHECK(a == intern_symbol("f", 2));
    CHECK(a != intern_symbol("f", 3));
    CHECK(a != intern_symbol("f", 2, "bt"));
    CHECK(a == intern_symbol("f", 2, "user"));
    CHECK(symbol(intern_symbol("f", 2, "bt")).qualifier == "bt");
    CHECK(symbol(a).is_user());
}

TEST_CASE("term equality and the ground bit") {
    CHECK(i(3) == i(3));
    CHECK(i(3) != i(4));
    CHECK(v(0) != i(0));
    Term t = c("f", {i(1), c("g", {i(2)})});
    CHECK(t == c("f", {i(1), c("g", {i(2)})}));
    CHECK(t.ground());
    CHECK_FALSE(c("f", {v(0), i(1)}).ground());
    CHECK(c("f", {v(0), i(1)}) != c("f", {v(1), i(1)}));
}

TEST_CASE("unification produces the expected bindings") {
    Store s;
    s.reserve_vars(4);

    SUBCASE("var against ground") {
        CHECK(s.unify(v(0), i(7)));
        CHECK(s.resolve(v(0)) == i(7));
    }
    SUBCASE("compound decomposition") {
        CHECK(s.unify(c("f", {v(0), v(1)}), c("f", {i(1), c("g", {v(2)})})));
        CHECK(s.resolve(v(0)) == i(1));
        CHECK(s.resolve(v(1)) == c("g", {v(2)}));
    }
    SUBCASE("var-to-var aliasing") {
        CHECK(s.unify(v(0), v(1)));
        CHECK(s.unify(v(1), i(5)));
        CHECK(s.resolve(v(0)) == i(5));
    }
    SUBCASE("functor clash fails and leaves no bindings") {
        Store::Mark m = s.mark();
        CHECK_FALSE(s.unify(c("f", {v(0), i(1)}), c("f", {i(2), i(3)})));
        CHECK(s.mark().trail == m.trail);
        CHECK_FALSE(s.is_bound(0));
    }
    SUBCASE("arity clash") {
        CHECK_FALSE(s.unify(c("f", {i(1)}), c("f", {i(1), i(2)})));
    }
    SUBCASE("occurs check") {
        CHECK_FALSE(s.unify(v(0), c("f", {v(0)})));
        CHECK_FALSE(s.unify(v(0), c("f", {c("g", {v(0)}), i(1)})));
        CHECK(s.unify(v(0), c("f", {v(1)})));  // different var is fine
    }
}

TEST_CASE("trail undo restores the store exactly") {
    Store s;
    s.reserve_vars(2);
    Store::Mark m = s.mark();
    CHECK(s.unify(v(0), i(1)));
    VarId extra = s.fresh();
    CHECK(s.unify(v(extra), c("f", {v(1)})));
    s.undo_to(m);
    CHECK(s.num_vars() == 2);
    CHECK_FALSE(s.is_bound(0));
    CHECK_FALSE(s.is_bound(1));
    CHECK(s.resolve(v(0)) == v(0));
}

TEST_CASE("resolve shares ground subterms") {
    Store s;
    s.reserve_vars(1);
    Term g = c("f", {i(1), i(2)});
    CHECK(s.unify(v(0), g));
    Term r = s.resolve(c("h", {v(0)}));
    CHECK(r == c("h", {g}));
    CHECK(r.ground());
    // the ground argument is the same node, not a copy
    CHECK(r.args()[0].args().data() == g.args().data());
}

TEST_CASE("canonical renames variables in first-occurrence order") {
    Term t = c("f", {v(7), v(3), v(7)});
    CHECK(canonical(t) == c("f", {v(0), v(1), v(0)}));
    CHECK(canonical(canonical(t)) == canonical(t));
    CHECK(canonical(c("f", {v(1), v(2), v(1)})) == canonical(t));
}

TEST_CASE("rename_apart allocates from the counter upward") {
    Clause cl;
    cl.head = c("p", {v(0), v(1)});
    cl.body = {c("q", {v(1), v(0)})};
    VarId counter = 10;
    Clause r = rename_apart(cl, counter);
    CHECK(counter == 12);
    CHECK(r.head == c("p", {v(10), v(11)}));
    CHECK(r.body[0] == c("q", {v(11), v(10)}));
    // the original is untouched
    CHECK(cl.head == c("p", {v(0), v(1)}));
}

TEST_CASE("subst apply substitutes transitively") {
    Subst s;
    s.set(0, c("f", {v(1)}));
    s.set(1, i(3));
    CHECK(apply(s, c("g", {v(0), v(1), v(2)})) ==
          c("g", {c("f", {i(3)}), i(3), v(2)}));
}

TEST_CASE("unify via substitutions returns an mgu") {
    Subst empty;
    auto u = unify(c("f", {v(0), v(1)}), c("f", {v(1), i(2)}), empty);
    REQUIRE(u.has_value());
    CHECK(apply(*u, v(0)) == i(2));
    CHECK(apply(*u, v(1)) == i(2));
    CHECK_FALSE(unify(i(1), i(2), empty).has_value());
}

TEST_CASE("terms print in source syntax") {
    CHECK(term_to_string(c("f", {i(1), v(0)})) == "f(1,_G0)");
    CHECK(term_to_string(i(-4)) == "-4");
    CHECK(term_to_string(c("empty", {}, "bt")) == "empty");
    PrintOptions q{.qualify = true};
    CHECK(term_to_string(c("empty", {}, "bt"), q) == "bt:empty");
    std::vector<std::string> names = {"X"};
    PrintOptions n{.var_names = &names};
    CHECK(term_to_string(c("f", {v(0), v(1)}), n) == "f(X,_G1)");
}
