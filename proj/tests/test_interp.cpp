#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "modlog/bench.hpp"
#include "modlog/flatten.hpp"
#include "modlog/interp.hpp"
#include "modlog/parser.hpp"
#include "modlog/printer.hpp"

using namespace modlog;

namespace {

FlatProgram load_bt() {
    return flatten({parse_module(corpus_library("bt").source, "bt")});
}

std::vector<std::string> answer_strings(const FlatProgram& p, const Query& q,
                                        Mode mode) {
    Engine eng(p, {.mode = mode});
    SolveResult r = eng.solve(q);
    REQUIRE(!r.errored());
    std::vector<std::string> out;
    for (const Subst& a : r.answers)
        out.push_back(
            term_to_string(canonical_answer(a, q.var_names.size())));
    return out;
}

}  // namespace

TEST_CASE("tree insertion and lookup produce the expected answers") {
    FlatProgram p = load_bt();
    Engine eng(p, {.mode = Mode::SafeRt});

    SolveResult r = eng.solve(parse_query("insert(5, empty, T)", &p));
    REQUIRE(r.answers.size() == 1);
    const Term* t = r.answers[0].lookup(0);
    REQUIRE(t != nullptr);
    CHECK(term_to_string(*t) == "tree(empty,5,empty)");
    CHECK(term_to_string(*t, {.qualify = true}) ==
          "bt:tree(bt:empty,5,bt:empty)");

    r = eng.solve(parse_query("insert(5, empty, T), insert(2, T, U), "
                              "peek(U, K)", &p));
    REQUIRE(r.answers.size() == 1);
    CHECK(term_to_string(*r.answers[0].lookup(1)) ==
          "tree(tree(empty,2,empty),5,empty)");
    // peek reads the root key
    CHECK(term_to_string(*r.answers[0].lookup(2)) == "5");
}

TEST_CASE("answers follow clause order and respect max_answers") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [ch/1]).\nch(3).\nch(1).\nch(2).\n")});
    Query q = parse_query("ch(X)", &p);
    CHECK(answer_strings(p, q, Mode::Unsafe) ==
          std::vector<std::string>{"ans(3)", "ans(1)", "ans(2)"});

    Engine eng(p, {.mode = Mode::Unsafe});
    SolveResult r = eng.solve(q, {.max_answers = 2});
    CHECK(r.answers.size() == 2);
}

TEST_CASE("first-argument indexing does not change the answer sequence") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [p/2]).\n"
        "p(a, 1).\np(X, 2) :- X = b.\np(a, 3).\np(7, 4).\n")});
    SymId ps = intern_symbol("p", 2, "m");

    auto run = [&](const char* text) {
        return answer_strings(p, parse_query(text, &p), Mode::Unsafe);
    };
    auto with_index = std::tuple(run("p(a, N)"), run("p(X, N)"), run("p(7, N)"));

    FlatProgram flat = p;  // disable the index and compare
    flat.preds.at(ps).index.usable = false;
    auto linear = [&](const char* text) {
        return answer_strings(flat, parse_query(text, &flat), Mode::Unsafe);
    };
    CHECK(std::get<0>(with_index) ==
          std::vector<std::string>{"ans(1)", "ans(3)"});
    CHECK(std::get<0>(with_index) == linear("p(a, N)"));
    CHECK(std::get<1>(with_index) == linear("p(X, N)"));
    CHECK(std::get<2>(with_index) == linear("p(7, N)"));
}

TEST_CASE("builtins") {
    FlatProgram p = load_bt();
    Engine eng(p, {.mode = Mode::Unsafe});
    auto holds = [&](const char* text) {
        return !eng.solve(parse_query(text, &p)).answers.empty();
    };

    CHECK(holds("X = 5, X < 9, X =< 5, 9 > X, 5 >= X, X =:= 5"));
    CHECK_FALSE(holds("3 < 3"));
    CHECK_FALSE(holds("3 =:= 4"));
    CHECK(holds("X = f(Y), Y = 1, X = f(1)"));
    CHECK_FALSE(holds("f(1) = g(1)"));
    CHECK(holds("int(-3)"));
    CHECK_FALSE(holds("int(f(1))"));
    CHECK(holds("term(f(X))"));
    CHECK(holds("usr(f(g(1)))"));
    CHECK(holds("X = 1, usr(X)"));

    SUBCASE("usr rejects hidden functors however deeply they occur") {
        Engine checked(p, {.mode = Mode::Unsafe});
        SolveResult r =
            checked.solve(parse_query("insert(5, empty, T), usr(f(T))", &p));
        CHECK(r.answers.empty());
    }

    SUBCASE("comparison on an unbound variable is an evaluation error") {
        CHECK_THROWS_AS(eng.solve(parse_query("X < 1", &p)), EvalError);
        CHECK_THROWS_AS(eng.solve(parse_query("X = f(1), X < 1", &p)),
                        EvalError);
    }
}

TEST_CASE("violations carry the condition slot with phase and culprit") {
    FlatProgram p = load_bt();
    Engine eng(p, {.mode = Mode::SafeRt});

    SUBCASE("calls phase") {
        SolveResult r = eng.solve(parse_query("insert(a, empty, T)", &p));
        REQUIRE(r.errored());
        CHECK(r.answers.empty());
        CHECK(p.condition(r.error->cond).id == "bt:insert/3#0");
        CHECK(r.error->phase == AssertionCondition::Kind::Calls);
        CHECK(term_to_string(r.error->culprit) == "insert(a,empty,_G0)");
    }
    SUBCASE("success phase") {
        // forged foreign structure passes `term` but breaks the post lookup
        SolveResult r = eng.solve(
            parse_query("peek(tree(empty, kk, empty), K)", &p, false));
        REQUIRE(r.errored());
        CHECK(p.condition(r.error->cond).id == "bt:peek/2#0");
    }
}

TEST_CASE("checking modes differ exactly on interior call sites") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [go/1]).\n"
        ":- regtype t_a/1.\n"
        "t_a(a).\n"
        ":- pred inner(X) : (t_a(X)).\n"
        "inner(_).\n"
        "go(X) :- inner(X).\n")});
    Query bad = parse_query("go(5)", &p);

    SolveResult unsafe = Engine(p, {.mode = Mode::Unsafe}).solve(bad);
    CHECK(unsafe.answers.size() == 1);
    CHECK(unsafe.counters.conditions == 0);

    // exported go/1 has no assertion, so the boundary has nothing to check
    SolveResult client = Engine(p, {.mode = Mode::ClientSafe}).solve(bad);
    CHECK(client.answers.size() == 1);

    SolveResult full = Engine(p, {.mode = Mode::SafeRt}).solve(bad);
    REQUIRE(full.errored());
    CHECK(p.condition(full.error->cond).id == "m:inner/1#0");

    // nothing discharged: safe-ct-rt behaves like safe-rt
    SolveResult ct0 = Engine(p, {.mode = Mode::SafeCtRt}).solve(bad);
    CHECK(ct0.errored());

    // the interior slot proven off-line: the interior site goes quiet
    std::set<uint32_t> slots = {p.condition_index.at("m:inner/1#0")};
    SolveResult ct = Engine(p, {.mode = Mode::SafeCtRt, .discharged = slots})
                         .solve(bad);
    CHECK(ct.answers.size() == 1);
}

TEST_CASE("boundary calls keep discharged conditions in safe-ct-rt") {
    FlatProgram p = load_bt();
    std::set<uint32_t> slots = {p.condition_index.at("bt:insert/3#0")};
    Engine eng(p, {.mode = Mode::SafeCtRt, .discharged = slots});
    // the query is an outside caller, so the precondition still fires
    SolveResult r = eng.solve(parse_query("insert(a, empty, T)", &p));
    REQUIRE(r.errored());
    CHECK(p.condition(r.error->cond).id == "bt:insert/3#0");
}

TEST_CASE("condition evaluations are counted per activation") {
    FlatProgram p = load_bt();
    Query q = parse_query("insert(5, empty, T)", &p);

    Counters unsafe = Engine(p, {.mode = Mode::Unsafe}).solve(q).counters;
    CHECK(unsafe.conditions == 0);

    // boundary activation: calls pre, success guard, success post
    Counters client = Engine(p, {.mode = Mode::ClientSafe}).solve(q).counters;
    CHECK(client.conditions == 3);

    CHECK(client.prop_steps > 0);

    // a deeper insertion recurses: interior activations are checked too
    Query deep =
        parse_query("insert(5, empty, T), insert(2, T, U), insert(9, U, V)",
                    &p);
    Counters client2 =
        Engine(p, {.mode = Mode::ClientSafe}).solve(deep).counters;
    Counters full = Engine(p, {.mode = Mode::SafeRt}).solve(deep).counters;
    CHECK(client2.conditions == 9);
    CHECK(full.conditions > client2.conditions);
}

TEST_CASE("check_trivially leaves the store untouched") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [p/1]).\n"
        ":- regtype t_a/1.\nt_a(a).\nt_a(f(X)) :- t_a(X).\n"
        ":- regtype t_b/1.\nt_b(b).\n"
        "p(a).\n")});
    Engine eng(p, {.mode = Mode::SafeRt});
    SymId ta = intern_symbol("t_a", 1, "m");
    SymId tb = intern_symbol("t_b", 1, "m");
    SymId f = intern_symbol("f", 1);
    SymId a = intern_symbol("a", 0);

    Store store;
    store.reserve_vars(3);
    store.bind(0, Term::comp(f, {Term::atom(a)}));
    size_t vars_before = store.num_vars();
    Counters counters;

    CHECK(eng.check_trivially({Term::comp(ta, {Term::var(0)})}, store,
                              counters));
    CHECK(counters.prop_steps > 0);

    // an unbound argument must not be instantiated to make the check pass
    // (t_b is finite, so the search for a non-binding witness terminates)
    CHECK_FALSE(eng.check_trivially({Term::comp(tb, {Term::var(1)})}, store,
                                    counters));
    CHECK_FALSE(store.is_bound(1));
    CHECK(store.num_vars() == vars_before);
    CHECK(term_to_string(store.resolve(Term::var(0))) == "f(a)");

    // conjunction: both literals must hold
    CHECK_FALSE(eng.check_trivially({Term::comp(ta, {Term::var(0)}),
                                     Term::comp(tb, {Term::var(1)})},
                                    store, counters));
}

TEST_CASE("a step budget aborts runaway queries") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [loop/0]).\nloop :- loop.\n")});
    Engine eng(p, {.mode = Mode::Unsafe});
    CHECK_THROWS_AS(eng.solve(parse_query("loop", &p), {.max_steps = 1000}),
                    ResourceLimit);
}

TEST_CASE("no clauses means failure even under full checking") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [ghost/1]).\n:- pred ghost(X) : (int(X)).\n")});
    Engine eng(p, {.mode = Mode::SafeRt});
    // even a violating call fails silently: there is nothing to run
    SolveResult r = eng.solve(parse_query("ghost(f(1))", &p));
    CHECK(r.answers.empty());
    CHECK_FALSE(r.errored());
}

TEST_CASE("streamed trace reports calls then returns then the empty goal") {
    FlatProgram p = load_bt();
    Engine eng(p, {.mode = Mode::SafeRt});
    std::ostringstream os;
    SolveResult r = eng.solve(parse_query("insert(5, empty, T)", &p),
                              {.trace_stream = &os});
    CHECK(r.answers.size() == 1);
    std::string trace = os.str();
    CHECK(trace.find("call bt:insert(5,bt:empty,") != std::string::npos);
    CHECK(trace.find("retchk ") != std::string::npos);
    CHECK(trace.find("empty -") != std::string::npos);

    std::ostringstream err;
    SolveResult bad = eng.solve(parse_query("insert(a, empty, T)", &p),
                                {.trace_stream = &err});
    CHECK(bad.errored());
    CHECK(err.str().find("err bt:insert/3#0") != std::string::npos);
}

TEST_CASE("captured derivations replay deterministically from their script") {
    FlatProgram p = load_bt();
    Engine eng(p, {.mode = Mode::Unsafe});
    Query q = parse_query("insert(5, empty, T), insert(2, T, U)", &p);

    SolveResult cap = eng.solve(q, {.capture = true});
    REQUIRE(cap.answers.size() == 1);
    REQUIRE(!cap.derivations.empty());

    // count outcomes: exactly one success, scripts replay to the same states
    size_t successes = 0;
    for (const Derivation& d : cap.derivations) {
        if (d.outcome == Outcome::Success) ++successes;
        SolveResult rep =
            eng.solve(q, {.capture = true, .script = &d.script});
        CHECK(rep.replay == ReplayStatus::Complete);
        REQUIRE(rep.derivations.size() == 1);
        CHECK(rep.derivations[0].states == d.states);
        CHECK(rep.derivations[0].outcome == d.outcome);
    }
    CHECK(successes == 1);
}
