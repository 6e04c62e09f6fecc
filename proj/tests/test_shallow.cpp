#include "doctest.h"

#include <sstream>

#include "modlog/bench.hpp"
#include "modlog/flatten.hpp"
#include "modlog/interp.hpp"
#include "modlog/parser.hpp"
#include "modlog/printer.hpp"
#include "modlog/shallow.hpp"

using namespace modlog;

namespace {

std::string snapshot(const FlatProgram& p, const std::string& module) {
    std::ostringstream os;
    for (const auto& [sym, pred] : p.preds) {
        if (pred.module != module) continue;
        os << symbol(sym).name << "/" << pred.arity
           << (pred.is_regtype ? " regtype" : "")
           << (pred.exported ? " exported" : "") << '\n';
        for (const Clause& c : pred.clauses)
            os << "  " << clause_to_string(c, true) << '\n';
    }
    os << module_conditions_to_string(p, module);
    return os.str();
}

}  // namespace

TEST_CASE("regtype containment") {
    FlatProgram p = flatten({parse_module(corpus_library("bt").source, "bt")});
    SymId key = intern_symbol("val_key", 1, "bt");
    SymId tree = intern_symbol("val_tree", 1, "bt");

    CHECK(containment(p, key, key));
    CHECK(containment(p, tree, tree));
    CHECK_FALSE(containment(p, tree, key));
    CHECK_FALSE(containment(p, key, tree));

    FlatProgram h =
        flatten({parse_module(corpus_library("heap").source, "heap")});
    SymId htree = intern_symbol("val_htree", 1, "heap");
    SymId heap = intern_symbol("val_heap", 1, "heap");
    CHECK(containment(h, htree, htree));
    CHECK_FALSE(containment(h, heap, htree));
    CHECK_FALSE(containment(h, htree, heap));
}

TEST_CASE("containment handles mutual recursion and subset clause sets") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [p/0]).\n"
        ":- regtype t_lo/1.\nt_lo(z).\nt_lo(s(X)) :- t_lo(X).\n"
        ":- regtype t_hi/1.\nt_hi(z).\nt_hi(s(X)) :- t_hi(X).\nt_hi(w).\n"
        "p.\n")});
    SymId lo = intern_symbol("t_lo", 1, "m");
    SymId hi = intern_symbol("t_hi", 1, "m");
    CHECK(containment(p, lo, hi));
    CHECK_FALSE(containment(p, hi, lo));
}

TEST_CASE("spec_prop drops checks the escape description already pays for") {
    FlatProgram p = flatten({parse_module(corpus_library("bt").source, "bt")});
    MaterializedEscape esc = materialize(p, escaping_terms(p, "bt"));
    ContainmentCache cache;

    // clause 0 `val_tree(empty)` untouched; clause 1 sheds its whole body
    auto tree_spec =
        spec_prop(p, esc, intern_symbol("val_tree", 1, "bt"), cache);
    REQUIRE(tree_spec.size() == 1);
    CHECK(tree_spec.at(1) == std::vector<uint32_t>{0, 1, 2});

    // var-headed val_key has nothing hidden to specialize
    CHECK(spec_prop(p, esc, intern_symbol("val_key", 1, "bt"), cache).empty());
}

TEST_CASE("shallow regtypes bottom out after one application") {
    ShallowProgram sp =
        shallow_flatten({parse_module(corpus_library("bt").source, "bt")});
    const FlatProgram& p = sp.program;
    MaterializedEscape esc = materialize(p, escaping_terms(p, "bt"));
    ContainmentCache cache;
    CHECK(spec_prop(p, esc, intern_symbol("val_tree#", 1, "bt"), cache)
              .empty());
}

TEST_CASE("shallow interface of the tree library") {
    FlatProgram p = flatten({parse_module(corpus_library("bt").source, "bt")});
    ShallowModule sm =
        shallow_interface(p, parse_module(corpus_library("bt").source, "bt"));
    std::string listing = shallow_module_to_string(sm);

    // boundary checks go shallow, inner conditions keep full depth
    for (const char* part : {
             ":- regtype val_tree#/1.",
             "val_tree#(empty).",
             "val_tree#(tree(_,_,_)).",
             ":- pred insert(A1,A2,A3) : (val_key(A1), val_tree#(A2), "
             "term(A3)) => (val_key(A1), val_tree(A2), val_tree(A3)).",
             "insert(A1,A2,A3) :- insert$inner(A1,A2,A3).",
             ":- pred insert$inner(A1,A2,A3) : (val_key(A1), val_tree(A2), "
             "term(A3)) => (val_key(A1), val_tree(A2), val_tree(A3)).",
             ":- pred peek(A1,A2) : (val_tree#(A1), term(A2)) => "
             "(val_key(A2)).",
             "peek(A1,A2) :- peek$inner(A1,A2).",
         }) {
        INFO(part);
        CHECK(listing.find(part) != std::string::npos);
    }

    CHECK(sm.condition_rename ==
          std::map<std::string, std::string>{
              {"bt:insert$inner/3#0", "bt:insert/3#0"},
              {"bt:insert$inner/3#1", "bt:insert/3#1"},
              {"bt:peek$inner/2#0", "bt:peek/2#0"},
              {"bt:peek$inner/2#1", "bt:peek/2#1"},
          });
}

TEST_CASE("shallow regtype shapes for the other libraries") {
    ShallowModule avl = shallow_interface(
        flatten({parse_module(corpus_library("avl").source, "avl")}),
        parse_module(corpus_library("avl").source, "avl"));
    std::string avl_listing = shallow_module_to_string(avl);
    CHECK(avl_listing.find("val_avl#(nil).") != std::string::npos);
    CHECK(avl_listing.find("val_avl#(node(_,_,_,_)).") != std::string::npos);

    ShallowModule heap = shallow_interface(
        flatten({parse_module(corpus_library("heap").source, "heap")}),
        parse_module(corpus_library("heap").source, "heap"));
    std::string heap_listing = shallow_module_to_string(heap);
    CHECK(heap_listing.find("val_heap#(heap(_)).") != std::string::npos);
}

TEST_CASE("the printed shallow module reloads to the same program") {
    const std::string& src_text = corpus_library("bt").source;
    ModuleSource src = parse_module(src_text, "bt");
    ShallowProgram sp = shallow_flatten({src});

    ShallowModule sm = shallow_interface(flatten({src}), src);
    ModuleSource reparsed = parse_module(shallow_module_to_string(sm));
    FlatProgram reloaded = flatten({reparsed});

    CHECK(snapshot(reloaded, "bt") == snapshot(sp.program, "bt"));

    // and it behaves identically
    for (const char* qt :
         {"insert(5, empty, T)", "insert(4, empty, T), insert(6, T, U)",
          "peek(empty, K)"}) {
        Query q1 = parse_query(qt, &reloaded);
        Query q2 = parse_query(qt, &sp.program);
        SolveResult r1 = Engine(reloaded, {Mode::SafeRt, {}}).solve(q1);
        SolveResult r2 = Engine(sp.program, {Mode::SafeRt, {}}).solve(q2);
        REQUIRE(r1.answers.size() == r2.answers.size());
        for (size_t i = 0; i < r1.answers.size(); ++i)
            CHECK(canonical_answer(r1.answers[i], q1.var_names.size()) ==
                  canonical_answer(r2.answers[i], q2.var_names.size()));
    }
}

TEST_CASE("wrappers keep verdicts while making boundary checks shallow") {
    CorpusPrograms progs = load_corpus_library("bt");
    const FlatProgram& orig = progs.program;
    const FlatProgram& shal = progs.shallow.program;
    const auto& rename = progs.shallow.condition_rename;

    auto ids = [&](const FlatProgram& p, const Query& q, Mode mode,
                   bool renamed) {
        Engine eng(p, {mode, {}});
        SolveResult r = eng.solve(q);
        std::string verdict;
        if (r.errored()) {
            verdict = p.condition(r.error->cond).id;
            if (renamed) {
                auto it = rename.find(verdict);
                if (it != rename.end()) verdict = it->second;
            }
        }
        return std::pair(r.answers.size(), verdict);
    };

    // the four interesting cases: ok, bad key, forged structure, junk
    for (const char* qt :
         {"insert(5, empty, T)", "insert(foo, empty, T)",
          "insert(5, tree(1,2,3), T)", "peek(junk, K)"}) {
        Query qo = parse_query(qt, &orig, /*trusted=*/false);
        Query qs = parse_query(qt, &shal, /*trusted=*/false);
        for (Mode m : {Mode::ClientSafe, Mode::SafeRt}) {
            INFO(qt << " under " << std::string(mode_name(m)));
            CHECK(ids(orig, qo, m, false) == ids(shal, qs, m, true));
        }
    }

    // shallow boundary checking is strictly cheaper on a real structure
    Term big = build_structure(progs, 64, 7);
    Query deep = op_query(progs, OpKind::Const, big, 0);
    Counters corig =
        Engine(orig, {Mode::ClientSafe, {}}).solve(deep).counters;
    Counters cshal =
        Engine(shal, {Mode::ClientSafe, {}}).solve(deep).counters;
    CHECK(corig.conditions == cshal.conditions);
    CHECK(cshal.prop_steps < corig.prop_steps);
}

TEST_CASE("predicates without clauses or assertions are not wrapped") {
    FlatProgram p = flatten({parse_module(
        ":- module(m, [stub/1, real/1]).\n"
        ":- regtype t_a/1.\nt_a(a).\n"
        ":- pred real(X) : (t_a(X)).\n"
        "real(a).\n")});
    ShallowModule sm = shallow_interface(
        p, parse_module(":- module(m, [stub/1, real/1]).\n"
                        ":- regtype t_a/1.\nt_a(a).\n"
                        ":- pred real(X) : (t_a(X)).\n"
                        "real(a).\n"));
    std::string listing = shallow_module_to_string(sm);
    CHECK(listing.find("real(A1) :- real$inner(A1).") != std::string::npos);
    CHECK(listing.find("stub$inner") == std::string::npos);
}
