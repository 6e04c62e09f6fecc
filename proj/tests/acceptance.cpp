// Acceptance checks: one line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "gen.hpp"

using namespace modlog;
using namespace modlog::testing;

namespace {

struct Criterion {
    int number;
    std::string label;
    std::function<bool(std::string&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    return dt.count();
}

// --- 1: the three bt listings -----------------------------------------------

bool golden_listings(std::string& why) {
    auto t0 = std::chrono::steady_clock::now();
    FlatProgram p = flatten({parse_module(corpus_library("bt").source, "bt")});

    std::string conditions = module_conditions_to_string(p, "bt");
    const char* want_calls =
        "bt:insert/3#0: calls(insert(A1,A2,A3), "
        "(val_key(A1), val_tree(A2), term(A3))).";
    const char* want_success =
        "bt:insert/3#1: success(insert(A1,A2,A3), "
        "(val_key(A1), val_tree(A2), term(A3)), "
        "(val_key(A1), val_tree(A2), val_tree(A3))).";
    if (conditions.find(want_calls) == std::string::npos ||
        conditions.find(want_success) == std::string::npos) {
        why = "insert/3 conditions do not match the expected normal form";
        return false;
    }

    std::string escape = escape_to_string(materialize(p, escaping_terms(p, "bt")));
    if (escape !=
        "esc_bt(bt:empty).\n"
        "esc_bt(bt:tree(A1,A2,A3)) :- val_tree(A1), val_key(A2), "
        "val_tree(A3).\n"
        "esc_bt(A1) :- usr(A1).\n") {
        why = "esc_bt differs from the expected three clauses";
        return false;
    }

    ShallowModule sm =
        shallow_interface(p, parse_module(corpus_library("bt").source, "bt"));
    std::string shallow = shallow_module_to_string(sm);
    for (const char* part : {
             "val_tree#(empty).",
             "val_tree#(tree(_,_,_)).",
             "insert(A1,A2,A3) :- insert$inner(A1,A2,A3).",
             ":- pred insert(A1,A2,A3) : (val_key(A1), val_tree#(A2), "
             "term(A3)) => (val_key(A1), val_tree(A2), val_tree(A3)).",
             ":- pred insert$inner(A1,A2,A3) : (val_key(A1), val_tree(A2), "
             "term(A3)) => (val_key(A1), val_tree(A2), val_tree(A3)).",
         }) {
        if (shallow.find(part) == std::string::npos) {
            why = std::string("shallow interface misses: ") + part;
            return false;
        }
    }

    if (seconds_since(t0) >= 1.0) {
        why = "listing generation exceeded 1 s";
        return false;
    }
    return true;
}

// --- 2: trace simulation both ways ------------------------------------------

bool trace_simulation(std::string& why) {
    auto t0 = std::chrono::steady_clock::now();
    TraceStats fwd, bwd;

    for (const char* lib : {"bt", "avl", "heap"}) {
        CorpusPrograms progs = load_corpus_library(lib);
        Rng rng(0x7ace5 + lib[0]);
        CorpusDriver driver(progs, rng);
        for (int i = 0; i < 180; ++i) {
            Query q = driver.next();
            check_rtc_to_plain(progs.program, q, fwd);
            check_plain_to_rtc(progs.program, q, bwd);
        }
    }

    Rng rng(0x9e4e2a7e);
    for (int i = 0; i < 100; ++i) {
        GenProgram gp = generate_program(rng);
        for (const std::string& text : gp.query_texts) {
            Query q = parse_query(text, &gp.program, /*trusted=*/true);
            check_rtc_to_plain(gp.program, q, fwd);
            check_plain_to_rtc(gp.program, q, bwd);
        }
    }

    char buf[256];
    if (fwd.failures || bwd.failures) {
        std::snprintf(buf, sizeof buf, "%llu/%llu mismatches (first: %s)",
                      (unsigned long long)fwd.failures,
                      (unsigned long long)bwd.failures,
                      (fwd.first_failure.empty() ? bwd.first_failure
                                                 : fwd.first_failure)
                          .c_str());
        why = buf;
        return false;
    }
    if (fwd.queries < 500 + 100 || fwd.errors < 50 || bwd.errors < 50) {
        why = "experiment lacks volume or violations";
        return false;
    }
    double dt = seconds_since(t0);
    if (dt >= 30.0) {
        std::snprintf(buf, sizeof buf, "took %.1f s (budget 30 s)", dt);
        why = buf;
        return false;
    }
    return true;
}

// --- 3: boundary terms conform to esc_m --------------------------------------

bool escape_conformance(std::string& why) {
    uint64_t total_events = 0;
    for (const char* lib : {"bt", "avl", "heap"}) {
        CorpusPrograms progs = load_corpus_library(lib);
        EscapeChecker checker(progs.program);
        BoundaryHook hook = checker.hook();
        Engine eng(progs.program, {Mode::ClientSafe, {}});
        Rng rng(0xe5cafe + lib[0]);
        CorpusDriver driver(progs, rng);

        SolveOptions opts;
        opts.max_answers = 4;
        opts.boundary = &hook;
        for (int i = 0; i < 3400; ++i) {
            Query q = driver.next(/*valid_only=*/true);
            SolveResult r = eng.solve(q, opts);
            if (r.errored()) {
                why = std::string(lib) + ": valid op violated " +
                      progs.program.condition(r.error->cond).id;
                return false;
            }
        }
        if (checker.violations) {
            why = std::string(lib) + ": " +
                  std::to_string(checker.violations) +
                  " escaping-term violations (first: " +
                  checker.first_violation + ")";
            return false;
        }
        if (checker.events == 0) {
            why = std::string(lib) + ": boundary hook never fired";
            return false;
        }
        total_events += checker.events;
    }
    if (total_events < 10000) {
        why = "fewer than 10000 boundary terms captured";
        return false;
    }
    return true;
}

// --- 4: shallow interfaces keep verdicts -------------------------------------

bool shallow_verdicts(std::string& why) {
    for (const char* lib : {"bt", "avl", "heap"}) {
        CorpusPrograms progs = load_corpus_library(lib);
        Rng rng(0x5a110 + lib[0]);
        CorpusDriver driver(progs, rng);
        for (int i = 0; i < 340; ++i) {
            Query q = driver.next();
            for (Mode m : {Mode::ClientSafe, Mode::SafeRt}) {
                Verdict orig = run_verdict(progs.program, q, m, nullptr);
                Verdict shal = run_verdict(progs.shallow.program, q, m,
                                           &progs.shallow.condition_rename);
                if (orig.skipped || shal.skipped) continue;
                if (!(orig == shal)) {
                    why = std::string(lib) + " op " + std::to_string(i) +
                          " under " + std::string(mode_name(m)) + ": " +
                          verdict_to_string(orig) + " vs " +
                          verdict_to_string(shal);
                    return false;
                }
            }
        }
    }
    return true;
}

// --- 5: peek stays flat behind shallow checks --------------------------------

bool peek_growth_shape(std::string& why) {
    auto t0 = std::chrono::steady_clock::now();
    CorpusPrograms progs = load_corpus_library("bt");
    BenchmarkSpec spec;
    spec.op = OpKind::Const;
    spec.mode = Mode::ClientSafe;
    spec.sizes = {128, 8192};

    spec.shallow = false;
    std::vector<BenchRow> full = run_benchmark(spec, progs);
    spec.shallow = true;
    std::vector<BenchRow> shallow = run_benchmark(spec, progs);

    double full_ratio = full[1].ns_per_op / full[0].ns_per_op;
    double shallow_ratio = shallow[1].ns_per_op / shallow[0].ns_per_op;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "full t(8192)/t(128) = %.1f (need >= 8), shallow = %.2f "
                  "(need <= 2)",
                  full_ratio, shallow_ratio);
    why = buf;
    if (full_ratio < 8.0 || shallow_ratio > 2.0) return false;
    if (seconds_since(t0) >= 120.0) {
        why = "exceeded the 2 min budget";
        return false;
    }
    why.clear();
    return true;
}

// --- 6: insert overhead direction, three runs in a row -----------------------

bool insert_overhead_direction(std::string& why) {
    CorpusPrograms progs = load_corpus_library("bt");
    BenchmarkSpec spec;
    spec.op = OpKind::Log;
    spec.sizes = {8192};

    for (int run = 1; run <= 3; ++run) {
        spec.mode = Mode::ClientSafe;
        spec.shallow = true;
        double shallow = run_benchmark(spec, progs)[0].ns_per_op;
        spec.shallow = false;
        double full = run_benchmark(spec, progs)[0].ns_per_op;

        spec.mode = Mode::SafeRt;
        double safert = run_benchmark(spec, progs)[0].ns_per_op;
        spec.mode = Mode::Unsafe;
        double unsafe = run_benchmark(spec, progs)[0].ns_per_op;

        char buf[200];
        if (shallow >= full) {
            std::snprintf(buf, sizeof buf,
                          "run %d: client-safe shallow %.0f ns !< full %.0f ns",
                          run, shallow, full);
            why = buf;
            return false;
        }
        if (safert < 5.0 * unsafe) {
            std::snprintf(buf, sizeof buf,
                          "run %d: safe-rt %.0f ns < 5x unsafe %.0f ns", run,
                          safert, unsafe);
            why = buf;
            return false;
        }
    }
    return true;
}

// --- 7: counts are reproducible and ordered by mode ---------------------------

bool count_determinism(std::string& why) {
    const Mode modes[] = {Mode::Unsafe, Mode::ClientSafe, Mode::SafeCtRt,
                          Mode::SafeRt};
    for (const char* lib : {"bt", "avl", "heap"}) {
        CorpusPrograms progs = load_corpus_library(lib);
        for (OpKind op : {OpKind::Const, OpKind::Log}) {
            for (bool shallow : {false, true}) {
                for (uint32_t n : {64u, 256u}) {
                    BenchmarkSpec spec;
                    spec.library = lib;
                    spec.op = op;
                    spec.shallow = shallow;
                    spec.sizes = {n};
                    spec.time = false;

                    uint64_t counts[4];
                    for (int m = 0; m < 4; ++m) {
                        spec.mode = modes[m];
                        uint64_t c1 = run_benchmark(spec, progs)[0].checks;
                        uint64_t c2 = run_benchmark(spec, progs)[0].checks;
                        if (c1 != c2) {
                            why = std::string(lib) + " cell count changed "
                                  "between runs";
                            return false;
                        }
                        counts[m] = c1;
                    }
                    char cell[96];
                    std::snprintf(cell, sizeof cell, "%s/%s/%s/n=%u", lib,
                                  std::string(op_name(op)).c_str(),
                                  shallow ? "shallow" : "full", n);
                    if (counts[0] != 0) {
                        why = std::string(cell) + ": unsafe checks nonzero";
                        return false;
                    }
                    if (counts[1] < 1) {
                        why = std::string(cell) + ": client-safe checks zero";
                        return false;
                    }
                    if (!(counts[1] <= counts[2] && counts[2] <= counts[3])) {
                        char buf[200];
                        std::snprintf(buf, sizeof buf,
                                      "%s: chain %llu <= %llu <= %llu broken",
                                      cell, (unsigned long long)counts[1],
                                      (unsigned long long)counts[2],
                                      (unsigned long long)counts[3]);
                        why = buf;
                        return false;
                    }
                }
            }
        }
    }
    return true;
}

// --- 8: containment never claims more than membership delivers ----------------

bool containment_soundness(std::string& why) {
    Rng rng(0xc0147a1);
    int true_pairs = 0;
    uint64_t members_checked = 0;

    while (true_pairs < 200) {
        std::vector<SymId> syms;
        FlatProgram p = generate_regtypes(rng, 6, syms);
        ContainmentCache cache;
        for (size_t i = 0; i < syms.size(); ++i) {
            for (size_t j = 0; j < syms.size(); ++j) {
                if (i == j || !cache.contains(p, syms[i], syms[j])) continue;
                ++true_pairs;
                std::vector<Term> members;
                enumerate_members(p, syms[i], 4, members);
                for (const Term& t : members) {
                    if (!regtype_accepts(p, syms[i], t)) continue;
                    ++members_checked;
                    if (!regtype_accepts(p, syms[j], t)) {
                        why = symbol(syms[i]).name + " <= " +
                              symbol(syms[j]).name + " claimed, but " +
                              term_to_string(t) + " is a counterexample";
                        return false;
                    }
                }
            }
        }
    }
    if (members_checked < 500) {
        why = "too few members enumerated to trust the result";
        return false;
    }
    return true;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "appendix listings", golden_listings},
        {2, "trace simulation", trace_simulation},
        {3, "escape conformance", escape_conformance},
        {4, "shallow verdicts", shallow_verdicts},
        {5, "peek growth shape", peek_growth_shape},
        {6, "insert overhead direction", insert_overhead_direction},
        {7, "count determinism and monotonicity", count_determinism},
        {8, "containment soundness", containment_soundness},
    };

    int failed = 0;
    for (Criterion& c : criteria) {
        std::string why;
        bool ok = false;
        try {
            ok = c.run(why);
        } catch (const std::exception& e) {
            why = std::string("exception: ") + e.what();
        }
        std::cout << "criterion " << c.number << " (" << c.label
                  << "): " << (ok ? "PASS" : "FAIL");
        if (!ok && !why.empty()) std::cout << " -- " << why;
        std::cout << std::endl;
        if (!ok) ++failed;
    }
    return failed ? 1 : 0;
}
