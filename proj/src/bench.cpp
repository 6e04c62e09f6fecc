#include "modlog/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <tuple>

namespace modlog {

namespace {

Term initial_structure(const std::string& lib) {
    if (lib == "bt") return Term::atom(intern_symbol("empty", 0, "bt"));
    if (lib == "avl") return Term::atom(intern_symbol("nil", 0, "avl"));
    if (lib == "heap")
        return Term::comp(intern_symbol("heap", 1, "heap"),
                          {Term::atom(intern_symbol("hempty", 0, "heap"))});
    throw LoadError(LoadErrorKind::ParseError,
                    "no benchmark driver for library: " + lib, lib);
}

[[noreturn]] void harness_violation(const FlatProgram& p, const RtcError& e) {
    throw std::logic_error("benchmark violated condition " +
                           p.conditions[e.cond].id +
                           " (harness bug: inputs must be well-typed)");
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    if (v.size() % 2) return v[m];
    return (v[m - 1] + v[m]) / 2.0;
}

}  // namespace

std::string_view op_name(OpKind k) {
    return k == OpKind::Const ? "peek" : "insert";
}

std::vector<int64_t> key_permutation(uint32_t n, uint64_t seed) {
    std::vector<int64_t> keys(n);
    std::iota(keys.begin(), keys.end(), int64_t{1});
    std::mt19937_64 rng(seed);
    std::shuffle(keys.begin(), keys.end(), rng);
    return keys;
}

Term build_structure(const CorpusPrograms& progs, uint32_t n, uint64_t seed) {
    Engine eng(progs.program, {Mode::Unsafe, {}});
    SymId ins = intern_symbol("insert", 3, progs.module.name);
    SolveOptions opts;
    opts.max_answers = 1;
    Term s = initial_structure(progs.module.name);
    for (int64_t k : key_permutation(n, seed)) {
        Query q;
        q.goals = {Term::comp(ins, {Term::integer(k), s, Term::var(0)})};
        q.var_names = {"T"};
        SolveResult r = eng.solve(q, opts);
        if (r.answers.empty())
            throw std::logic_error("benchmark insert failed while building " +
                                   progs.module.name + " structure");
        s = *r.answers[0].lookup(0);
    }
    return s;
}

Query op_query(const CorpusPrograms& progs, OpKind op, const Term& structure,
               int64_t probe_key) {
    const std::string& lib = progs.module.name;
    Query q;
    if (op == OpKind::Const) {
        q.goals = {Term::comp(intern_symbol("peek", 2, lib),
                              {structure, Term::var(0)})};
        q.var_names = {"K"};
    } else {
        q.goals = {Term::comp(intern_symbol("insert", 3, lib),
                              {Term::integer(probe_key), structure,
                               Term::var(0)})};
        q.var_names = {"T"};
    }
    return q;
}

std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec,
                                    const CorpusPrograms& progs) {
    const FlatProgram& prog =
        spec.shallow ? progs.shallow.program : progs.program;
    CheckConfig cfg;
    cfg.mode = spec.mode;
    if (spec.mode == Mode::SafeCtRt)
        cfg.discharged =
            spec.shallow ? progs.shallow_discharged : progs.discharged;
    Engine eng(prog, cfg);

    SolveOptions opts;
    opts.max_answers = 1;
    uint32_t reps = std::max<uint32_t>(spec.repetitions, 3);

    std::vector<BenchRow> rows;
    for (uint32_t n : spec.sizes) {
        Term structure = build_structure(progs, n, spec.seed);
        Query q = op_query(progs, spec.op, structure, int64_t{n} + 1);

        BenchRow row;
        row.library = spec.library;
        row.op = spec.op;
        row.mode = spec.mode;
        row.shallow = spec.shallow;
        row.n = n;

        // counting pass (also sanity-checks the query)
        SolveResult counted = eng.solve(q, opts);
        if (counted.errored()) harness_violation(prog, *counted.error);
        if (counted.answers.empty())
            throw std::logic_error("benchmark op failed on " + spec.library);
        row.checks = counted.counters.conditions;

        if (spec.time) {
            using clock = std::chrono::steady_clock;
            auto time_batch = [&](uint64_t k) {
                auto t0 = clock::now();
                for (uint64_t i = 0; i < k; ++i) {
                    SolveResult r = eng.solve(q, opts);
                    if (r.errored()) harness_violation(prog, *r.error);
                }
                std::chrono::duration<double, std::nano> dt = clock::now() - t0;
                return dt.count();
            };
            // auto-scale the batch until it runs >= 10 ms; these calibration
            // batches double as warm-up and are not measured
            uint64_t batch = 1;
            double elapsed = time_batch(batch);
            while (elapsed < 1e7) {
                double target = 1.2e7 / std::max(elapsed, 1.0);
                batch = std::max(batch + 1,
                                 uint64_t(std::ceil(double(batch) * target)));
                elapsed = time_batch(batch);
            }
            std::vector<double> per_op;
            per_op.reserve(reps);
            for (uint32_t r = 0; r < reps; ++r)
                per_op.push_back(time_batch(batch) / double(batch));
            row.ns_per_op = median(per_op);
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec) {
    return run_benchmark(spec, load_corpus_library(spec.library));
}

namespace {

void sort_rows(std::vector<BenchRow>& rows) {
    std::sort(rows.begin(), rows.end(),
              [](const BenchRow& a, const BenchRow& b) {
                  auto key = [](const BenchRow& r) {
                      return std::tuple(r.library, static_cast<int>(r.op),
                                        static_cast<int>(r.mode), r.shallow,
                                        r.n);
                  };
                  return key(a) < key(b);
              });
}

void emit_rows(const std::vector<BenchRow>& rows, std::ostream& os,
               char sep) {
    std::vector<BenchRow> sorted = rows;
    sort_rows(sorted);
    for (const BenchRow& r : sorted) {
        os << r.library << sep << op_name(r.op) << sep << mode_name(r.mode)
           << sep << (r.shallow ? "shallow" : "full") << sep << r.n << sep;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", r.ns_per_op);
        os << buf << sep << r.checks << '\n';
    }
}

}  // namespace

void emit_csv(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << "library,op,mode,shallow,n,ns_per_op,checks\n";
    emit_rows(rows, os, ',');
}

void emit_gnuplot(const std::vector<BenchRow>& rows, std::ostream& os) {
    os << "# library op mode shallow n ns_per_op checks\n";
    emit_rows(rows, os, ' ');
}

}  // namespace modlog
