#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "modlog/bench.hpp"
#include "modlog/escape.hpp"
#include "modlog/flatten.hpp"
#include "modlog/interp.hpp"
#include "modlog/parser.hpp"
#include "modlog/printer.hpp"
#include "modlog/shallow.hpp"

namespace {

using namespace modlog;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw LoadError(LoadErrorKind::ParseError, "cannot open " + path,
                        path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> read_id_lines(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() &&
               (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        size_t at = line.find_first_not_of(' ');
        if (at != std::string::npos) ids.push_back(line.substr(at));
    }
    return ids;
}

struct Loaded {
    std::vector<ModuleSource> sources;
    FlatProgram program;
    std::map<std::string, std::string> rename;  // shallow id -> original id
};

Loaded load(const std::vector<std::string>& files, bool shallow) {
    Loaded out;
    for (const std::string& path : files)
        out.sources.push_back(parse_module(read_file(path), path));
    if (shallow) {
        ShallowProgram sp = shallow_flatten(out.sources);
        out.program = std::move(sp.program);
        out.rename = std::move(sp.condition_rename);
    } else {
        out.program = flatten(out.sources);
    }
    return out;
}

CheckConfig make_config(const Loaded& l, const std::string& mode,
                        const std::string& discharge_file, bool shallow) {
    CheckConfig cfg;
    cfg.mode = *mode_from_name(mode);
    if (!discharge_file.empty())
        cfg.discharged = discharge_slots(l.program,
                                         read_id_lines(discharge_file),
                                         shallow ? &l.rename : nullptr);
    return cfg;
}

int report_violation(const FlatProgram& p, const RtcError& e,
                     const std::vector<std::string>& var_names) {
    const AssertionCondition& c = p.conditions[e.cond];
    const char* kind =
        c.kind == AssertionCondition::Kind::Calls ? "calls" : "success";
    std::cout << "violation: " << c.id << " (" << kind << ")\n";
    PrintOptions po;
    po.var_names = &var_names;
    std::cout << "  goal:  " << term_to_string(e.culprit, po) << '\n';
    for (const auto& [v, t] : e.store_excerpt) {
        if (t.is_var() && t.var_id() == v) continue;
        std::string name =
            v < var_names.size() ? var_names[v] : "_G" + std::to_string(v);
        std::cout << "  store: " << name << " = " << term_to_string(t, po)
                  << '\n';
    }
    return 1;
}

void print_answers(const Query& q, const SolveResult& r) {
    if (r.answers.empty()) {
        std::cout << "no\n";
        return;
    }
    PrintOptions po;
    po.var_names = &q.var_names;
    bool first_answer = true;
    for (const Subst& ans : r.answers) {
        if (!first_answer) std::cout << ";\n";
        first_answer = false;
        bool printed = false;
        for (VarId v = 0; v < q.var_names.size(); ++v) {
            const Term* t = ans.lookup(v);
            if (!t || (t->is_var() && t->var_id() == v)) continue;
            std::cout << q.var_names[v] << " = " << term_to_string(*t, po)
                      << '\n';
            printed = true;
        }
        if (!printed) std::cout << "yes\n";
    }
}

int cmd_check(const std::vector<std::string>& files, bool shallow) {
    Loaded l = load(files, shallow);
    for (const auto& [name, m] : l.program.modules) {
        std::cout << "module " << name << ": " << m.defs.size()
                  << " predicates, " << m.export_list.size() << " exported, "
                  << m.hidden.size() << " hidden functors\n";
    }
    std::cout << "ok\n";
    return 0;
}

int cmd_run(const std::vector<std::string>& files, const std::string& query,
            const std::string& mode, bool shallow,
            const std::string& discharge_file, const std::string& trace_path,
            size_t max_answers) {
    Loaded l = load(files, shallow);
    CheckConfig cfg = make_config(l, mode, discharge_file, shallow);
    Query q = parse_query(query, &l.program);
    SolveOptions opts;
    opts.max_answers = max_answers;
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace)
            throw LoadError(LoadErrorKind::ParseError,
                            "cannot open " + trace_path, trace_path);
        opts.trace_stream = &trace;
    }
    Engine eng(l.program, cfg);
    SolveResult r = eng.solve(q, opts);
    if (r.error) return report_violation(l.program, *r.error, q.var_names);
    print_answers(q, r);
    return 0;
}

int cmd_explain(const std::string& kind, const std::string& module,
                const std::vector<std::string>& files) {
    Loaded l = load(files, /*shallow=*/false);
    if (l.program.mod_index(module) == 0)
        throw LoadError(LoadErrorKind::ParseError, "unknown module: " + module,
                        module);
    if (kind == "conditions") {
        std::cout << module_conditions_to_string(l.program, module);
    } else if (kind == "escape") {
        EscapeDescription desc = escaping_terms(l.program, module);
        std::cout << escape_to_string(materialize(l.program, desc));
    } else {
        for (const ModuleSource& src : l.sources)
            if (src.name == module)
                std::cout << shallow_module_to_string(
                    shallow_interface(l.program, src));
    }
    return 0;
}

int cmd_bench(const std::vector<std::string>& libs, const std::string& op,
              const std::string& mode, const std::string& variant,
              std::vector<uint32_t> sizes, uint32_t reps, uint64_t seed,
              bool parallel, const std::string& csv_path, bool gnuplot) {
    std::vector<BenchmarkSpec> cells;
    for (const std::string& lib : libs) {
        for (OpKind k : {OpKind::Const, OpKind::Log}) {
            if (op != "both" && op_name(k) != op) continue;
            for (Mode m : {Mode::Unsafe, Mode::ClientSafe, Mode::SafeCtRt,
                           Mode::SafeRt}) {
                if (mode != "all" && mode_name(m) != mode) continue;
                for (bool shallow : {false, true}) {
                    if (variant == "full" && shallow) continue;
                    if (variant == "shallow" && !shallow) continue;
                    BenchmarkSpec spec;
                    spec.library = lib;
                    spec.op = k;
                    spec.mode = m;
                    spec.shallow = shallow;
                    if (!sizes.empty()) spec.sizes = sizes;
                    spec.repetitions = reps;
                    spec.seed = seed;
                    spec.time = !parallel;
                    cells.push_back(spec);
                }
            }
        }
    }

    std::vector<BenchRow> rows;
    if (parallel) {
        // counting-only cells may overlap; timing runs stay sequential
        std::vector<std::future<std::vector<BenchRow>>> futures;
        futures.reserve(cells.size());
        for (const BenchmarkSpec& spec : cells)
            futures.push_back(std::async(std::launch::async, [spec] {
                return run_benchmark(spec);
            }));
        for (auto& f : futures)
            for (BenchRow& row : f.get()) rows.push_back(std::move(row));
    } else {
        for (const BenchmarkSpec& spec : cells) {
            CorpusPrograms progs = load_corpus_library(spec.library);
            for (BenchRow& row : run_benchmark(spec, progs))
                rows.push_back(std::move(row));
        }
    }

    auto emit = [&](std::ostream& os) {
        if (gnuplot)
            emit_gnuplot(rows, os);
        else
            emit_csv(rows, os);
    };
    if (csv_path.empty()) {
        emit(std::cout);
    } else {
        std::ofstream out(csv_path);
        if (!out)
            throw LoadError(LoadErrorKind::ParseError,
                            "cannot open " + csv_path, csv_path);
        emit(out);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"modular logic programs with run-time assertion checking"};
    app.require_subcommand(1);
    const std::vector<std::string> mode_names = {"unsafe", "client-safe",
                                                 "safe-rt", "safe-ct-rt"};

    auto* check = app.add_subcommand("check", "load modules and report");
    std::vector<std::string> check_files;
    bool check_shallow = false;
    check->add_option("files", check_files, "module files")->required();
    check->add_flag("--shallow", check_shallow,
                    "load the shallow interface transformation");

    auto* run = app.add_subcommand("run", "solve a query against modules");
    std::vector<std::string> run_files;
    std::string run_query, run_mode = "safe-rt", run_discharge, run_trace;
    bool run_shallow = false;
    size_t run_max_answers = 10;
    run->add_option("files", run_files, "module files")->required();
    run->add_option("-q,--query", run_query, "query conjunction")->required();
    run->add_option("--mode", run_mode, "checking mode")
        ->check(CLI::IsMember(mode_names));
    run->add_flag("--shallow", run_shallow,
                  "run against the shallow interface transformation");
    run->add_option("--discharge", run_discharge,
                    "file of condition ids proven off-line (safe-ct-rt)");
    run->add_option("--trace", run_trace, "write the derivation trace here");
    run->add_option("--max-answers", run_max_answers,
                    "stop after this many answers");

    auto* explain =
        app.add_subcommand("explain", "print derived artifacts for a module");
    std::string explain_kind, explain_module;
    std::vector<std::string> explain_files;
    explain->add_option("kind", explain_kind, "conditions | escape | shallow")
        ->required()
        ->check(CLI::IsMember({"conditions", "escape", "shallow"}));
    explain->add_option("module", explain_module, "module name")->required();
    explain->add_option("files", explain_files, "module files")->required();

    auto* bench = app.add_subcommand("bench", "time corpus operations");
    std::vector<std::string> bench_libs = {"bt"};
    std::string bench_op = "both", bench_mode = "all", bench_variant = "both";
    std::vector<uint32_t> bench_sizes;
    uint32_t bench_reps = 5;
    uint64_t bench_seed = 42;
    bool bench_parallel = false, bench_gnuplot = false;
    std::string bench_csv;
    bench->add_option("--lib", bench_libs, "corpus libraries (bt avl heap)");
    bench->add_option("--op", bench_op, "peek | insert | both")
        ->check(CLI::IsMember({"peek", "insert", "both"}));
    bench->add_option("--mode", bench_mode, "one checking mode, or all")
        ->check(CLI::IsMember({"unsafe", "client-safe", "safe-rt",
                               "safe-ct-rt", "all"}));
    bench->add_option("--variant", bench_variant, "full | shallow | both")
        ->check(CLI::IsMember({"full", "shallow", "both"}));
    bench->add_option("--sizes", bench_sizes, "structure sizes");
    bench->add_option("--reps", bench_reps, "timed batches per size");
    bench->add_option("--seed", bench_seed, "key permutation seed");
    bench->add_flag("--parallel", bench_parallel,
                    "run cells concurrently (counting only, no timing)");
    bench->add_option("--csv", bench_csv, "write rows here (default stdout)");
    bench->add_flag("--gnuplot", bench_gnuplot,
                    "whitespace-separated columns for plotting");

    auto* version = app.add_subcommand("version", "print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        if (version->parsed()) {
            std::cout << "modlog 1.0.0\n";
            return 0;
        }
        if (check->parsed()) return cmd_check(check_files, check_shallow);
        if (run->parsed())
            return cmd_run(run_files, run_query, run_mode, run_shallow,
                           run_discharge, run_trace, run_max_answers);
        if (explain->parsed())
            return cmd_explain(explain_kind, explain_module, explain_files);
        if (bench->parsed())
            return cmd_bench(bench_libs, bench_op, bench_mode, bench_variant,
                             bench_sizes, bench_reps, bench_seed,
                             bench_parallel, bench_csv, bench_gnuplot);
    } catch (const LoadError& e) {
        std::cerr << "load error (" << load_error_kind_name(e.kind()) << ")";
        if (!e.where().empty()) {
            std::cerr << " at " << e.where();
            if (e.line()) std::cerr << ':' << e.line();
        }
        std::cerr << ": " << e.what() << '\n';
        return 2;
    } catch (const EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << " (culprit: "
                  << term_to_string(e.culprit()) << ")\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 3;
}
