#pragma once

#include <iosfwd>

#include "modlog/interp.hpp"
#include "modlog/shallow.hpp"

namespace modlog {

// One benchmark library: module text plus the condition ids a compile-time
// analysis is assumed to have proven (consumed by the safe-ct-rt mode).
struct CorpusLibrary {
    std::string name;
    std::string source;
    std::vector<std::string> discharge;
};

const std::vector<CorpusLibrary>& corpus();
const CorpusLibrary& corpus_library(const std::string& name);

// A corpus library loaded both ways: original and shallow interface.
struct CorpusPrograms {
    ModuleSource module;
    FlatProgram program;
    ShallowProgram shallow;
    std::set<uint32_t> discharged;          // slots in program
    std::set<uint32_t> shallow_discharged;  // slots in shallow.program
};

CorpusPrograms load_corpus_library(const std::string& name);

// Maps the discharge id list onto condition slots; ids transformed by the
// shallow renaming resolve through `rename`.
std::set<uint32_t> discharge_slots(
    const FlatProgram& p, const std::vector<std::string>& ids,
    const std::map<std::string, std::string>* rename = nullptr);

enum class OpKind : uint8_t { Const, Log };
std::string_view op_name(OpKind k);

struct BenchmarkSpec {
    std::string library = "bt";
    OpKind op = OpKind::Const;
    Mode mode = Mode::Unsafe;
    bool shallow = false;
    std::vector<uint32_t> sizes = {64, 256, 1024, 4096, 8192};
    uint32_t repetitions = 5;  // >= 3
    uint64_t seed = 42;
    bool time = true;  // false: counting only (ns_per_op stays 0)
};

struct BenchRow {
    std::string library;
    OpKind op = OpKind::Const;
    Mode mode = Mode::Unsafe;
    bool shallow = false;
    uint32_t n = 0;
    double ns_per_op = 0.0;
    uint64_t checks = 0;  // condition evaluations for one operation
};

// Times the library operation per size: a structure of n distinct keys is
// built first (unchecked), then the op runs in batches auto-scaled to at
// least 10 ms; the row records the median per-op time of `repetitions`
// batches after one warm-up, plus the per-op condition-evaluation count.
// A check violation during benchmarking throws (harness bug).
std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec,
                                    const CorpusPrograms& progs);
std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec);

void emit_csv(const std::vector<BenchRow>& rows, std::ostream& os);
void emit_gnuplot(const std::vector<BenchRow>& rows, std::ostream& os);

// Deterministic shuffle of 1..n.
std::vector<int64_t> key_permutation(uint32_t n, uint64_t seed);

// The n-key structure produced by chaining the library's insert op.
Term build_structure(const CorpusPrograms& progs, uint32_t n, uint64_t seed);

// One operation as a ready-to-solve query (structure spliced in).
Query op_query(const CorpusPrograms& progs, OpKind op, const Term& structure,
               int64_t probe_key);

}  // namespace modlog
