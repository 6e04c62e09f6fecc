#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>

#include "modlog/program.hpp"

namespace modlog {

enum class Mode : uint8_t { Unsafe, ClientSafe, SafeRt, SafeCtRt };

std::string_view mode_name(Mode m);
std::optional<Mode> mode_from_name(std::string_view s);

struct CheckConfig {
    Mode mode = Mode::SafeRt;
    // Condition slots proven off-line; SafeCtRt skips them at call sites
    // inside the defining module. Boundary calls are always kept.
    std::set<uint32_t> discharged;
};

enum class GoalKind : uint8_t { Call, Ret, RetChk };

// One captured derivation state: the head of the goal stack plus the store
// restricted to the query variables, and the rule that produced the state.
struct TraceState {
    enum class Shape : uint8_t { Goal, Empty, Err };

    Shape shape = Shape::Goal;
    GoalKind head = GoalKind::Call;
    Term goal = Term::integer(0);  // resolved head literal (Shape::Goal)
    uint32_t err_cond = 0;         // violated condition (Shape::Err)
    Subst query_store;
    uint8_t rule = 0;             // 0 initial, else reduction rule 1..3
    int32_t clause_ordinal = -1;  // rule 2 only

    bool operator==(const TraceState& o) const;
};

using DerivationTrace = std::vector<TraceState>;

enum class Outcome : uint8_t { Success, Failure, Error };

struct Derivation {
    DerivationTrace states;
    Outcome outcome = Outcome::Failure;
    std::vector<int32_t> script;  // clause choices, in reduction order
    uint32_t err_cond = 0;
};

// Rewrites a run-time-checked derivation into a plain one: retchk states
// become ret states and a terminal err state is dropped.
DerivationTrace erase_errors(const DerivationTrace& t);

struct RtcError {
    uint32_t cond = 0;
    AssertionCondition::Kind phase = AssertionCondition::Kind::Calls;
    Term culprit = Term::integer(0);  // resolved call atom
    Subst store_excerpt;              // query variables at the error
};

struct Counters {
    uint64_t reductions = 0;      // main-derivation reductions
    uint64_t conditions = 0;      // condition evaluations (pre or post)
    uint64_t prop_steps = 0;      // reductions spent inside checks
    uint64_t boundary_events = 0; // cross-module calls and returns

    Counters& operator+=(const Counters& o);
};

// Sink for module-boundary traffic: owner module and one resolved argument.
using BoundaryHook = std::function<void(const std::string&, const Term&)>;

struct SolveOptions {
    size_t max_answers = SIZE_MAX;
    uint64_t max_steps = 0;  // 0 = unlimited; exceeded -> ResourceLimit
    bool capture = false;    // collect the full derivation set
    const std::vector<int32_t>* script = nullptr;  // scripted replay
    const BoundaryHook* boundary = nullptr;
    std::ostream* trace_stream = nullptr;
};

enum class ReplayStatus : uint8_t {
    None,            // not a scripted run
    Complete,        // reached a derivation leaf (answer, failure or err)
    ScriptExhausted, // stopped at a call needing a choice
    Mismatch,        // scripted clause did not apply
};

class ResourceLimit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveResult {
    std::vector<Subst> answers;  // projections on the query variables
    std::optional<RtcError> error;
    Counters counters;
    std::vector<Derivation> derivations;  // when capture was requested
    ReplayStatus replay = ReplayStatus::None;

    bool errored() const { return error.has_value(); }
};

class Engine {
public:
    Engine(const FlatProgram& program, CheckConfig cfg);

    SolveResult solve(const Query& q, const SolveOptions& opts = {});

    // True when the conjunction (instantiated literals) succeeds without
    // binding any currently unbound variable. The store is left untouched.
    bool check_trivially(const std::vector<Term>& literals, Store& store,
                         Counters& counters) const;

    // Condition slots active for a call to `pred` arriving from module
    // `caller_idx` under this engine's config.
    std::vector<uint32_t> active_conditions(const Predicate& pred,
                                            uint32_t caller_idx) const;

    const FlatProgram& program() const { return prog_; }
    const CheckConfig& config() const { return cfg_; }

private:
    struct Run;
    friend struct Run;

    const FlatProgram& prog_;
    CheckConfig cfg_;
};

// Builds `ans(v0,...,vn)` over the resolved query variables and renames
// variables canonically, so answers compare independently of internal ids.
Term canonical_answer(const Subst& answer, size_t num_query_vars);

// Substitutes actual arguments for a condition literal's formal variables
// (formal variable i stands for argument position i).
Term instantiate(const Term& formal, std::span<const Term> args);

}  // namespace modlog
