#include "modlog/interp.hpp"

#include <algorithm>
#include <cassert>
#include <ostream>

#include "modlog/printer.hpp"

namespace modlog {

std::string_view mode_name(Mode m) {
    switch (m) {
        case Mode::Unsafe: return "unsafe";
        case Mode::ClientSafe: return "client-safe";
        case Mode::SafeRt: return "safe-rt";
        case Mode::SafeCtRt: return "safe-ct-rt";
    }
    return "?";
}

std::optional<Mode> mode_from_name(std::string_view s) {
    if (s == "unsafe") return Mode::Unsafe;
    if (s == "client-safe") return Mode::ClientSafe;
    if (s == "safe-rt") return Mode::SafeRt;
    if (s == "safe-ct-rt") return Mode::SafeCtRt;
    return std::nullopt;
}

bool TraceState::operator==(const TraceState& o) const {
    if (shape != o.shape || rule != o.rule || clause_ordinal != o.clause_ordinal)
        return false;
    if (shape == Shape::Err && err_cond != o.err_cond) return false;
    if (shape == Shape::Goal && (head != o.head || !(goal == o.goal)))
        return false;
    return query_store == o.query_store;
}

Counters& Counters::operator+=(const Counters& o) {
    reductions += o.reductions;
    conditions += o.conditions;
    prop_steps += o.prop_steps;
    boundary_events += o.boundary_events;
    return *this;
}

DerivationTrace erase_errors(const DerivationTrace& t) {
    DerivationTrace out;
    out.reserve(t.size());
    for (const TraceState& s : t) {
        if (s.shape == TraceState::Shape::Err) continue;
        TraceState e = s;
        if (e.shape == TraceState::Shape::Goal && e.head == GoalKind::RetChk)
            e.head = GoalKind::Ret;
        out.push_back(std::move(e));
    }
    return out;
}

Term canonical_answer(const Subst& answer, size_t num_query_vars) {
    std::vector<Term> args;
    args.reserve(num_query_vars);
    for (VarId v = 0; v < num_query_vars; ++v) {
        const Term* t = answer.lookup(v);
        args.push_back(t ? *t : Term::var(v));
    }
    return canonical(Term::comp(
        intern_symbol("ans", static_cast<uint32_t>(num_query_vars)),
        std::move(args)));
}

// Substitutes actual arguments for the formal variables of a condition
// literal (formal variable i stands for argument position i).
Term instantiate(const Term& formal, std::span<const Term> args) {
    switch (formal.kind()) {
        case Term::Kind::Var:
            return args[formal.var_id()];
        case Term::Kind::Int:
            return formal;
        case Term::Kind::Comp: {
            if (formal.ground()) return formal;
            std::vector<Term> out;
            out.reserve(formal.arity());
            for (const Term& a : formal.args())
                out.push_back(instantiate(a, args));
            return Term::comp(formal.sym(), std::move(out));
        }
    }
    return formal;
}

namespace {

struct GoalItem {
    GoalKind kind = GoalKind::Call;
    Term goal = Term::integer(0);
    uint32_t mod = 0;     // Call: introducing module; Ret: callee module
    uint32_t caller = 0;  // Ret only: module of the call site
    std::shared_ptr<const std::vector<uint32_t>> checks;  // RetChk slots
};

struct GoalNode;
using Goals = std::shared_ptr<const GoalNode>;

struct GoalNode {
    GoalItem item;
    Goals next;
    uint32_t depth;
};

Goals cons(GoalItem item, Goals next) {
    uint32_t d = next ? next->depth + 1 : 1;
    return std::make_shared<const GoalNode>(
        GoalNode{std::move(item), std::move(next), d});
}

enum class StepResult : uint8_t { Continue, Fail, Stop, Abort };

const std::shared_ptr<const std::vector<uint32_t>>& no_checks() {
    static const std::shared_ptr<const std::vector<uint32_t>> empty =
        std::make_shared<const std::vector<uint32_t>>();
    return empty;
}

}  // namespace

struct Engine::Run {
    const Engine& eng;
    const FlatProgram& prog;
    Store& store;
    Counters& counters;
    uint64_t* steps_left;  // nullptr = unlimited
    bool checking;         // run-time-checked semantics
    bool sub;              // entailment sub-derivation: quiet and plain

    // main-run wiring
    const SolveOptions* opts = nullptr;
    SolveResult* result = nullptr;
    size_t nqvars = 0;
    bool capture = false;
    bool scripted = false;
    size_t script_pos = 0;

    // sub-run wiring: variables that must stay unbound across an answer
    const std::vector<VarId>* frozen = nullptr;
    bool found = false;

    Goals goals;
    DerivationTrace path;
    std::vector<int32_t> cur_script;

    struct CP {
        Goals goals;
        const Predicate* pred = nullptr;
        std::shared_ptr<const std::vector<uint32_t>> checks;
        Store::Mark mark;
        size_t path_len = 0;
        size_t script_len = 0;
        // candidate cursor: either sequential or an index-bucket merge
        bool indexed = false;
        const std::vector<uint32_t>* bucket = nullptr;
        const std::vector<uint32_t>* var_heads = nullptr;
        uint32_t bi = 0, vi = 0, seq = 0;
        bool any_child = false;

        std::optional<uint32_t> next_candidate() {
            if (!indexed) {
                if (seq < pred->clauses.size()) return seq++;
                return std::nullopt;
            }
            uint32_t b = bucket && bi < bucket->size() ? (*bucket)[bi]
                                                       : UINT32_MAX;
            uint32_t v = var_heads && vi < var_heads->size() ? (*var_heads)[vi]
                                                             : UINT32_MAX;
            if (b == UINT32_MAX && v == UINT32_MAX) return std::nullopt;
            if (b < v) {
                ++bi;
                return b;
            }
            ++vi;
            return v;
        }
    };
    std::vector<CP> cps;

    Run(const Engine& e, Store& s, Counters& c, uint64_t* budget, bool chk,
        bool is_sub)
        : eng(e), prog(e.prog_), store(s), counters(c), steps_left(budget),
          checking(chk), sub(is_sub) {}

    bool streaming() const { return opts && opts->trace_stream; }

    void count_reduction() {
        if (sub)
            ++counters.prop_steps;
        else
            ++counters.reductions;
        if (steps_left) {
            if (*steps_left == 0)
                throw ResourceLimit("step budget exhausted");
            --*steps_left;
        }
    }

    Subst project_query() const {
        Subst s;
        for (VarId v = 0; v < nqvars; ++v)
            s.set(v, store.resolve(Term::var(v)));
        return s;
    }

    void stream_state(const TraceState& st) {
        std::ostream& os = *opts->trace_stream;
        os << static_cast<int>(st.rule) << ' '
           << (goals ? goals->depth : 0) << ' ';
        switch (st.shape) {
            case TraceState::Shape::Empty:
                os << "empty -";
                break;
            case TraceState::Shape::Err:
                os << "err " << prog.conditions[st.err_cond].id;
                break;
            case TraceState::Shape::Goal:
                switch (st.head) {
                    case GoalKind::Call: os << "call "; break;
                    case GoalKind::Ret: os << "ret "; break;
                    case GoalKind::RetChk: os << "retchk "; break;
                }
                os << term_to_string(st.goal, {.qualify = true});
                break;
        }
        os << '\n';
    }

    void snap(uint8_t rule, int32_t ordinal) {
        if (sub || (!capture && !streaming())) return;
        TraceState st;
        if (!goals) {
            st.shape = TraceState::Shape::Empty;
        } else {
            st.shape = TraceState::Shape::Goal;
            st.head = goals->item.kind;
            st.goal = store.resolve(goals->item.goal);
        }
        st.rule = rule;
        st.clause_ordinal = ordinal;
        st.query_store = project_query();
        if (streaming()) stream_state(st);
        if (capture) path.push_back(std::move(st));
    }

    void snap_err(uint32_t cond, uint8_t rule) {
        if (sub || (!capture && !streaming())) return;
        TraceState st;
        st.shape = TraceState::Shape::Err;
        st.err_cond = cond;
        st.rule = rule;
        st.query_store = project_query();
        if (streaming()) stream_state(st);
        if (capture) path.push_back(std::move(st));
    }

    void record_derivation(Outcome outcome, uint32_t err_cond = 0) {
        if (!capture || !result) return;
        Derivation d;
        d.states = path;
        d.outcome = outcome;
        d.script = cur_script;
        d.err_cond = err_cond;
        result->derivations.push_back(std::move(d));
    }

    StepResult rtc_error(uint32_t cond, AssertionCondition::Kind phase,
                         const Term& culprit, uint8_t rule) {
        snap_err(cond, rule);
        record_derivation(Outcome::Error, cond);
        if (result) {
            RtcError e;
            e.cond = cond;
            e.phase = phase;
            e.culprit = store.resolve(culprit);
            e.store_excerpt = project_query();
            result->error = std::move(e);
        }
        return StepResult::Abort;
    }

    void capture_boundary(uint32_t owner, const Term& call) {
        ++counters.boundary_events;
        if (opts && opts->boundary && *opts->boundary) {
            const std::string& name = prog.mod_names[owner];
            for (const Term& a : call.args())
                (*opts->boundary)(name, store.resolve(a));
        }
    }

    // ---- entailment --------------------------------------------------

    bool entails_literal(const Term& lit) {
        SymId root = lit.sym();
        const Symbol& sym = symbol(root);
        if (sym.qualifier == kUserModule) {
            if (sym.name == "term" && sym.arity == 1) return true;
            if (sym.name == "int" && sym.arity == 1)
                return store.walk(lit.args()[0]).is_int();
            if (sym.name == "usr" && sym.arity == 1)
                return usr_only(store.resolve(lit.args()[0]));
        }
        Store::Mark m = store.mark();
        std::vector<VarId> unbound;
        Term goal = store.resolve_collect(lit, unbound);

        Run inner(eng, store, counters, steps_left, /*checking=*/false,
                  /*sub=*/true);
        const Predicate* pred = prog.find_pred(root);
        uint32_t mod = pred ? pred->mod_idx : 0;
        inner.frozen = &unbound;
        inner.goals = cons({GoalKind::Call, std::move(goal), mod, 0, {}}, nullptr);
        inner.drive();
        store.undo_to(m);
        return inner.found;
    }

    bool entails_conj(const std::vector<Term>& conj,
                      std::span<const Term> args) {
        for (const Term& lit : conj)
            if (!entails_literal(instantiate(lit, args))) return false;
        return true;
    }

    bool entails_disjunction(const std::vector<std::vector<Term>>& disj,
                             std::span<const Term> args) {
        for (const auto& conj : disj)
            if (entails_conj(conj, args)) return true;
        return false;
    }

    // ---- builtins -----------------------------------------------------

    bool eval_builtin(const Term& goal) {
        const Symbol& sym = symbol(goal.sym());
        auto int_arg = [&](const Term& t) -> int64_t {
            Term w = store.walk(t);
            if (!w.is_int())
                throw EvalError("arguments of " + sym.name +
                                    " must be bound to integers",
                                store.resolve(goal));
            return w.int_value();
        };
        if (sym.name == "=") return store.unify(goal.args()[0], goal.args()[1]);
        if (sym.name == "int") return store.walk(goal.args()[0]).is_int();
        if (sym.name == "term") return true;
        if (sym.name == "usr") return usr_only(store.resolve(goal.args()[0]));
        int64_t a = int_arg(goal.args()[0]);
        int64_t b = int_arg(goal.args()[1]);
        if (sym.name == "<") return a < b;
        if (sym.name == ">") return a > b;
        if (sym.name == "=<") return a <= b;
        if (sym.name == ">=") return a >= b;
        if (sym.name == "=:=") return a == b;
        throw EvalError("unknown builtin " + sym.name, goal);
    }

    // ---- the reduction loop -------------------------------------------

    void drive() {
        snap(0, -1);
        while (true) {
            if (!goals) {
                if (on_success()) return;
                if (!backtrack()) return;
                continue;
            }
            StepResult r = step();
            if (r == StepResult::Continue) continue;
            if (r == StepResult::Fail) {
                // a scripted run follows a single derivation to its leaf
                if (scripted) return;
                if (!backtrack()) return;
                continue;
            }
            return;  // Stop or Abort
        }
    }

    bool on_success() {
        if (sub) {
            bool ok = true;
            for (VarId v : *frozen) {
                Term w = store.walk(Term::var(v));
                if (!w.is_var() || w.var_id() != v) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                found = true;
                return true;
            }
            return false;  // answer binds a frozen variable: keep searching
        }
        result->answers.push_back(project_query());
        record_derivation(Outcome::Success);
        if (scripted) return true;
        return result->answers.size() >= opts->max_answers;
    }

    StepResult step() {
        const GoalItem& item = goals->item;
        if (item.kind != GoalKind::Call) return step_return(item);

        SymId root = item.goal.sym();
        if (is_builtin(root)) {
            if (!eval_builtin(item.goal)) {
                record_derivation(Outcome::Failure);
                return StepResult::Fail;
            }
            count_reduction();
            goals = goals->next;
            snap(1, -1);
            return StepResult::Continue;
        }

        const Predicate* pred = prog.find_pred(root);
        if (!pred) {
            if (sub)
                throw EvalError("undefined property " + symbol(root).name,
                                item.goal);
            throw LoadError(LoadErrorKind::VisibilityViolation,
                            "predicate " + symbol(root).name + "/" +
                                std::to_string(item.goal.arity()) +
                                " is not defined");
        }
        if (!sub && item.mod == 0 && !visible(prog, root, item.mod))
            throw LoadError(LoadErrorKind::VisibilityViolation,
                            "predicate " + symbol(root).name + "/" +
                                std::to_string(item.goal.arity()) +
                                " is not visible from the query");
        if (pred->clauses.empty()) {
            record_derivation(Outcome::Failure);
            return StepResult::Fail;
        }

        auto checks = no_checks();
        if (checking && !pred->conditions.empty()) {
            std::vector<uint32_t> active = eng.active_conditions(*pred, item.mod);
            if (!active.empty()) {
                auto args = item.goal.args();
                std::vector<uint32_t> retchk;
                for (uint32_t slot : active) {
                    const AssertionCondition& c = prog.conditions[slot];
                    ++counters.conditions;
                    if (c.kind == AssertionCondition::Kind::Calls) {
                        if (!entails_disjunction(c.pre, args))
                            return rtc_error(slot, AssertionCondition::Kind::Calls,
                                             item.goal, 2);
                    } else {
                        if (entails_conj(c.pre[0], args)) retchk.push_back(slot);
                    }
                }
                if (!retchk.empty())
                    checks = std::make_shared<const std::vector<uint32_t>>(
                        std::move(retchk));
            }
        }

        if (!sub && item.mod != pred->mod_idx) capture_boundary(item.mod, item.goal);

        CP cp;
        cp.goals = goals;
        cp.pred = pred;
        cp.checks = std::move(checks);
        cp.mark = store.mark();
        cp.path_len = path.size();
        cp.script_len = cur_script.size();
        if (pred->index.usable) {
            Term first = store.walk(item.goal.args()[0]);
            if (!first.is_var()) {
                cp.indexed = true;
                std::pair<int64_t, int64_t> key =
                    first.is_int()
                        ? std::pair<int64_t, int64_t>{1, first.int_value()}
                        : std::pair<int64_t, int64_t>{
                              0, static_cast<int64_t>(first.sym())};
                auto it = pred->index.buckets.find(key);
                cp.bucket = it == pred->index.buckets.end() ? nullptr
                                                            : &it->second;
                cp.var_heads = &pred->index.var_heads;
            }
        }
        cps.push_back(std::move(cp));
        return advance();
    }

    StepResult step_return(const GoalItem& item) {
        if (item.kind == GoalKind::RetChk && item.checks) {
            for (uint32_t slot : *item.checks) {
                const AssertionCondition& c = prog.conditions[slot];
                ++counters.conditions;
                if (!entails_conj(c.post, item.goal.args()))
                    return rtc_error(slot, AssertionCondition::Kind::Success,
                                     item.goal, 3);
            }
        }
        if (!sub && item.caller != item.mod)
            capture_boundary(item.mod, item.goal);
        count_reduction();
        goals = goals->next;
        snap(3, -1);
        return StepResult::Continue;
    }

    // Tries remaining candidates of the newest choice point. Pops it when
    // exhausted; a call state none of whose clauses applied is a failure
    // leaf of the derivation tree.
    StepResult advance() {
        CP& cp = cps.back();
        const GoalItem& call = cp.goals->item;
        while (true) {
            int32_t ordinal;
            if (scripted) {
                if (script_pos >= opts->script->size()) {
                    record_derivation(Outcome::Failure);
                    result->replay = ReplayStatus::ScriptExhausted;
                    cps.pop_back();
                    return StepResult::Stop;
                }
                ordinal = (*opts->script)[script_pos++];
                if (ordinal < 0 ||
                    static_cast<size_t>(ordinal) >= cp.pred->clauses.size()) {
                    result->replay = ReplayStatus::Mismatch;
                    cps.pop_back();
                    return StepResult::Stop;
                }
            } else {
                std::optional<uint32_t> next = cp.next_candidate();
                if (!next) {
                    bool leaf = !cp.any_child;
                    cps.pop_back();
                    if (leaf) record_derivation(Outcome::Failure);
                    return StepResult::Fail;
                }
                ordinal = static_cast<int32_t>(*next);
            }

            VarId base = static_cast<VarId>(store.num_vars());
            VarId counter = base;
            Clause renamed = rename_apart(cp.pred->clauses[ordinal], counter);
            store.reserve_vars(counter);
            if (!store.unify(renamed.head, call.goal)) {
                store.undo_to(cp.mark);
                if (scripted) {
                    result->replay = ReplayStatus::Mismatch;
                    cps.pop_back();
                    return StepResult::Stop;
                }
                continue;
            }

            cp.any_child = true;
            count_reduction();
            if (capture) cur_script.push_back(ordinal);

            GoalItem ret;
            ret.kind = checking ? GoalKind::RetChk : GoalKind::Ret;
            ret.goal = call.goal;
            ret.mod = cp.pred->mod_idx;
            ret.caller = call.mod;
            ret.checks = cp.checks;
            Goals g = cons(std::move(ret), cp.goals->next);
            for (auto it = renamed.body.rbegin(); it != renamed.body.rend(); ++it)
                g = cons({GoalKind::Call, *it, cp.pred->mod_idx, 0, {}}, g);
            goals = std::move(g);
            snap(2, ordinal);
            return StepResult::Continue;
        }
    }

    bool backtrack() {
        while (!cps.empty()) {
            CP& cp = cps.back();
            store.undo_to(cp.mark);
            goals = cp.goals;
            if (capture) {
                path.resize(cp.path_len);
                cur_script.resize(cp.script_len);
            }
            StepResult r = advance();
            if (r == StepResult::Continue) return true;
            if (r == StepResult::Stop || r == StepResult::Abort) return false;
            // Fail: cp was popped, keep unwinding
        }
        return false;
    }
};

Engine::Engine(const FlatProgram& program, CheckConfig cfg)
    : prog_(program), cfg_(std::move(cfg)) {}

std::vector<uint32_t> Engine::active_conditions(const Predicate& pred,
                                                uint32_t caller_idx) const {
    std::vector<uint32_t> out;
    bool boundary = caller_idx != pred.mod_idx;
    switch (cfg_.mode) {
        case Mode::Unsafe:
            return out;
        case Mode::ClientSafe:
            if (!pred.exported || !boundary) return out;
            return pred.conditions;
        case Mode::SafeRt:
            return pred.conditions;
        case Mode::SafeCtRt:
            if (boundary) return pred.conditions;
            for (uint32_t slot : pred.conditions)
                if (!cfg_.discharged.contains(slot)) out.push_back(slot);
            return out;
    }
    return out;
}

bool Engine::check_trivially(const std::vector<Term>& literals, Store& store,
                             Counters& counters) const {
    Run run(*this, store, counters, nullptr, /*checking=*/false, /*sub=*/true);
    for (const Term& lit : literals)
        if (!run.entails_literal(lit)) return false;
    return true;
}

SolveResult Engine::solve(const Query& q, const SolveOptions& opts) {
    SolveResult result;
    Store store;
    store.reserve_vars(q.var_names.size());

    uint64_t budget = opts.max_steps;
    Run run(*this, store, result.counters, opts.max_steps ? &budget : nullptr,
            cfg_.mode != Mode::Unsafe, /*sub=*/false);
    run.opts = &opts;
    run.result = &result;
    run.nqvars = q.var_names.size();
    run.capture = opts.capture || opts.script != nullptr;
    run.scripted = opts.script != nullptr;

    Goals g;
    for (auto it = q.goals.rbegin(); it != q.goals.rend(); ++it)
        g = cons({GoalKind::Call, *it, 0, 0, {}}, g);
    run.goals = std::move(g);

    run.drive();
    if (run.scripted && result.replay == ReplayStatus::None)
        result.replay = ReplayStatus::Complete;
    return result;
}

}  // namespace modlog
