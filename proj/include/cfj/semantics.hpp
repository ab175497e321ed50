#pragma once

#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfj/ast.hpp"
#include "cfj/lookup.hpp"
#include "cfj/relations.hpp"
#include "cfj/render.hpp"

namespace cfj {

enum class Rule {
    RField, RInvk, RInvkB, RInvkP, RInvkSP,
    RCWith, RCSwap, RCWithArg, RCSwapArg, RWithVal, RSwapVal,
    RCField, RCInvkArg, RCInvkRecv, RCNew, RCInvkAArg1, RCInvkAArg2
};

inline constexpr Rule all_rules[] = {
    Rule::RField, Rule::RInvk, Rule::RInvkB, Rule::RInvkP, Rule::RInvkSP,
    Rule::RCWith, Rule::RCSwap, Rule::RCWithArg, Rule::RCSwapArg, Rule::RWithVal, Rule::RSwapVal,
    Rule::RCField, Rule::RCInvkArg, Rule::RCInvkRecv, Rule::RCNew, Rule::RCInvkAArg1, Rule::RCInvkAArg2,
};

inline const char* rule_name(Rule r) {
    switch (r) {
        case Rule::RField: return "R-Field";
        case Rule::RInvk: return "R-Invk";
        case Rule::RInvkB: return "R-InvkB";
        case Rule::RInvkP: return "R-InvkP";
        case Rule::RInvkSP: return "R-InvkSP";
        case Rule::RCWith: return "RC-With";
        case Rule::RCSwap: return "RC-Swap";
        case Rule::RCWithArg: return "RC-WithArg";
        case Rule::RCSwapArg: return "RC-SwapArg";
        case Rule::RWithVal: return "R-WithVal";
        case Rule::RSwapVal: return "R-SwapVal";
        case Rule::RCField: return "RC-Field";
        case Rule::RCInvkArg: return "RC-InvkArg";
        case Rule::RCInvkRecv: return "RC-InvkRecv";
        case Rule::RCNew: return "RC-New";
        case Rule::RCInvkAArg1: return "RC-InvkAArg1";
        case Rule::RCInvkAArg2: return "RC-InvkAArg2";
    }
    return "?";
}

class NotSwappable : public std::runtime_error {
public:
    explicit NotSwappable(LayerName l) : std::runtime_error("layer '" + l.str() + "' is not swappable"), layer(l) {}
    LayerName layer;
};

// ---------------------------------------------------------------------------
// Context manipulation

/// Removes `l` if present, then appends it.
inline LayerSeq with_fn(LayerName l, const LayerSeq& seq) {
    std::vector<LayerName> out;
    for (LayerName x : seq.items())
        if (x != l) out.push_back(x);
    out.push_back(l);
    return LayerSeq(std::move(out));
}

namespace detail {
inline LayerSeq swap_unchecked(const Tables& t, LayerName l, LayerName lsw, const LayerSeq& seq) {
    std::vector<LayerName> out;
    for (LayerName x : seq.items())
        if (!weak_sub(t, x, lsw) && x != l) out.push_back(x);
    out.push_back(l);
    return LayerSeq(std::move(out));
}
}  // namespace detail

/// Removes every weak sublayer of `lsw`, then appends `l`.
inline LayerSeq swap_fn(const Tables& t, LayerName l, LayerName lsw, const LayerSeq& seq) {
    if (!is_swappable(t, lsw)) throw NotSwappable(lsw);
    return detail::swap_unchecked(t, l, lsw, seq);
}

// ---------------------------------------------------------------------------
// Method entry

/// Substitution targets for a method body. Absent cursors leave the
/// corresponding form untouched.
struct CursorBindings {
    std::optional<TripleCursor> proceed;
    std::optional<TripleCursor> super;
    std::optional<QuadCursor> superproceed;
};

namespace detail {

struct Subst {
    const Expr& receiver;
    std::map<VarName, Expr> vars;
    MethodName method;
    const CursorBindings& b;

    ExprList list(const ExprList& es) const {
        ExprList out;
        out.reserve(es.size());
        for (const auto& e : es) out.push_back(apply(e));
        return out;
    }

    Expr apply(const Expr& e) const {
        return std::visit(
            [&](const auto& n) -> Expr {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, Var>) {
                    auto it = vars.find(n.name);
                    return it == vars.end() ? e : it->second;
                } else if constexpr (std::is_same_v<T, FieldGet>) {
                    return make_expr(FieldGet{apply(n.target), n.field}, e->span);
                } else if constexpr (std::is_same_v<T, Invoke>) {
                    return make_expr(Invoke{apply(n.receiver), n.method, list(n.args)}, e->span);
                } else if constexpr (std::is_same_v<T, NewClass>) {
                    if (n.args.empty()) return e;
                    return make_expr(NewClass{n.cls, list(n.args)}, e->span);
                } else if constexpr (std::is_same_v<T, NewLayer>) {
                    return e;
                } else if constexpr (std::is_same_v<T, With>) {
                    return make_expr(With{apply(n.layer), apply(n.body)}, e->span);
                } else if constexpr (std::is_same_v<T, Swap>) {
                    return make_expr(Swap{apply(n.layer), n.swappable, apply(n.body)}, e->span);
                } else if constexpr (std::is_same_v<T, Proceed>) {
                    if (!b.proceed) return make_expr(Proceed{list(n.args)}, e->span);
                    return make_expr(make_annotated(receiver, *b.proceed, method, list(n.args)), e->span);
                } else if constexpr (std::is_same_v<T, SuperCall>) {
                    if (!b.super) return make_expr(SuperCall{n.method, list(n.args)}, e->span);
                    return make_expr(make_annotated(receiver, *b.super, n.method, list(n.args)), e->span);
                } else if constexpr (std::is_same_v<T, SuperProceed>) {
                    if (!b.superproceed) return make_expr(SuperProceed{list(n.args)}, e->span);
                    return make_expr(make_annotated(receiver, *b.superproceed, method, list(n.args)), e->span);
                } else {
                    return make_expr(AnnotatedInvoke{apply(n.receiver), n.cursor, n.method, list(n.args)}, e->span);
                }
            },
            e->node);
    }
};

}  // namespace detail

/// Replaces `this`, the parameters, and proceed/super/superproceed in a
/// method body. `method` is the name invoked (used by proceed and
/// superproceed).
inline Expr method_entry_subst(const Expr& body, const Expr& receiver, const ExprList& args,
                               const std::vector<VarName>& params, MethodName method,
                               const CursorBindings& bindings) {
    if (args.size() != params.size()) throw std::invalid_argument("arity mismatch on method entry");
    detail::Subst s{receiver, {}, method, bindings};
    s.vars.emplace(this_var(), receiver);
    for (std::size_t i = 0; i < params.size(); ++i) s.vars.emplace(params[i], args[i]);
    return s.apply(body);
}

// ---------------------------------------------------------------------------
// Single step

struct ActivationEvent {
    enum class Kind { With, Swap };
    Kind kind = Kind::With;
    LayerName layer;
    LayerName swappable;  // Swap only
    friend bool operator==(const ActivationEvent&, const ActivationEvent&) = default;
};

/// Activation events replayed from the empty set; derives well-formedness of
/// the resulting set.
using WfWitness = std::vector<ActivationEvent>;

/// A method dispatch performed by R-InvkB, R-InvkP or R-InvkSP, with the site found.
struct DispatchRecord {
    Rule rule = Rule::RInvkB;
    ClassName cls;
    MethodName method;
    Cursor cursor;
    ClassName found_class;
    std::optional<LayerName> found_layer;     // last layer of the found prefix
    std::optional<LayerName> defining_layer;  // layer whose declaration was used
};

struct StepOutcome {
    enum class Kind { Stepped, AlreadyValue, Stuck };
    Kind kind = Kind::Stuck;
    Expr expr;                    // Stepped: the new expression
    std::vector<Rule> derivation; // outermost congruence first, redex rule last
    LayerSeq active;              // sequence in effect at the redex
    WfWitness descents;           // with/swap events passed on the way to the redex
    std::string stuck_reason;
    std::optional<DispatchRecord> dispatch;

    [[nodiscard]] bool stepped() const { return kind == Kind::Stepped; }
    [[nodiscard]] bool stuck() const { return kind == Kind::Stuck; }
    [[nodiscard]] Rule rule() const { return derivation.back(); }
};

namespace detail {

class Stepper {
public:
    explicit Stepper(LookupCache& cache) : c_(cache), t_(cache.tables()) {}

    StepOutcome run(const LayerSeq& seq, const Expr& e) {
        StepOutcome out;
        if (is_value(e)) {
            out.kind = StepOutcome::Kind::AlreadyValue;
            out.active = seq;
            return out;
        }
        out.expr = go(seq, e, out);
        if (out.kind == StepOutcome::Kind::Stuck) out.expr = nullptr;
        return out;
    }

private:
    Expr stuck(StepOutcome& out, const LayerSeq& seq, std::string reason) {
        out.kind = StepOutcome::Kind::Stuck;
        out.active = seq;
        out.stuck_reason = std::move(reason);
        return nullptr;
    }
    Expr fire(StepOutcome& out, const LayerSeq& seq, Rule r, Expr result) {
        out.kind = StepOutcome::Kind::Stepped;
        out.active = seq;
        out.derivation.push_back(r);
        return result;
    }

    /// Steps the leftmost non-value of `args`; returns nullopt if all are values.
    std::optional<ExprList> step_args(const LayerSeq& seq, const ExprList& args, StepOutcome& out, Rule r) {
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (is_value(args[i])) continue;
            out.derivation.push_back(r);
            Expr next = go(seq, args[i], out);
            if (!next) return ExprList{};
            ExprList copy = args;
            copy[i] = next;
            return copy;
        }
        return std::nullopt;
    }

    Expr go(const LayerSeq& seq, const Expr& e, StepOutcome& out) {
        return std::visit([&](const auto& n) -> Expr { return on(seq, e, n, out); }, e->node);
    }

    Expr on(const LayerSeq& seq, const Expr&, const Var& n, StepOutcome& out) {
        return stuck(out, seq, "free variable '" + n.name.str() + "'");
    }

    Expr on(const LayerSeq& seq, const Expr& e, const FieldGet& n, StepOutcome& out) {
        if (!is_value(n.target)) {
            out.derivation.push_back(Rule::RCField);
            Expr next = go(seq, n.target, out);
            return next ? make_expr(FieldGet{next, n.field}, e->span) : nullptr;
        }
        const auto* obj = as<NewClass>(n.target);
        if (!obj) return stuck(out, seq, "field access '" + n.field.str() + "' on a layer instance");
        if (obj->cls != object_class() && !t_.find_class(obj->cls))
            return stuck(out, seq, "unknown class '" + obj->cls.str() + "'");
        const auto fs = fields(t_, obj->cls);
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (fs[i].name != n.field) continue;
            if (i >= obj->args.size())
                return stuck(out, seq, "field '" + n.field.str() + "' missing from constructor arguments");
            return fire(out, seq, Rule::RField, obj->args[i]);
        }
        return stuck(out, seq, "class '" + obj->cls.str() + "' has no field '" + n.field.str() + "'");
    }

    Expr on(const LayerSeq& seq, const Expr& e, const Invoke& n, StepOutcome& out) {
        if (!is_value(n.receiver)) {
            out.derivation.push_back(Rule::RCInvkRecv);
            Expr next = go(seq, n.receiver, out);
            return next ? make_expr(Invoke{next, n.method, n.args}, e->span) : nullptr;
        }
        if (auto args = step_args(seq, n.args, out, Rule::RCInvkArg)) {
            if (args->empty()) return nullptr;
            return make_expr(Invoke{n.receiver, n.method, std::move(*args)}, e->span);
        }
        const auto* obj = as<NewClass>(n.receiver);
        if (!obj) return stuck(out, seq, "method '" + n.method.str() + "' invoked on a layer instance");
        return fire(out, seq, Rule::RInvk,
                    make_expr(make_annotated(n.receiver, make_triple(obj->cls, seq, seq), n.method, n.args),
                              e->span));
    }

    Expr on(const LayerSeq& seq, const Expr& e, const NewClass& n, StepOutcome& out) {
        auto args = step_args(seq, n.args, out, Rule::RCNew);
        if (!args || args->empty()) return nullptr;
        return make_expr(NewClass{n.cls, std::move(*args)}, e->span);
    }

    Expr on(const LayerSeq& seq, const Expr&, const NewLayer&, StepOutcome& out) {
        return stuck(out, seq, "value reached as a redex");
    }

    Expr on(const LayerSeq& seq, const Expr& e, const With& n, StepOutcome& out) {
        if (!is_value(n.layer)) {
            out.derivation.push_back(Rule::RCWithArg);
            Expr next = go(seq, n.layer, out);
            return next ? make_expr(With{next, n.body}, e->span) : nullptr;
        }
        const auto* l = as<NewLayer>(n.layer);
        if (!l) return stuck(out, seq, "with applied to a non-layer value");
        if (is_value(n.body)) return fire(out, seq, Rule::RWithVal, n.body);
        out.derivation.push_back(Rule::RCWith);
        out.descents.push_back({ActivationEvent::Kind::With, l->layer, {}});
        Expr next = go(with_fn(l->layer, seq), n.body, out);
        return next ? make_expr(With{n.layer, next}, e->span) : nullptr;
    }

    Expr on(const LayerSeq& seq, const Expr& e, const Swap& n, StepOutcome& out) {
        if (!is_value(n.layer)) {
            out.derivation.push_back(Rule::RCSwapArg);
            Expr next = go(seq, n.layer, out);
            return next ? make_expr(Swap{next, n.swappable, n.body}, e->span) : nullptr;
        }
        const auto* l = as<NewLayer>(n.layer);
        if (!l) return stuck(out, seq, "swap applied to a non-layer value");
        if (is_value(n.body)) return fire(out, seq, Rule::RSwapVal, n.body);
        out.derivation.push_back(Rule::RCSwap);
        out.descents.push_back({ActivationEvent::Kind::Swap, l->layer, n.swappable});
        // The reduction rule does not itself check that the layer is swappable.
        Expr next = go(swap_unchecked(t_, l->layer, n.swappable, seq), n.body, out);
        return next ? make_expr(Swap{n.layer, n.swappable, next}, e->span) : nullptr;
    }

    Expr on(const LayerSeq& seq, const Expr&, const Proceed&, StepOutcome& out) {
        return stuck(out, seq, "proceed outside a method body");
    }
    Expr on(const LayerSeq& seq, const Expr&, const SuperCall&, StepOutcome& out) {
        return stuck(out, seq, "super outside a method body");
    }
    Expr on(const LayerSeq& seq, const Expr&, const SuperProceed&, StepOutcome& out) {
        return stuck(out, seq, "superproceed outside a method body");
    }

    Expr on(const LayerSeq& seq, const Expr& e, const AnnotatedInvoke& n, StepOutcome& out) {
        const bool quad = std::holds_alternative<QuadCursor>(n.cursor);
        if (auto args = step_args(seq, n.args, out, quad ? Rule::RCInvkAArg2 : Rule::RCInvkAArg1)) {
            if (args->empty()) return nullptr;
            return make_expr(AnnotatedInvoke{n.receiver, n.cursor, n.method, std::move(*args)}, e->span);
        }
        return quad ? enter_superproceed(seq, e, n, std::get<QuadCursor>(n.cursor), out)
                    : enter(seq, e, n, std::get<TripleCursor>(n.cursor), out);
    }

    std::optional<ClassName> super_of(ClassName c) const { return t_.superclass(c); }

    Expr enter(const LayerSeq& seq, const Expr&, const AnnotatedInvoke& n, const TripleCursor& k,
               StepOutcome& out) {
        const auto& mb = c_.mbody(n.method, k.target, k.prefix, k.full);
        if (!mb)
            return stuck(out, seq,
                         "mbody(" + n.method.str() + ", " + k.target.str() + ", " + render(k.prefix) + ", " +
                             render(k.full) + ") is undefined");
        if (mb->params.size() != n.args.size()) return stuck(out, seq, "arity mismatch calling " + n.method.str());
        const auto sup = super_of(mb->found_class);
        if (!sup) return stuck(out, seq, "no superclass for '" + mb->found_class.str() + "'");

        DispatchRecord rec{Rule::RInvkB, k.target, n.method, k, mb->found_class, std::nullopt, mb->defining_layer};
        CursorBindings b;
        b.super = make_triple(*sup, k.full, k.full);
        Rule rule = Rule::RInvkB;
        if (!mb->found_prefix.empty()) {
            rule = Rule::RInvkP;
            rec.rule = rule;
            rec.found_layer = mb->found_prefix.back();
#ifdef CFJ_TEST_MUTATION
            // Deliberately broken proceed cursor, for the harness smoke test.
            b.proceed = make_triple(mb->found_class, LayerSeq{}, k.full);
#else
            b.proceed = make_triple(mb->found_class, mb->found_prefix.init(), k.full);
#endif
            const auto above = t_.superlayer(*mb->defining_layer);
            b.superproceed = make_quad(mb->found_class, above.value_or(base_layer()), mb->found_prefix, k.full);
        }
        out.dispatch = rec;
        return fire(out, seq, rule, method_entry_subst(mb->body, n.receiver, n.args, mb->params, n.method, b));
    }

    Expr enter_superproceed(const LayerSeq& seq, const Expr&, const AnnotatedInvoke& n, const QuadCursor& k,
                            StepOutcome& out) {
        const auto pb = pmbody(t_, n.method, k.target, k.layer);
        if (!pb)
            return stuck(out, seq,
                         "pmbody(" + n.method.str() + ", " + k.target.str() + ", " + k.layer.str() + ") is undefined");
        if (pb->params.size() != n.args.size()) return stuck(out, seq, "arity mismatch calling " + n.method.str());
        if (k.prefix.empty()) return stuck(out, seq, "superproceed cursor with an empty prefix");
        const auto sup = super_of(k.target);
        if (!sup) return stuck(out, seq, "no superclass for '" + k.target.str() + "'");
        CursorBindings b;
        b.proceed = make_triple(k.target, k.prefix.init(), k.full);
        b.super = make_triple(*sup, k.full, k.full);
        b.superproceed = make_quad(k.target, t_.superlayer(pb->found_layer).value_or(base_layer()), k.prefix, k.full);
        out.dispatch = DispatchRecord{Rule::RInvkSP, k.target, n.method, k, k.target, pb->found_layer, pb->found_layer};
        return fire(out, seq, Rule::RInvkSP,
                    method_entry_subst(pb->body, n.receiver, n.args, pb->params, n.method, b));
    }

    LookupCache& c_;
    const Tables& t_;
};

}  // namespace detail

inline StepOutcome step(LookupCache& cache, const LayerSeq& seq, const Expr& e) {
    return detail::Stepper(cache).run(seq, e);
}

inline StepOutcome step(const Tables& t, const LayerSeq& seq, const Expr& e) {
    LookupCache cache(t);
    return step(cache, seq, e);
}

// ---------------------------------------------------------------------------
// Multi-step evaluation

/// Well-formedness witnesses for every sequence the evaluator has activated.
class ActivationLedger {
public:
    /// Records the prefixes of a descent path starting from `base`.
    void record(const Tables& t, const LayerSeq& base, const WfWitness& base_witness, const WfWitness& path) {
        LayerSeq seq = base;
        WfWitness w = base_witness;
        entries_.emplace(seq, w);
        for (const auto& ev : path) {
            seq = ev.kind == ActivationEvent::Kind::With ? with_fn(ev.layer, seq)
                                                         : detail::swap_unchecked(t, ev.layer, ev.swappable, seq);
            w.push_back(ev);
            entries_.emplace(seq, w);
        }
    }

    [[nodiscard]] const WfWitness* find(const LayerSeq& seq) const {
        auto it = entries_.find(seq);
        return it == entries_.end() ? nullptr : &it->second;
    }
    [[nodiscard]] const std::map<LayerSeq, WfWitness>& entries() const { return entries_; }

private:
    std::map<LayerSeq, WfWitness> entries_;
};

struct TraceEntry {
    std::size_t index = 0;
    LayerSeq active;
    std::vector<Rule> derivation;
    Expr expr_after;
    std::optional<DispatchRecord> dispatch;

    [[nodiscard]] Rule rule() const { return derivation.back(); }
};

struct Trace {
    std::vector<TraceEntry> entries;
    ActivationLedger ledger;
};

inline std::string format_entry(const TraceEntry& e) {
    return "#" + std::to_string(e.index) + " " + render_active(e.active) + " " + rule_name(e.rule()) + " " +
           render(e.expr_after);
}

inline void write_trace(std::ostream& os, const Trace& tr) {
    for (const auto& e : tr.entries) os << format_entry(e) << '\n';
}

struct EvalResult {
    enum class Kind { Value, Stuck, OutOfFuel };
    Kind kind = Kind::Value;
    Expr final_expr;
    std::size_t steps = 0;
    std::string stuck_reason;
    LayerSeq stuck_active;
    Trace trace;

    [[nodiscard]] std::optional<Value> value() const {
        if (kind != Kind::Value) return std::nullopt;
        return to_value(final_expr);
    }
};

inline constexpr std::size_t default_max_steps = 10000;

/// Fuel default, overridable through CFJ_MAX_STEPS.
inline std::size_t env_max_steps() {
    if (const char* s = std::getenv("CFJ_MAX_STEPS")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return default_max_steps;
}

/// Runs `e` from the empty sequence. `observer(entry, before, ledger)` is
/// called after each successful step.
template <class Observer>
EvalResult eval(const Tables& t, const Expr& e, std::size_t max_steps, Observer&& observer) {
    LookupCache cache(t);
    EvalResult r;
    r.trace.ledger.record(t, {}, {}, {});
    Expr cur = e;
    while (true) {
        if (is_value(cur)) {
            r.kind = EvalResult::Kind::Value;
            break;
        }
        if (r.steps >= max_steps) {
            r.kind = EvalResult::Kind::OutOfFuel;
            break;
        }
        StepOutcome o = step(cache, {}, cur);
        r.trace.ledger.record(t, {}, {}, o.descents);
        if (o.stuck()) {
            r.kind = EvalResult::Kind::Stuck;
            r.stuck_reason = o.stuck_reason;
            r.stuck_active = o.active;
            break;
        }
        ++r.steps;
        r.trace.entries.push_back({r.steps, o.active, o.derivation, o.expr, o.dispatch});
        observer(r.trace.entries.back(), cur, r.trace.ledger);
        cur = o.expr;
    }
    r.final_expr = cur;
    return r;
}

inline EvalResult eval(const Tables& t, const Expr& e, std::size_t max_steps = default_max_steps) {
    return eval(t, e, max_steps, [](const TraceEntry&, const Expr&, const ActivationLedger&) {});
}

}  // namespace cfj
