#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "cfj/ast.hpp"
#include "cfj/lookup.hpp"
#include "cfj/relations.hpp"
#include "cfj/render.hpp"
#include "cfj/semantics.hpp"

namespace cfj {

/// A failed typing premise. `rule` is the rule whose premise failed, e.g.
/// "T-Invk"; `premise` narrows it down where a rule has several.
class TypeError : public std::runtime_error {
public:
    TypeError(std::string rule, std::string premise, Location loc, SourceSpan span, const std::string& message,
              std::vector<std::string> related = {})
        : std::runtime_error(message),
          rule(std::move(rule)),
          premise(std::move(premise)),
          loc(std::move(loc)),
          span(span),
          related(std::move(related)) {}

    std::string rule;
    std::string premise;
    Location loc;
    SourceSpan span;
    std::vector<std::string> related;
};

struct CheckResult {
    std::vector<TypeError> errors;
    std::optional<Type> type;

    [[nodiscard]] bool ok() const { return errors.empty(); }
    [[nodiscard]] bool cites(const std::string& rule, const std::string& premise = {}) const {
        for (const auto& e : errors)
            if (e.rule == rule && (premise.empty() || e.premise == premise)) return true;
        return false;
    }
};

// ---------------------------------------------------------------------------
// Syntactic helpers

/// True if a `proceed` occurs anywhere in `e`.
inline bool contains_proceed(const Expr& e) {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            auto any = [](const ExprList& es) {
                for (const auto& a : es)
                    if (contains_proceed(a)) return true;
                return false;
            };
            if constexpr (std::is_same_v<T, Proceed>) return true;
            else if constexpr (std::is_same_v<T, FieldGet>) return contains_proceed(n.target);
            else if constexpr (std::is_same_v<T, Invoke>) return contains_proceed(n.receiver) || any(n.args);
            else if constexpr (std::is_same_v<T, NewClass>) return any(n.args);
            else if constexpr (std::is_same_v<T, With> || std::is_same_v<T, Swap>)
                return contains_proceed(n.layer) || contains_proceed(n.body);
            else if constexpr (std::is_same_v<T, SuperCall> || std::is_same_v<T, SuperProceed>) return any(n.args);
            else if constexpr (std::is_same_v<T, AnnotatedInvoke>) return contains_proceed(n.receiver) || any(n.args);
            else return false;
        },
        e->node);
}

/// Non-dangling proceed: some chain of proceed calls from this position ends
/// in a body without proceed.
inline bool ndp(const Tables& t, MethodName m, ClassName c, const LayerSeq& seq1, const LayerSeq& seq2) {
    const LayerSeq* cur = &seq1;
    for (ClassName k : t.class_chain(c)) {
        const auto* cd = t.find_class(k);
        if (!cd) return false;
        if (cd->find_method(m)) return true;
        for (LayerName l : cur->items())
            if (auto pb = pmbody(t, m, k, l); pb && !contains_proceed(pb->body)) return true;
        cur = &seq2;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Layer set well-formedness

/// Replays activation events through Wf-With / Wf-Swap starting from the
/// empty set. Returns the derived set, or nullopt if a premise fails.
inline std::optional<LayerSet> replay_witness(const Tables& t, const WfWitness& w) {
    LayerSet lam;
    for (const auto& ev : w) {
        const LayerSet req = t.requires_of(ev.layer);
        if (ev.kind == ActivationEvent::Kind::With) {
            if (!set_weak_sub(t, lam, req)) return std::nullopt;
            lam.insert(ev.layer);
        } else {
            if (!is_swappable(t, ev.swappable) || !weak_sub(t, ev.layer, ev.swappable)) return std::nullopt;
            LayerSet rm;
            for (LayerName l : lam)
                if (!weak_sub(t, l, ev.swappable)) rm.insert(l);
            if (!set_weak_sub(t, rm, req)) return std::nullopt;
            rm.insert(ev.layer);
            lam = std::move(rm);
        }
    }
    return lam;
}

/// Decides `lam WF` by computing every set reachable from the empty set
/// through Wf-With / Wf-Swap steps over the layer table (plus Base).
class WfDecider {
public:
    static constexpr std::size_t max_exact_layers = 20;

    explicit WfDecider(const Tables& t) : t_(t) {
        universe_.push_back(base_layer());
        for (const auto& l : t.layers()) universe_.push_back(l.name);
    }

    bool operator()(const LayerSet& lam) {
        std::uint32_t mask = 0;
        for (LayerName l : lam) {
            auto idx = index_of(l);
            if (!idx) return false;
            mask |= 1u << *idx;
        }
        if (universe_.size() > max_exact_layers) return backward(lam);
        if (!reachable_) saturate();
        return reachable_->count(mask) > 0;
    }

private:
    std::optional<std::size_t> index_of(LayerName l) const {
        for (std::size_t i = 0; i < universe_.size(); ++i)
            if (universe_[i] == l) return i;
        return std::nullopt;
    }

    LayerSet to_set(std::uint32_t mask) const {
        LayerSet out;
        for (std::size_t i = 0; i < universe_.size(); ++i)
            if (mask & (1u << i)) out.insert(universe_[i]);
        return out;
    }

    void saturate() {
        reachable_.emplace();
        std::vector<std::uint32_t> work{0};
        reachable_->insert(0);
        std::vector<std::pair<std::size_t, std::size_t>> swaps;  // (layer, swappable)
        for (std::size_t i = 0; i < universe_.size(); ++i)
            for (std::size_t j = 0; j < universe_.size(); ++j)
                if (is_swappable(t_, universe_[j]) && weak_sub(t_, universe_[i], universe_[j])) swaps.push_back({i, j});
        while (!work.empty()) {
            const std::uint32_t mask = work.back();
            work.pop_back();
            const LayerSet lam = to_set(mask);
            auto push = [&](std::uint32_t next) {
                if (reachable_->insert(next).second) work.push_back(next);
            };
            for (std::size_t i = 0; i < universe_.size(); ++i)
                if (set_weak_sub(t_, lam, t_.requires_of(universe_[i]))) push(mask | (1u << i));
            for (auto [i, j] : swaps) {
                std::uint32_t rm = mask;
                for (std::size_t k = 0; k < universe_.size(); ++k)
                    if ((mask & (1u << k)) && weak_sub(t_, universe_[k], universe_[j])) rm &= ~(1u << k);
                if (set_weak_sub(t_, to_set(rm), t_.requires_of(universe_[i]))) push(rm | (1u << i));
            }
        }
    }

    // Incomplete fallback for very large tables: Wf-With only.
    bool backward(const LayerSet& lam) {
        if (lam.empty()) return true;
        for (LayerName l : lam) {
            LayerSet rest = lam;
            rest.erase(l);
            if (set_weak_sub(t_, rest, t_.requires_of(l)) && backward(rest)) return true;
        }
        return false;
    }

    const Tables& t_;
    std::vector<LayerName> universe_;
    std::optional<std::unordered_set<std::uint32_t>> reachable_;
};

inline bool wf_layer_set(const Tables& t, const LayerSet& lam) { return WfDecider(t)(lam); }

// ---------------------------------------------------------------------------
// Expression typing

class TypeChecker {
public:
    /// Returns a witness for the given sequence, or nullptr if none is known.
    using WitnessProvider = std::function<const WfWitness*(const LayerSeq&)>;

    explicit TypeChecker(const Tables& t) : t_(t), wf_(t) {}

    void set_witness_provider(WitnessProvider p) { witnesses_ = std::move(p); }
    /// Rule names used by successful typings are added to `sink`.
    void set_coverage_sink(std::set<std::string>* sink) { coverage_ = sink; }

    const Tables& tables() const { return t_; }

    Type type_expr(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e) {
        return std::visit([&](const auto& n) -> Type { return on(loc, lam, env, e, n); }, e->node);
    }

    /// Wf-Cursor: `owner <: target`, set(full) WF, and ndp at the cursor.
    bool cursor_ok(ClassName owner, MethodName m, ClassName target, const LayerSeq& prefix, const LayerSeq& full) {
        if (!class_sub(t_, owner, target)) return false;
        if (!set_wf(full)) return false;
        return ndp(t_, m, target, prefix, full);
    }

    /// set(seq) WF, using a recorded witness when one is available.
    bool set_wf(const LayerSeq& seq) {
        if (witnesses_) {
            if (const auto* w = witnesses_(seq)) {
                auto derived = replay_witness(t_, *w);
                if (derived && *derived == seq.as_set()) {
                    used("Wf-Witness");
                    return true;
                }
            }
        }
        return wf_(seq.as_set());
    }

    bool set_wf(const LayerSet& lam) { return wf_(lam); }

    // --- declarations ------------------------------------------------------

    std::vector<TypeError> check_method(const ClassDecl& c, const MethodDecl& m) {
        std::vector<TypeError> out;
        const Location loc = InBaseMethod{c.name, m.name};
        TypeEnv env{{this_var(), Type(c.name)}};
        for (const auto& p : m.params) env[p.name] = p.type;
        try {
            Type s = type_expr(loc, {}, env, m.body);
            if (!subtype(t_, s, m.return_type))
                out.emplace_back("T-Method", "return", loc, m.span,
                                 "body of " + c.name.str() + "." + m.name.str() + " has type " + s.str() +
                                     ", which is not a subtype of the declared " + m.return_type.str());
            else
                used("T-Method");
        } catch (const TypeError& e) {
            out.push_back(e);
        }
        return out;
    }

    std::vector<TypeError> check_partial_method(const LayerDecl& l, const PartialMethodDecl& pm) {
        std::vector<TypeError> out;
        const Location loc = InPartialMethod{l.name, pm.target_class, pm.name};
        TypeEnv env{{this_var(), Type(pm.target_class)}};
        for (const auto& p : pm.params) env[p.name] = p.type;
        LayerSet lam = l.requires_set();
        lam.insert(l.name);
        try {
            Type s = type_expr(loc, lam, env, pm.body);
            if (!subtype(t_, s, pm.return_type))
                out.emplace_back("T-PMethod", "return", loc, pm.span,
                                 "body of " + describe(loc) + " has type " + s.str() +
                                     ", which is not a subtype of the declared " + pm.return_type.str());
            else
                used("T-PMethod");
        } catch (const TypeError& e) {
            out.push_back(e);
        }
        return out;
    }

    std::vector<TypeError> check_class(const ClassDecl& c) {
        std::vector<TypeError> out;
        const Location loc = InBaseMethod{c.name, MethodName()};
        if (c.superclass != object_class() && !t_.find_class(c.superclass))
            out.emplace_back("T-Class", "fields", loc, c.span, "superclass '" + c.superclass.str() + "' is unknown");
        for (const auto& m : c.methods) {
            auto errs = check_method(c, m);
            out.insert(out.end(), errs.begin(), errs.end());
        }
        if (out.empty()) used("T-Class");
        return out;
    }

    /// Nearest strict ancestor of `l` that is swappable.
    std::optional<LayerName> swappable_ancestor(LayerName l) const {
        const auto& chain = t_.layer_chain(l);
        for (std::size_t i = 1; i < chain.size(); ++i)
            if (is_swappable(t_, chain[i])) return chain[i];
        return std::nullopt;
    }

    std::vector<TypeError> check_layer(const LayerDecl& l) {
        std::vector<TypeError> out;
        const Location loc = InPartialMethod{l.name, ClassName(), MethodName()};
        const LayerSet req = l.requires_set();
        const LayerSet parent_req = t_.requires_of(l.superlayer);
        const char* rule = "T-Layer";
        if (auto sw = swappable_ancestor(l.name)) {
            rule = "T-LayerSW";
            if (l.swappable)
                out.emplace_back(rule, "not-swappable", loc, l.span,
                                 "layer " + l.name.str() + " is declared swappable but is a sublayer of swappable " +
                                     sw->str());
            if (req != parent_req)
                out.emplace_back(rule, "requires-equality", loc, l.span,
                                 "layer " + l.name.str() + " is a sublayer of swappable " + sw->str() +
                                     ", so its requires clause " + render(req) + " must equal that of " +
                                     l.superlayer.str() + ", " + render(parent_req));
            for (const auto& pm : l.partial_methods)
                if (!pmtype(t_, pm.name, pm.target_class, *sw))
                    out.emplace_back(rule, "no-new-partial-method", loc, pm.span,
                                     "partial method " + pm.target_class.str() + "." + pm.name.str() + " of " +
                                         l.name.str() + " is not defined in swappable " + sw->str());
            for (const auto& other : t_.layers())
                if (other.requires_set().count(l.name))
                    out.emplace_back(rule, "not-required", loc, other.span,
                                     "layer " + other.name.str() + " requires " + l.name.str() +
                                         ", a sublayer of swappable " + sw->str());
        } else if (!set_weak_sub(t_, req, parent_req)) {
            out.emplace_back(rule, "requires-covariance", loc, l.span,
                             "requires clause " + render(req) + " of " + l.name.str() +
                                 " does not cover that of its superlayer " + l.superlayer.str() + ", " +
                                 render(parent_req));
        }
        for (const auto& pm : l.partial_methods) {
            auto errs = check_partial_method(l, pm);
            out.insert(out.end(), errs.begin(), errs.end());
        }
        if (out.empty()) used(rule);
        return out;
    }

    std::vector<TypeError> check_tables() {
        std::vector<TypeError> out;
        auto add = [&](std::vector<TypeError> errs) { out.insert(out.end(), errs.begin(), errs.end()); };
        for (const auto& c : t_.classes()) add(check_class(c));
        for (const auto& l : t_.layers()) add(check_layer(l));
        const auto& ls = t_.layers();
        for (std::size_t i = 0; i < ls.size(); ++i)
            for (std::size_t j = i + 1; j < ls.size(); ++j)
                for (auto& issue : noconflict_issues(t_, ls[i].name, ls[j].name))
                    out.emplace_back("T-Table", "noconflict", InPartialMethod{ls[i].name, {}, {}}, issue.span,
                                     issue.message);
        for (const auto& l : ls)
            for (const auto& c : t_.classes())
                for (auto& issue : override_h_issues(t_, l.name, c.name))
                    out.emplace_back("T-Table", "override-h", InPartialMethod{l.name, c.name, {}}, issue.span,
                                     issue.message);
        for (const auto& c : t_.classes())
            for (auto& issue : override_v_issues(t_, c.name))
                out.emplace_back("T-Table", "override-v", InBaseMethod{c.name, {}}, issue.span, issue.message);
        if (out.empty()) used("T-Table");
        return out;
    }

private:
    void used(const char* rule) {
        if (coverage_) coverage_->insert(rule);
    }

    [[noreturn]] void fail(const char* rule, const char* premise, const Location& loc, const Expr& e,
                           const std::string& msg, std::vector<std::string> related = {}) const {
        throw TypeError(rule, premise, loc, e->span, msg, std::move(related));
    }

    const MTypeResult& method_type(const char* rule, const Location& loc, const Expr& e, MethodName m, ClassName c,
                                   const LayerSet& l1, const LayerSet& l2) {
        auto key = std::make_tuple(m, c, l1, l2);
        auto it = mtype_cache_.find(key);
        if (it == mtype_cache_.end()) it = mtype_cache_.emplace(key, mtype(t_, m, c, l1, l2)).first;
        const auto& mt = it->second;
        if (mt.conflict()) {
            std::vector<std::string> related;
            for (const auto& w : mt.witnesses) related.push_back(describe(w) + ": " + render(w.sig));
            fail(rule, "mtype", loc, e, "method " + c.str() + "." + m.str() + " has conflicting signatures",
                 std::move(related));
        }
        if (!mt.defined())
            fail(rule, "mtype", loc, e,
                 "no method " + m.str() + " in " + c.str() + " under layers " + render(l1) +
                     (l1 == l2 ? std::string() : " / " + render(l2)));
        return mt;
    }

    void check_args(const char* rule, const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e,
                    const ExprList& args, const std::vector<Type>& expected, const std::string& what) {
        if (args.size() != expected.size())
            fail(rule, "arity", loc, e,
                 what + " expects " + std::to_string(expected.size()) + " argument(s) but got " +
                     std::to_string(args.size()));
        for (std::size_t i = 0; i < args.size(); ++i) {
            Type s = type_expr(loc, lam, env, args[i]);
            if (!subtype(t_, s, expected[i]))
                fail(rule, "argument", loc, args[i],
                     "argument " + std::to_string(i + 1) + " of " + what + " has type " + s.str() +
                         ", which is not a subtype of " + expected[i].str());
        }
    }

    Type on(const Location& loc, const LayerSet&, const TypeEnv& env, const Expr& e, const Var& n) {
        auto it = env.find(n.name);
        if (it == env.end()) fail("T-Var", "bound", loc, e, "unbound variable '" + n.name.str() + "'");
        used("T-Var");
        return it->second;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const FieldGet& n) {
        Type t0 = type_expr(loc, lam, env, n.target);
        if (!t0.is_class()) fail("T-Field", "class", loc, e, "field access on a value of layer type " + t0.str());
        for (const auto& f : fields(t_, t0.as_class()))
            if (f.name == n.field) {
                used("T-Field");
                return f.type;
            }
        fail("T-Field", "fields", loc, e, "class " + t0.str() + " has no field '" + n.field.str() + "'");
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const Invoke& n) {
        Type t0 = type_expr(loc, lam, env, n.receiver);
        if (!t0.is_class()) fail("T-Invk", "class", loc, e, "method call on a value of layer type " + t0.str());
        const auto& mt = method_type("T-Invk", loc, e, n.method, t0.as_class(), lam, lam);
        check_args("T-Invk", loc, lam, env, e, n.args, mt.sig().params, t0.str() + "." + n.method.str());
        used("T-Invk");
        return mt.sig().ret;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const NewClass& n) {
        if (!t_.has_class(n.cls)) fail("T-New", "fields", loc, e, "unknown class '" + n.cls.str() + "'");
        std::vector<Type> expected;
        for (const auto& f : fields(t_, n.cls)) expected.push_back(f.type);
        check_args("T-New", loc, lam, env, e, n.args, expected, "new " + n.cls.str());
        used("T-New");
        return n.cls;
    }

    Type on(const Location&, const LayerSet&, const TypeEnv&, const Expr&, const NewLayer& n) {
        used("T-NewL");
        return n.layer;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const With& n) {
        Type tl = type_expr(loc, lam, env, n.layer);
        if (!tl.is_layer()) fail("T-With", "layer", loc, e, "with applied to an expression of class type " + tl.str());
        const LayerName l = tl.as_layer();
        const LayerSet req = t_.requires_of(l);
        if (!set_weak_sub(t_, lam, req))
            fail("T-With", "requires", loc, e,
                 "activating " + l.str() + " requires " + render(req) + " but only " + render(lam) + " are active");
        LayerSet inner = lam;
        inner.insert(l);
        Type t0 = type_expr(loc, inner, env, n.body);
        used("T-With");
        return t0;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const Swap& n) {
        Type tl = type_expr(loc, lam, env, n.layer);
        if (!tl.is_layer()) fail("T-Swap", "layer", loc, e, "swap applied to an expression of class type " + tl.str());
        const LayerName l = tl.as_layer();
        if (!is_swappable(t_, n.swappable))
            fail("T-Swap", "swappable", loc, e, "layer " + n.swappable.str() + " is not swappable");
        if (!weak_sub(t_, l, n.swappable))
            fail("T-Swap", "sublayer", loc, e, l.str() + " is not a sublayer of " + n.swappable.str());
        LayerSet rm;
        for (LayerName x : lam)
            if (!weak_sub(t_, x, n.swappable)) rm.insert(x);
        const LayerSet req = t_.requires_of(l);
        if (!set_weak_sub(t_, rm, req))
            fail("T-Swap", "requires", loc, e,
                 "swapping in " + l.str() + " requires " + render(req) + " but only " + render(rm) +
                     " remain active");
        rm.insert(l);
        Type t0 = type_expr(loc, rm, env, n.body);
        used("T-Swap");
        return t0;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const SuperCall& n) {
        if (const auto* b = std::get_if<InBaseMethod>(&loc)) {
            const auto sup = t_.superclass(b->cls);
            if (!sup) fail("T-SuperB", "class", loc, e, "unknown class '" + b->cls.str() + "'");
            const auto& mt = method_type("T-SuperB", loc, e, n.method, *sup, {}, {});
            check_args("T-SuperB", loc, lam, env, e, n.args, mt.sig().params, "super." + n.method.str());
            used("T-SuperB");
            return mt.sig().ret;
        }
        if (const auto* p = std::get_if<InPartialMethod>(&loc)) {
            const auto sup = t_.superclass(p->cls);
            if (!sup) fail("T-SuperP", "class", loc, e, "unknown class '" + p->cls.str() + "'");
            LayerSet ls = t_.requires_of(p->layer);
            ls.insert(p->layer);
            const auto& mt = method_type("T-SuperP", loc, e, n.method, *sup, ls, ls);
            check_args("T-SuperP", loc, lam, env, e, n.args, mt.sig().params, "super." + n.method.str());
            used("T-SuperP");
            return mt.sig().ret;
        }
        fail("T-SuperB", "location", loc, e, "super call outside a method");
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const Proceed& n) {
        const auto* p = std::get_if<InPartialMethod>(&loc);
        if (!p) fail("T-Proceed", "location", loc, e, "proceed outside a partial method");
        const LayerSet req = t_.requires_of(p->layer);
        LayerSet with_self = req;
        with_self.insert(p->layer);
        const auto& mt = method_type("T-Proceed", loc, e, p->method, p->cls, req, with_self);
        check_args("T-Proceed", loc, lam, env, e, n.args, mt.sig().params, "proceed");
        used("T-Proceed");
        return mt.sig().ret;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const SuperProceed& n) {
        const auto* p = std::get_if<InPartialMethod>(&loc);
        if (!p) fail("T-SuperProceed", "location", loc, e, "superproceed outside a partial method");
        const auto above = t_.superlayer(p->layer);
        std::optional<Signature> sig;
        if (above) sig = pmtype(t_, p->method, p->cls, *above);
        if (!sig)
            fail("T-SuperProceed", "pmtype", loc, e,
                 "superlayer " + (above ? above->str() : std::string("?")) + " of " + p->layer.str() +
                     " has no partial method " + p->cls.str() + "." + p->method.str());
        check_args("T-SuperProceed", loc, lam, env, e, n.args, sig->params, "superproceed");
        used("T-SuperProceed");
        return sig->ret;
    }

    Type on(const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e, const AnnotatedInvoke& n) {
        const bool quad = std::holds_alternative<QuadCursor>(n.cursor);
        const char* rule = quad ? "T-InvkAL" : "T-InvkA";
        if (!std::holds_alternative<TopLevel>(loc)) fail(rule, "location", loc, e, "run-time form inside a method");
        Type t0 = type_expr(loc, lam, env, n.receiver);
        if (!t0.is_class()) fail(rule, "receiver", loc, e, "receiver is not an object");
        const ClassName c0 = t0.as_class();
        const ClassName d0 = cursor_target(n.cursor);
        const LayerSeq& prefix = cursor_prefix(n.cursor);
        const LayerSeq& full = cursor_full(n.cursor);
        if (!class_sub(t_, c0, d0))
            fail(rule, "cursor", loc, e, c0.str() + " is not a subclass of cursor class " + d0.str());
        if (!set_wf(full)) fail(rule, "cursor", loc, e, "layer set " + render(full.as_set()) + " is not well formed");
        if (!ndp(t_, n.method, d0, prefix, full))
            fail(rule, "cursor", loc, e, "dangling proceed at cursor " + render(n.cursor));
        if (!set_sw_sub(t_, lam, full.as_set()))
            fail(rule, "layers", loc, e,
                 "active layers " + render(lam) + " do not cover cursor layers " + render(full.as_set()));
        Signature sig;
        if (quad) {
            const auto& k = std::get<QuadCursor>(n.cursor);
            if (prefix.empty() || !weak_sub(t_, prefix.back(), k.layer))
                fail(rule, "sublayer", loc, e, "cursor layer " + k.layer.str() + " is not above the prefix");
            auto s = pmtype(t_, n.method, d0, k.layer);
            if (!s)
                fail(rule, "pmtype", loc, e,
                     "no partial method " + d0.str() + "." + n.method.str() + " in " + k.layer.str());
            sig = *s;
        } else {
            sig = method_type(rule, loc, e, n.method, d0, prefix.as_set(), full.as_set()).sig();
        }
        check_args(rule, loc, lam, env, e, n.args, sig.params, n.method.str());
        used(rule);
        return sig.ret;
    }

    const Tables& t_;
    WfDecider wf_;
    WitnessProvider witnesses_;
    std::set<std::string>* coverage_ = nullptr;
    std::map<std::tuple<MethodName, ClassName, LayerSet, LayerSet>, MTypeResult> mtype_cache_;
};

inline Type type_expr(const Tables& t, const Location& loc, const LayerSet& lam, const TypeEnv& env, const Expr& e) {
    return TypeChecker(t).type_expr(loc, lam, env, e);
}

inline std::vector<TypeError> check_tables(const Tables& t) { return TypeChecker(t).check_tables(); }

/// T-Prog: tables ok, then main typed at top level under the empty set.
inline CheckResult check_program(const Program& p, std::set<std::string>* coverage = nullptr) {
    TypeChecker tc(p.t());
    tc.set_coverage_sink(coverage);
    CheckResult r;
    r.errors = tc.check_tables();
    if (!r.ok()) return r;
    try {
        r.type = tc.type_expr(TopLevel{}, {}, {}, p.main);
        if (coverage) coverage->insert("T-Prog");
    } catch (const TypeError& e) {
        r.errors.push_back(e);
    }
    return r;
}

}  // namespace cfj
