#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cfj/ast.hpp"
#include "cfj/relations.hpp"

namespace cfj {

class UnknownClass : public std::runtime_error {
public:
    explicit UnknownClass(ClassName c) : std::runtime_error("unknown class '" + c.str() + "'"), cls(c) {}
    ClassName cls;
};

struct Signature {
    std::vector<Type> params;
    Type ret;
    friend bool operator==(const Signature&, const Signature&) = default;
};

inline std::string render(const Signature& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.params.size(); ++i) out += (i ? ", " : "") + s.params[i].str();
    return out + ") -> " + s.ret.str();
}

template <class Decl>
Signature signature_of(const Decl& d) {
    Signature s{{}, d.return_type};
    for (const auto& p : d.params) s.params.push_back(p.type);
    return s;
}

template <class Decl>
std::vector<VarName> param_names(const Decl& d) {
    std::vector<VarName> out;
    for (const auto& p : d.params) out.push_back(p.name);
    return out;
}

// ---------------------------------------------------------------------------
// fields

/// Superclass fields first, then own fields, in declaration order.
inline std::vector<FieldDecl> fields(const Tables& t, ClassName c) {
    if (c == object_class()) return {};
    if (!t.find_class(c)) throw UnknownClass(c);
    const auto& chain = t.class_chain(c);
    std::vector<FieldDecl> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it)
        if (const auto* d = t.find_class(*it)) out.insert(out.end(), d->fields.begin(), d->fields.end());
    return out;
}

// ---------------------------------------------------------------------------
// pmbody / pmtype

struct PMBodyResult {
    std::vector<VarName> params;
    Expr body;
    LayerName found_layer;
    const PartialMethodDecl* decl = nullptr;
};

/// Partial method C.m in `l` or the nearest superlayer declaring it.
inline const PartialMethodDecl* find_partial_along(const Tables& t, MethodName m, ClassName c, LayerName l,
                                                   LayerName* found = nullptr) {
    for (LayerName x : t.layer_chain(l)) {
        const auto* d = t.find_layer(x);
        if (!d) return nullptr;  // Base, or an unresolvable name
        if (const auto* pm = d->find_partial(c, m)) {
            if (found) *found = x;
            return pm;
        }
    }
    return nullptr;
}

inline std::optional<PMBodyResult> pmbody(const Tables& t, MethodName m, ClassName c, LayerName l) {
    LayerName found;
    const auto* pm = find_partial_along(t, m, c, l, &found);
    if (!pm) return std::nullopt;
    return PMBodyResult{param_names(*pm), pm->body, found, pm};
}

inline std::optional<Signature> pmtype(const Tables& t, MethodName m, ClassName c, LayerName l) {
    const auto* pm = find_partial_along(t, m, c, l);
    if (!pm) return std::nullopt;
    return signature_of(*pm);
}

// ---------------------------------------------------------------------------
// mbody

struct MBodyResult {
    std::vector<VarName> params;
    Expr body;
    ClassName found_class;
    LayerSeq found_prefix;
    /// Layer that declares the body (the found layer's ancestor when the
    /// partial method is inherited); empty for base methods.
    std::optional<LayerName> defining_layer;
};

/// Scans `seq1` right to left for a partial method of class `c`, then the
/// base method of `c`, then moves to the superclass with `seq1` reset to
/// `seq2`.
inline std::optional<MBodyResult> mbody(const Tables& t, MethodName m, ClassName c, const LayerSeq& seq1,
                                        const LayerSeq& seq2) {
    std::vector<LayerName> cur = seq1.items();
    for (ClassName k : t.class_chain(c)) {
        const auto* cd = t.find_class(k);
        if (!cd) return std::nullopt;  // Object, or an unresolvable name
        while (!cur.empty()) {
            if (auto pb = pmbody(t, m, k, cur.back()))
                return MBodyResult{std::move(pb->params), pb->body, k, LayerSeq(cur), pb->found_layer};
            cur.pop_back();
        }
        if (const auto* md = cd->find_method(m)) return MBodyResult{param_names(*md), md->body, k, {}, std::nullopt};
        cur = seq2.items();
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// mtype

struct MTypeWitness {
    ClassName cls;
    std::optional<LayerName> layer;  // empty for the base method
    Signature sig;
};

inline std::string describe(const MTypeWitness& w) {
    return (w.layer ? w.layer->str() + "." : std::string()) + w.cls.str();
}

struct MTypeResult {
    enum class Status { Undefined, Defined, Conflict };
    Status status = Status::Undefined;
    std::vector<MTypeWitness> witnesses;

    [[nodiscard]] bool defined() const { return status == Status::Defined; }
    [[nodiscard]] bool conflict() const { return status == Status::Conflict; }
    [[nodiscard]] const Signature& sig() const { return witnesses.front().sig; }
    explicit operator bool() const { return defined(); }
};

/// Collects every MT-Class / MT-PMethod witness at the first class in the
/// chain that has one; disagreeing witnesses yield Conflict.
inline MTypeResult mtype(const Tables& t, MethodName m, ClassName c, const LayerSet& lam1, const LayerSet& lam2) {
    MTypeResult r;
    const LayerSet* cur = &lam1;
    for (ClassName k : t.class_chain(c)) {
        const auto* cd = t.find_class(k);
        if (!cd) return r;
        if (const auto* md = cd->find_method(m)) r.witnesses.push_back({k, std::nullopt, signature_of(*md)});
        for (LayerName l : *cur) {
            LayerName found;
            if (const auto* pm = find_partial_along(t, m, k, l, &found))
                r.witnesses.push_back({k, found, signature_of(*pm)});
        }
        if (!r.witnesses.empty()) {
            r.status = MTypeResult::Status::Defined;
            for (const auto& w : r.witnesses)
                if (!(w.sig == r.witnesses.front().sig)) r.status = MTypeResult::Status::Conflict;
            return r;
        }
        cur = &lam2;
    }
    return r;
}

inline MTypeResult mtype(const Tables& t, MethodName m, ClassName c, const LayerSet& lam) {
    return mtype(t, m, c, lam, lam);
}

// ---------------------------------------------------------------------------
// Override predicates

/// A failed override/conflict premise, for diagnostics.
struct OverrideIssue {
    std::string message;
    SourceSpan span;
};

inline std::vector<OverrideIssue> noconflict_issues(const Tables& t, LayerName l1, LayerName l2) {
    std::vector<OverrideIssue> out;
    const auto* d1 = t.find_layer(l1);
    const auto* d2 = t.find_layer(l2);
    if (!d1 || !d2) return out;
    for (const auto& pm : d1->partial_methods) {
        const auto* other = d2->find_partial(pm.target_class, pm.name);
        if (other && !(signature_of(pm) == signature_of(*other)))
            out.push_back({"partial method " + pm.target_class.str() + "." + pm.name.str() + " has signature " +
                               render(signature_of(pm)) + " in " + l1.str() + " but " +
                               render(signature_of(*other)) + " in " + l2.str(),
                           pm.span});
    }
    return out;
}

inline bool noconflict(const Tables& t, LayerName l1, LayerName l2) { return noconflict_issues(t, l1, l2).empty(); }

inline std::vector<OverrideIssue> override_h_issues(const Tables& t, LayerName l, ClassName c) {
    std::vector<OverrideIssue> out;
    const auto* d = t.find_layer(l);
    if (!d) return out;
    const LayerSet dom = t.layer_domain();
    for (const auto& pm : d->partial_methods) {
        if (pm.target_class != c) continue;
        auto mt = mtype(t, pm.name, c, {}, dom);
        if (mt.conflict()) {
            out.push_back({"method " + c.str() + "." + pm.name.str() + " has conflicting signatures", pm.span});
        } else if (mt.defined() && !(mt.sig() == signature_of(pm))) {
            out.push_back({"partial method " + l.str() + "." + c.str() + "." + pm.name.str() + " has signature " +
                               render(signature_of(pm)) + " but the method it overrides has " + render(mt.sig()),
                           pm.span});
        }
    }
    return out;
}

inline bool override_h(const Tables& t, LayerName l, ClassName c) { return override_h_issues(t, l, c).empty(); }

inline std::vector<OverrideIssue> override_v_issues(const Tables& t, ClassName c) {
    std::vector<OverrideIssue> out;
    const auto* cd = t.find_class(c);
    if (!cd) return out;
    const LayerSet dom = t.layer_domain();
    for (const auto& md : cd->methods) {
        auto mt = mtype(t, md.name, cd->superclass, dom, dom);
        if (mt.conflict()) {
            out.push_back({"inherited method " + md.name.str() + " has conflicting signatures", md.span});
            continue;
        }
        if (!mt.defined()) continue;
        const Signature own = signature_of(md);
        if (own.params != mt.sig().params || !subtype(t, own.ret, mt.sig().ret))
            out.push_back({"method " + c.str() + "." + md.name.str() + " with signature " + render(own) +
                               " does not validly override " + render(mt.sig()),
                           md.span});
    }
    return out;
}

inline bool override_v(const Tables& t, ClassName c) { return override_v_issues(t, c).empty(); }

// ---------------------------------------------------------------------------
// Memoized lookups for the evaluator and the runtime type checker.

class LookupCache {
public:
    explicit LookupCache(const Tables& t) : t_(t) {}

    const Tables& tables() const { return t_; }

    const std::optional<MBodyResult>& mbody(MethodName m, ClassName c, const LayerSeq& s1, const LayerSeq& s2) {
        auto key = std::make_tuple(m, c, s1, s2);
        auto it = mbody_.find(key);
        if (it == mbody_.end()) it = mbody_.emplace(key, cfj::mbody(t_, m, c, s1, s2)).first;
        return it->second;
    }

    const MTypeResult& mtype(MethodName m, ClassName c, const LayerSet& l1, const LayerSet& l2) {
        auto key = std::make_tuple(m, c, l1, l2);
        auto it = mtype_.find(key);
        if (it == mtype_.end()) it = mtype_.emplace(key, cfj::mtype(t_, m, c, l1, l2)).first;
        return it->second;
    }

private:
    const Tables& t_;
    std::map<std::tuple<MethodName, ClassName, LayerSeq, LayerSeq>, std::optional<MBodyResult>> mbody_;
    std::map<std::tuple<MethodName, ClassName, LayerSet, LayerSet>, MTypeResult> mtype_;
};

}  // namespace cfj
