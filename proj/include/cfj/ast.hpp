#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cfj/names.hpp"

namespace cfj {

struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    int line = 0;    // 1-based; 0 means "synthesized, no source position"
    int column = 0;  // 1-based

    [[nodiscard]] bool known() const { return line > 0; }
};

// ---------------------------------------------------------------------------
// Types

class Type {
public:
    Type() : name_(object_class()) {}
    Type(ClassName c) : name_(c) {}  // NOLINT(google-explicit-constructor)
    Type(LayerName l) : name_(l) {}  // NOLINT(google-explicit-constructor)

    [[nodiscard]] bool is_class() const { return std::holds_alternative<ClassName>(name_); }
    [[nodiscard]] bool is_layer() const { return std::holds_alternative<LayerName>(name_); }
    [[nodiscard]] ClassName as_class() const { return std::get<ClassName>(name_); }
    [[nodiscard]] LayerName as_layer() const { return std::get<LayerName>(name_); }
    [[nodiscard]] const std::string& str() const {
        return is_class() ? as_class().str() : as_layer().str();
    }

    friend bool operator==(const Type&, const Type&) = default;

private:
    std::variant<ClassName, LayerName> name_;
};

inline std::ostream& operator<<(std::ostream& os, const Type& t) { return os << t.str(); }

// ---------------------------------------------------------------------------
// Layer sequences and sets

using LayerSet = std::set<LayerName>;

/// Ordered activation sequence; the last element is the most recently
/// activated layer. Never contains duplicates.
class LayerSeq {
public:
    LayerSeq() = default;
    explicit LayerSeq(std::vector<LayerName> layers) : layers_(std::move(layers)) {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            for (std::size_t j = i + 1; j < layers_.size(); ++j)
                if (layers_[i] == layers_[j])
                    throw std::invalid_argument("duplicate layer in sequence: " + layers_[i].str());
    }
    LayerSeq(std::initializer_list<LayerName> layers) : LayerSeq(std::vector<LayerName>(layers)) {}

    [[nodiscard]] const std::vector<LayerName>& items() const { return layers_; }
    [[nodiscard]] bool empty() const { return layers_.empty(); }
    [[nodiscard]] std::size_t size() const { return layers_.size(); }
    [[nodiscard]] LayerName back() const { return layers_.back(); }
    [[nodiscard]] LayerName operator[](std::size_t i) const { return layers_[i]; }

    [[nodiscard]] bool contains(LayerName l) const {
        return std::find(layers_.begin(), layers_.end(), l) != layers_.end();
    }
    /// Everything but the last element.
    [[nodiscard]] LayerSeq init() const {
        LayerSeq out;
        out.layers_.assign(layers_.begin(), layers_.end() - (layers_.empty() ? 0 : 1));
        return out;
    }
    [[nodiscard]] LayerSet as_set() const { return {layers_.begin(), layers_.end()}; }
    [[nodiscard]] bool is_prefix_of(const LayerSeq& other) const {
        return layers_.size() <= other.layers_.size() &&
               std::equal(layers_.begin(), layers_.end(), other.layers_.begin());
    }

    friend bool operator==(const LayerSeq&, const LayerSeq&) = default;
    friend bool operator<(const LayerSeq& a, const LayerSeq& b) { return a.layers_ < b.layers_; }

private:
    std::vector<LayerName> layers_;
};

// ---------------------------------------------------------------------------
// Cursors

/// `<target, prefix, full>`: resume lookup of a method at `target`, scanning
/// `prefix` right to left; `full` is the sequence active at the original call.
struct TripleCursor {
    ClassName target;
    LayerSeq prefix;
    LayerSeq full;
    friend bool operator==(const TripleCursor&, const TripleCursor&) = default;
};

/// `<target, layer, prefix, full>`: resume a superproceed lookup at `layer`.
struct QuadCursor {
    ClassName target;
    LayerName layer;
    LayerSeq prefix;
    LayerSeq full;
    friend bool operator==(const QuadCursor&, const QuadCursor&) = default;
};

using Cursor = std::variant<TripleCursor, QuadCursor>;

inline const LayerSeq& cursor_prefix(const Cursor& c) {
    return std::visit([](const auto& k) -> const LayerSeq& { return k.prefix; }, c);
}
inline const LayerSeq& cursor_full(const Cursor& c) {
    return std::visit([](const auto& k) -> const LayerSeq& { return k.full; }, c);
}
inline ClassName cursor_target(const Cursor& c) {
    return std::visit([](const auto& k) { return k.target; }, c);
}

inline TripleCursor make_triple(ClassName target, LayerSeq prefix, LayerSeq full) {
    if (!prefix.is_prefix_of(full)) throw std::logic_error("cursor prefix is not a prefix of its sequence");
    return {target, std::move(prefix), std::move(full)};
}
inline QuadCursor make_quad(ClassName target, LayerName layer, LayerSeq prefix, LayerSeq full) {
    if (!prefix.is_prefix_of(full)) throw std::logic_error("cursor prefix is not a prefix of its sequence");
    return {target, layer, std::move(prefix), std::move(full)};
}

// ---------------------------------------------------------------------------
// Expressions

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;
using ExprList = std::vector<Expr>;

struct Var { VarName name; };
struct FieldGet { Expr target; FieldName field; };
struct Invoke { Expr receiver; MethodName method; ExprList args; };
struct NewClass { ClassName cls; ExprList args; };
struct NewLayer { LayerName layer; };
struct With { Expr layer; Expr body; };
struct Swap { Expr layer; LayerName swappable; Expr body; };
struct Proceed { ExprList args; };
struct SuperCall { MethodName method; ExprList args; };
struct SuperProceed { ExprList args; };
/// Runtime-only invocation carrying a lookup cursor. The receiver is always a
/// fully evaluated `new C(v...)`.
struct AnnotatedInvoke { Expr receiver; Cursor cursor; MethodName method; ExprList args; };

using ExprVariant = std::variant<Var, FieldGet, Invoke, NewClass, NewLayer, With, Swap, Proceed,
                                 SuperCall, SuperProceed, AnnotatedInvoke>;

struct ExprNode {
    ExprVariant node;
    SourceSpan span;
};

template <class T>
const T* as(const Expr& e) {
    return std::get_if<T>(&e->node);
}

inline Expr make_expr(ExprVariant v, SourceSpan span = {}) {
    return std::make_shared<const ExprNode>(ExprNode{std::move(v), span});
}
inline Expr var(std::string_view name) { return make_expr(Var{VarName(name)}); }
inline Expr this_expr() { return make_expr(Var{this_var()}); }
inline Expr field_get(Expr target, std::string_view f) {
    return make_expr(FieldGet{std::move(target), FieldName(f)});
}
inline Expr invoke(Expr recv, std::string_view m, ExprList args = {}) {
    return make_expr(Invoke{std::move(recv), MethodName(m), std::move(args)});
}
inline Expr new_class(std::string_view c, ExprList args = {}) {
    return make_expr(NewClass{ClassName(c), std::move(args)});
}
inline Expr new_layer(std::string_view l) { return make_expr(NewLayer{LayerName(l)}); }
inline Expr with_expr(Expr layer, Expr body) { return make_expr(With{std::move(layer), std::move(body)}); }
inline Expr swap_expr(Expr layer, std::string_view sw, Expr body) {
    return make_expr(Swap{std::move(layer), LayerName(sw), std::move(body)});
}
inline Expr proceed_expr(ExprList args = {}) { return make_expr(Proceed{std::move(args)}); }
inline Expr super_call(std::string_view m, ExprList args = {}) {
    return make_expr(SuperCall{MethodName(m), std::move(args)});
}
inline Expr superproceed_expr(ExprList args = {}) { return make_expr(SuperProceed{std::move(args)}); }

bool equal(const Expr& a, const Expr& b);

inline bool equal(const ExprList& a, const ExprList& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
    return true;
}

/// Structural equality; spans are ignored.
inline bool equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (!a || !b || a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, Var>) return x.name == y.name;
            else if constexpr (std::is_same_v<T, FieldGet>) return x.field == y.field && equal(x.target, y.target);
            else if constexpr (std::is_same_v<T, Invoke>)
                return x.method == y.method && equal(x.receiver, y.receiver) && equal(x.args, y.args);
            else if constexpr (std::is_same_v<T, NewClass>) return x.cls == y.cls && equal(x.args, y.args);
            else if constexpr (std::is_same_v<T, NewLayer>) return x.layer == y.layer;
            else if constexpr (std::is_same_v<T, With>) return equal(x.layer, y.layer) && equal(x.body, y.body);
            else if constexpr (std::is_same_v<T, Swap>)
                return x.swappable == y.swappable && equal(x.layer, y.layer) && equal(x.body, y.body);
            else if constexpr (std::is_same_v<T, Proceed>) return equal(x.args, y.args);
            else if constexpr (std::is_same_v<T, SuperCall>) return x.method == y.method && equal(x.args, y.args);
            else if constexpr (std::is_same_v<T, SuperProceed>) return equal(x.args, y.args);
            else
                return x.method == y.method && x.cursor == y.cursor && equal(x.receiver, y.receiver) &&
                       equal(x.args, y.args);
        },
        a->node);
}

// ---------------------------------------------------------------------------
// Values

struct Value;
struct ObjValue {
    ClassName cls;
    std::vector<Value> fields;
};
struct LayerValue {
    LayerName layer;
};
struct Value {
    std::variant<ObjValue, LayerValue> v;
};

inline bool operator==(const Value& a, const Value& b);
inline bool operator==(const ObjValue& a, const ObjValue& b) { return a.cls == b.cls && a.fields == b.fields; }
inline bool operator==(const LayerValue& a, const LayerValue& b) { return a.layer == b.layer; }
inline bool operator==(const Value& a, const Value& b) { return a.v == b.v; }

/// `new C(v...)` with every argument a value, or `new L()`.
inline bool is_value(const Expr& e) {
    if (as<NewLayer>(e)) return true;
    if (const auto* n = as<NewClass>(e))
        return std::all_of(n->args.begin(), n->args.end(), [](const Expr& a) { return is_value(a); });
    return false;
}

inline bool is_obj_value(const Expr& e) { return as<NewClass>(e) && is_value(e); }

inline std::optional<Value> to_value(const Expr& e) {
    if (const auto* l = as<NewLayer>(e)) return Value{LayerValue{l->layer}};
    if (const auto* n = as<NewClass>(e)) {
        ObjValue obj{n->cls, {}};
        for (const auto& a : n->args) {
            auto v = to_value(a);
            if (!v) return std::nullopt;
            obj.fields.push_back(std::move(*v));
        }
        return Value{std::move(obj)};
    }
    return std::nullopt;
}

inline Expr to_expr(const Value& v) {
    if (const auto* l = std::get_if<LayerValue>(&v.v)) return make_expr(NewLayer{l->layer});
    const auto& obj = std::get<ObjValue>(v.v);
    ExprList args;
    for (const auto& f : obj.fields) args.push_back(to_expr(f));
    return make_expr(NewClass{obj.cls, std::move(args)});
}

inline AnnotatedInvoke make_annotated(Expr receiver, Cursor cursor, MethodName m, ExprList args) {
    if (!is_obj_value(receiver)) throw std::logic_error("annotated invocation on a non-value receiver");
    if (!cursor_prefix(cursor).is_prefix_of(cursor_full(cursor)))
        throw std::logic_error("cursor prefix is not a prefix of its sequence");
    return {std::move(receiver), std::move(cursor), m, std::move(args)};
}

// ---------------------------------------------------------------------------
// Declarations

struct Param {
    Type type;
    VarName name;
};

struct FieldDecl {
    Type type;
    FieldName name;
    SourceSpan span;
};

struct MethodDecl {
    MethodName name;
    Type return_type;
    std::vector<Param> params;
    Expr body;
    SourceSpan span;
};

struct ClassDecl {
    ClassName name;
    ClassName superclass = object_class();
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    SourceSpan span;

    [[nodiscard]] const MethodDecl* find_method(MethodName m) const {
        for (const auto& md : methods)
            if (md.name == m) return &md;
        return nullptr;
    }
};

struct PartialMethodDecl {
    ClassName target_class;
    MethodName name;
    Type return_type;
    std::vector<Param> params;
    Expr body;
    SourceSpan span;
};

struct LayerDecl {
    LayerName name;
    LayerName superlayer = base_layer();
    bool swappable = false;
    std::vector<LayerName> required;  // the `requires` clause, in source order
    std::vector<PartialMethodDecl> partial_methods;
    SourceSpan span;

    [[nodiscard]] const PartialMethodDecl* find_partial(ClassName c, MethodName m) const {
        for (const auto& pm : partial_methods)
            if (pm.target_class == c && pm.name == m) return &pm;
        return nullptr;
    }
    [[nodiscard]] LayerSet requires_set() const { return {required.begin(), required.end()}; }
};

/// Class and layer tables. Immutable once built; ancestor chains are computed
/// at construction and are cycle-safe (a chain stops at the first repeat or
/// unresolvable name).
class Tables {
public:
    Tables() = default;
    Tables(std::vector<ClassDecl> classes, std::vector<LayerDecl> layers)
        : classes_(std::move(classes)), layers_(std::move(layers)) {
        for (std::size_t i = 0; i < classes_.size(); ++i) class_index_.emplace(classes_[i].name, i);
        for (std::size_t i = 0; i < layers_.size(); ++i) layer_index_.emplace(layers_[i].name, i);
        for (const auto& c : classes_) class_chains_.emplace(c.name, build_class_chain(c.name));
        for (const auto& l : layers_) layer_chains_.emplace(l.name, build_layer_chain(l.name));
    }

    [[nodiscard]] const std::vector<ClassDecl>& classes() const { return classes_; }
    [[nodiscard]] const std::vector<LayerDecl>& layers() const { return layers_; }

    [[nodiscard]] const ClassDecl* find_class(ClassName c) const {
        auto it = class_index_.find(c);
        return it == class_index_.end() ? nullptr : &classes_[it->second];
    }
    [[nodiscard]] const LayerDecl* find_layer(LayerName l) const {
        auto it = layer_index_.find(l);
        return it == layer_index_.end() ? nullptr : &layers_[it->second];
    }
    [[nodiscard]] bool has_class(ClassName c) const { return c == object_class() || find_class(c); }
    [[nodiscard]] bool has_layer(LayerName l) const { return l == base_layer() || find_layer(l); }

    /// `c` followed by its superclasses, ending with `Object` when the chain
    /// is well founded.
    [[nodiscard]] const std::vector<ClassName>& class_chain(ClassName c) const {
        static const std::vector<ClassName> object_only{object_class()};
        auto it = class_chains_.find(c);
        if (it != class_chains_.end()) return it->second;
        return object_only;
    }
    /// `l` followed by its superlayers, ending with `Base` when well founded.
    [[nodiscard]] const std::vector<LayerName>& layer_chain(LayerName l) const {
        static const std::vector<LayerName> base_only{base_layer()};
        auto it = layer_chains_.find(l);
        if (it != layer_chains_.end()) return it->second;
        return base_only;
    }

    [[nodiscard]] std::optional<ClassName> superclass(ClassName c) const {
        if (const auto* d = find_class(c)) return d->superclass;
        return std::nullopt;
    }
    [[nodiscard]] std::optional<LayerName> superlayer(LayerName l) const {
        if (const auto* d = find_layer(l)) return d->superlayer;
        return std::nullopt;
    }
    /// Requires set of `l`; `Base` (and unknown layers) require nothing.
    [[nodiscard]] LayerSet requires_of(LayerName l) const {
        if (const auto* d = find_layer(l)) return d->requires_set();
        return {};
    }
    [[nodiscard]] LayerSet layer_domain() const {
        LayerSet out;
        for (const auto& l : layers_) out.insert(l.name);
        return out;
    }

private:
    std::vector<ClassName> build_class_chain(ClassName c) const {
        std::vector<ClassName> chain{c};
        std::set<ClassName> seen{c};
        while (const auto* d = find_class(chain.back())) {
            if (!seen.insert(d->superclass).second) break;
            chain.push_back(d->superclass);
        }
        return chain;
    }
    std::vector<LayerName> build_layer_chain(LayerName l) const {
        std::vector<LayerName> chain{l};
        std::set<LayerName> seen{l};
        while (const auto* d = find_layer(chain.back())) {
            if (!seen.insert(d->superlayer).second) break;
            chain.push_back(d->superlayer);
        }
        return chain;
    }

    std::vector<ClassDecl> classes_;
    std::vector<LayerDecl> layers_;
    std::unordered_map<ClassName, std::size_t> class_index_;
    std::unordered_map<LayerName, std::size_t> layer_index_;
    std::unordered_map<ClassName, std::vector<ClassName>> class_chains_;
    std::unordered_map<LayerName, std::vector<LayerName>> layer_chains_;
};

/// A class table, a layer table and a main expression.
struct Program {
    std::shared_ptr<const Tables> tables = std::make_shared<const Tables>();
    Expr main;

    [[nodiscard]] const Tables& t() const { return *tables; }
    [[nodiscard]] Program with_main(Expr e) const { return {tables, std::move(e)}; }
};

inline Program make_program(std::vector<ClassDecl> classes, std::vector<LayerDecl> layers, Expr main) {
    return {std::make_shared<const Tables>(std::move(classes), std::move(layers)), std::move(main)};
}

// ---------------------------------------------------------------------------
// Typing contexts

struct TopLevel {
    friend bool operator==(const TopLevel&, const TopLevel&) = default;
};
struct InBaseMethod {
    ClassName cls;
    MethodName method;
    friend bool operator==(const InBaseMethod&, const InBaseMethod&) = default;
};
struct InPartialMethod {
    LayerName layer;
    ClassName cls;
    MethodName method;
    friend bool operator==(const InPartialMethod&, const InPartialMethod&) = default;
};
using Location = std::variant<TopLevel, InBaseMethod, InPartialMethod>;

inline std::string describe(const Location& loc) {
    if (const auto* b = std::get_if<InBaseMethod>(&loc)) return b->cls.str() + "." + b->method.str();
    if (const auto* p = std::get_if<InPartialMethod>(&loc))
        return p->layer.str() + "." + p->cls.str() + "." + p->method.str();
    return "main";
}

using TypeEnv = std::map<VarName, Type>;

}  // namespace cfj
