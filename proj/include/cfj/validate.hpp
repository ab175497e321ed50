#pragma once

#include <set>
#include <string>
#include <vector>

#include "cfj/ast.hpp"

namespace cfj {

/// One failed sanity condition. `condition` is 1..8 for the numbered
/// conditions on class and layer tables, 0 for the additional well-formedness
/// checks (duplicate names, misplaced proceed, ...).
struct Violation {
    int condition = 0;
    std::string where;
    std::string message;
    SourceSpan span;
};

struct ValidationReport {
    std::vector<Violation> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
    [[nodiscard]] bool has(int condition) const {
        for (const auto& v : violations)
            if (v.condition == condition) return true;
        return false;
    }
};

namespace detail {

class TableValidator {
public:
    explicit TableValidator(const Program& p) : p_(p), t_(p.t()) {}

    ValidationReport run() {
        check_classes();
        check_layers();
        check_cycles();
        if (p_.main) check_expr(p_.main, "main", ExprContext::Main);
        return std::move(report_);
    }

private:
    enum class ExprContext { Main, BaseMethod, PartialMethod };

    void add(int cond, std::string where, std::string msg, SourceSpan span = {}) {
        report_.violations.push_back({cond, std::move(where), std::move(msg), span});
    }

    void check_class_name(ClassName c, const std::string& where, SourceSpan span) {
        if (!t_.has_class(c)) add(3, where, "unknown class '" + c.str() + "'", span);
    }
    void check_layer_name(LayerName l, const std::string& where, SourceSpan span) {
        if (!t_.has_layer(l)) add(6, where, "unknown layer '" + l.str() + "'", span);
    }
    void check_type(const Type& ty, const std::string& where, SourceSpan span) {
        if (ty.is_class()) check_class_name(ty.as_class(), where, span);
        else check_layer_name(ty.as_layer(), where, span);
    }

    void check_params(const std::vector<Param>& params, const std::string& where, SourceSpan span) {
        std::set<VarName> seen;
        for (const auto& prm : params) {
            check_type(prm.type, where, span);
            if (prm.name == this_var()) add(0, where, "parameter may not be named 'this'", span);
            if (!seen.insert(prm.name).second)
                add(0, where, "duplicate parameter '" + prm.name.str() + "'", span);
        }
    }

    void check_classes() {
        std::set<ClassName> seen;
        for (const auto& c : t_.classes()) {
            const std::string where = "class " + c.name.str();
            if (c.name == object_class()) add(2, where, "'Object' may not be declared", c.span);
            if (!seen.insert(c.name).second) add(1, where, "class declared more than once", c.span);
            check_class_name(c.superclass, where, c.span);
            std::set<FieldName> fields;
            for (const auto& f : c.fields) {
                check_type(f.type, where, f.span);
                if (!fields.insert(f.name).second) add(0, where, "duplicate field '" + f.name.str() + "'", f.span);
            }
            std::set<MethodName> methods;
            for (const auto& m : c.methods) {
                const std::string mwhere = c.name.str() + "." + m.name.str();
                if (!methods.insert(m.name).second) add(0, mwhere, "duplicate method", m.span);
                check_type(m.return_type, mwhere, m.span);
                check_params(m.params, mwhere, m.span);
                if (m.body) check_expr(m.body, mwhere, ExprContext::BaseMethod);
            }
        }
    }

    void check_layers() {
        std::set<LayerName> seen;
        for (const auto& l : t_.layers()) {
            const std::string where = "layer " + l.name.str();
            if (l.name == base_layer()) add(5, where, "'Base' may not be declared", l.span);
            if (!seen.insert(l.name).second) add(4, where, "layer declared more than once", l.span);
            check_layer_name(l.superlayer, where, l.span);
            std::set<LayerName> req;
            for (const auto& r : l.required) {
                check_layer_name(r, where, l.span);
                if (!req.insert(r).second) add(0, where, "duplicate layer '" + r.str() + "' in requires", l.span);
                if (r == l.name) add(0, where, "a layer may not require itself", l.span);
            }
            std::set<std::pair<ClassName, MethodName>> pms;
            for (const auto& pm : l.partial_methods) {
                const std::string pwhere = l.name.str() + "." + pm.target_class.str() + "." + pm.name.str();
                if (pm.target_class == object_class())
                    add(8, pwhere, "a layer may not add methods to 'Object'", pm.span);
                else
                    check_class_name(pm.target_class, pwhere, pm.span);
                if (!pms.insert({pm.target_class, pm.name}).second) add(0, pwhere, "duplicate partial method", pm.span);
                check_type(pm.return_type, pwhere, pm.span);
                check_params(pm.params, pwhere, pm.span);
                if (pm.body) check_expr(pm.body, pwhere, ExprContext::PartialMethod);
            }
        }
    }

    void check_cycles() {
        for (const auto& c : t_.classes()) {
            const auto& chain = t_.class_chain(c.name);
            const auto* last = t_.find_class(chain.back());
            if (last && t_.has_class(last->superclass))
                add(7, "class " + c.name.str(), "cyclic class inheritance", c.span);
        }
        for (const auto& l : t_.layers()) {
            const auto& chain = t_.layer_chain(l.name);
            const auto* last = t_.find_layer(chain.back());
            if (last && t_.has_layer(last->superlayer))
                add(7, "layer " + l.name.str(), "cyclic layer inheritance", l.span);
        }
    }

    void check_expr(const Expr& e, const std::string& where, ExprContext ctx) {
        std::visit(
            [&](const auto& n) {
                using T = std::decay_t<decltype(n)>;
                if constexpr (std::is_same_v<T, FieldGet>) {
                    check_expr(n.target, where, ctx);
                } else if constexpr (std::is_same_v<T, Invoke>) {
                    check_expr(n.receiver, where, ctx);
                    for (const auto& a : n.args) check_expr(a, where, ctx);
                } else if constexpr (std::is_same_v<T, NewClass>) {
                    check_class_name(n.cls, where, e->span);
                    for (const auto& a : n.args) check_expr(a, where, ctx);
                } else if constexpr (std::is_same_v<T, NewLayer>) {
                    check_layer_name(n.layer, where, e->span);
                } else if constexpr (std::is_same_v<T, With>) {
                    check_expr(n.layer, where, ctx);
                    check_expr(n.body, where, ctx);
                } else if constexpr (std::is_same_v<T, Swap>) {
                    check_layer_name(n.swappable, where, e->span);
                    check_expr(n.layer, where, ctx);
                    check_expr(n.body, where, ctx);
                } else if constexpr (std::is_same_v<T, Proceed> || std::is_same_v<T, SuperProceed>) {
                    if (ctx != ExprContext::PartialMethod)
                        add(0, where, "proceed/superproceed outside a partial method", e->span);
                    for (const auto& a : n.args) check_expr(a, where, ctx);
                } else if constexpr (std::is_same_v<T, SuperCall>) {
                    if (ctx == ExprContext::Main) add(0, where, "super call outside a method", e->span);
                    for (const auto& a : n.args) check_expr(a, where, ctx);
                } else if constexpr (std::is_same_v<T, AnnotatedInvoke>) {
                    add(0, where, "run-time invocation form in source", e->span);
                }
            },
            e->node);
    }

    const Program& p_;
    const Tables& t_;
    ValidationReport report_;
};

}  // namespace detail

/// Checks the sanity conditions on the class and layer tables, plus name
/// resolution in the main expression.
inline ValidationReport validate_tables(const Program& p) { return detail::TableValidator(p).run(); }

}  // namespace cfj
