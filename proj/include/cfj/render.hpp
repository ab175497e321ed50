#pragma once

#include <sstream>
#include <string>

#include "cfj/ast.hpp"

namespace cfj {

/// `•` for the empty sequence, a bare name for one layer, `(L1;L2)` otherwise.
inline std::string render(const LayerSeq& seq) {
    if (seq.empty()) return "•";
    if (seq.size() == 1) return seq[0].str();
    std::string out = "(";
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += ';';
        out += seq[i].str();
    }
    return out + ")";
}

/// Bracketed, `;`-separated form used in trace lines: `[L1;L2]`, `[]`.
inline std::string render_active(const LayerSeq& seq) {
    std::string out = "[";
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) out += ';';
        out += seq[i].str();
    }
    return out + "]";
}

inline std::string render(const LayerSet& set) {
    std::string out = "{";
    bool first = true;
    for (const auto& l : set) {
        if (!first) out += ", ";
        first = false;
        out += l.str();
    }
    return out + "}";
}

inline std::string render(const Cursor& c) {
    if (const auto* t = std::get_if<TripleCursor>(&c))
        return "<" + t->target.str() + "," + render(t->prefix) + "," + render(t->full) + ">";
    const auto& q = std::get<QuadCursor>(c);
    return "<" + q.target.str() + "," + q.layer.str() + "," + render(q.prefix) + "," + render(q.full) + ">";
}

namespace detail {

inline void render_to(std::string& out, const Expr& e);

inline void render_args(std::string& out, const ExprList& args) {
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ", ";
        render_to(out, args[i]);
    }
    out += ')';
}

inline void render_to(std::string& out, const Expr& e) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Var>) {
                out += n.name.str();
            } else if constexpr (std::is_same_v<T, FieldGet>) {
                render_to(out, n.target);
                out += '.';
                out += n.field.str();
            } else if constexpr (std::is_same_v<T, Invoke>) {
                render_to(out, n.receiver);
                out += '.';
                out += n.method.str();
                render_args(out, n.args);
            } else if constexpr (std::is_same_v<T, NewClass>) {
                out += "new ";
                out += n.cls.str();
                render_args(out, n.args);
            } else if constexpr (std::is_same_v<T, NewLayer>) {
                out += "new ";
                out += n.layer.str();
                out += "()";
            } else if constexpr (std::is_same_v<T, With>) {
                out += "with ";
                render_to(out, n.layer);
                out += " { ";
                render_to(out, n.body);
                out += " }";
            } else if constexpr (std::is_same_v<T, Swap>) {
                out += "swap (";
                render_to(out, n.layer);
                out += ", ";
                out += n.swappable.str();
                out += ") { ";
                render_to(out, n.body);
                out += " }";
            } else if constexpr (std::is_same_v<T, Proceed>) {
                out += "proceed";
                render_args(out, n.args);
            } else if constexpr (std::is_same_v<T, SuperCall>) {
                out += "super.";
                out += n.method.str();
                render_args(out, n.args);
            } else if constexpr (std::is_same_v<T, SuperProceed>) {
                out += "superproceed";
                render_args(out, n.args);
            } else {
                render_to(out, n.receiver);
                out += render(n.cursor);
                out += '.';
                out += n.method.str();
                render_args(out, n.args);
            }
        },
        e->node);
}

inline std::string render_params(const std::vector<Param>& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += ", ";
        out += params[i].type.str() + " " + params[i].name.str();
    }
    return out;
}

}  // namespace detail

inline std::string render(const Expr& e) {
    std::string out;
    detail::render_to(out, e);
    return out;
}

inline std::string render(const Value& v) { return render(to_expr(v)); }

inline std::string render(const ClassDecl& c) {
    std::ostringstream os;
    os << "class " << c.name << " extends " << c.superclass << " {\n";
    for (const auto& f : c.fields) os << "  " << f.type << ' ' << f.name << ";\n";
    for (const auto& m : c.methods)
        os << "  " << m.return_type << ' ' << m.name << '(' << detail::render_params(m.params) << ") { return "
           << render(m.body) << "; }\n";
    os << "}\n";
    return os.str();
}

inline std::string render(const LayerDecl& l) {
    std::ostringstream os;
    if (l.swappable) os << "swappable ";
    os << "layer " << l.name;
    if (l.superlayer != base_layer()) os << " extends " << l.superlayer;
    if (!l.required.empty()) {
        os << " requires ";
        for (std::size_t i = 0; i < l.required.size(); ++i) os << (i ? ", " : "") << l.required[i];
    }
    os << " {\n";
    for (const auto& pm : l.partial_methods)
        os << "  " << pm.return_type << ' ' << pm.target_class << '.' << pm.name << '('
           << detail::render_params(pm.params) << ") { return " << render(pm.body) << "; }\n";
    os << "}\n";
    return os.str();
}

inline std::string render_tables(const Tables& t) {
    std::string out;
    for (const auto& c : t.classes()) out += render(c);
    for (const auto& l : t.layers()) out += render(l);
    return out;
}

inline std::string render(const Program& p) {
    return render_tables(p.t()) + "main { " + render(p.main) + " }\n";
}

}  // namespace cfj
