#pragma once

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cfj/ast.hpp"
#include "cfj/validate.hpp"

namespace cfj {

class ParseError : public std::runtime_error {
public:
    ParseError(SourceSpan span, std::vector<std::string> expected, const std::string& found)
        : std::runtime_error(make_message(expected, found)), span_(span), expected_(std::move(expected)) {}

    [[nodiscard]] const SourceSpan& span() const { return span_; }
    [[nodiscard]] const std::vector<std::string>& expected() const { return expected_; }

private:
    static std::string make_message(const std::vector<std::string>& expected, const std::string& found) {
        std::string msg = "expected ";
        if (expected.size() > 1) msg += "one of ";
        for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? ", " : "") + expected[i];
        return msg + " but found " + found;
    }

    SourceSpan span_;
    std::vector<std::string> expected_;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(ValidationReport report)
        : std::runtime_error(report.violations.empty() ? "invalid program" : report.violations.front().message),
          report_(std::move(report)) {}

    [[nodiscard]] const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

namespace detail {

enum class Tok {
    Ident, Class, Extends, Layer, Swappable, Requires, Main, Return, New, This, Proceed,
    SuperProceed, Super, With, Swap, LBrace, RBrace, LParen, RParen, Semi, Comma, Dot, End
};

struct Token {
    Tok kind = Tok::End;
    std::string_view text;
    SourceSpan span;
};

inline std::string describe(Tok k) {
    switch (k) {
        case Tok::Ident: return "identifier";
        case Tok::Class: return "'class'";
        case Tok::Extends: return "'extends'";
        case Tok::Layer: return "'layer'";
        case Tok::Swappable: return "'swappable'";
        case Tok::Requires: return "'requires'";
        case Tok::Main: return "'main'";
        case Tok::Return: return "'return'";
        case Tok::New: return "'new'";
        case Tok::This: return "'this'";
        case Tok::Proceed: return "'proceed'";
        case Tok::SuperProceed: return "'superproceed'";
        case Tok::Super: return "'super'";
        case Tok::With: return "'with'";
        case Tok::Swap: return "'swap'";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_trivia();
            Token t;
            t.span = here();
            if (pos_ >= src_.size()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            const char c = src_[pos_];
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                t.text = src_.substr(start, pos_ - start);
                t.kind = keyword(t.text);
            } else {
                t.text = src_.substr(pos_, 1);
                switch (c) {
                    case '{': t.kind = Tok::LBrace; break;
                    case '}': t.kind = Tok::RBrace; break;
                    case '(': t.kind = Tok::LParen; break;
                    case ')': t.kind = Tok::RParen; break;
                    case ';': t.kind = Tok::Semi; break;
                    case ',': t.kind = Tok::Comma; break;
                    case '.': t.kind = Tok::Dot; break;
                    default:
                        throw ParseError(t.span, {"a token"}, "character '" + std::string(1, c) + "'");
                }
                advance();
            }
            t.span.end = pos_;
            out.push_back(t);
        }
    }

private:
    static Tok keyword(std::string_view w) {
        static const std::pair<std::string_view, Tok> table[] = {
            {"class", Tok::Class},   {"extends", Tok::Extends}, {"layer", Tok::Layer},
            {"swappable", Tok::Swappable}, {"requires", Tok::Requires}, {"main", Tok::Main},
            {"return", Tok::Return}, {"new", Tok::New},         {"this", Tok::This},
            {"proceed", Tok::Proceed}, {"superproceed", Tok::SuperProceed}, {"super", Tok::Super},
            {"with", Tok::With},     {"swap", Tok::Swap},
        };
        for (const auto& [text, kind] : table)
            if (text == w) return kind;
        return Tok::Ident;
    }

    SourceSpan here() const { return {pos_, pos_, line_, col_}; }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
                advance();
            } else if (src_.substr(pos_, 2) == "//") {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

/// Raw declarations as written; type names are resolved against the tables
/// once every declaration has been seen.
class Parser {
public:
    explicit Parser(std::string_view src) : toks_(Lexer(src).run()) {}

    Program program() {
        std::vector<ClassDecl> classes;
        std::vector<LayerDecl> layers;
        for (;;) {
            if (peek(Tok::Class)) {
                classes.push_back(class_decl());
            } else if (peek(Tok::Layer) || peek(Tok::Swappable)) {
                layers.push_back(layer_decl());
            } else if (peek(Tok::Main)) {
                break;
            } else {
                fail({describe(Tok::Class), describe(Tok::Layer), describe(Tok::Swappable), describe(Tok::Main)});
            }
        }
        expect(Tok::Main);
        expect(Tok::LBrace);
        ctx_ = Ctx::Main;
        Expr main = expr();
        expect(Tok::RBrace);
        expect(Tok::End);
        return resolve(std::move(classes), std::move(layers), std::move(main));
    }

    /// Parses a lone expression (used for `main` bodies supplied separately).
    Expr standalone_expr() {
        ctx_ = Ctx::Main;
        Expr e = expr();
        expect(Tok::End);
        return e;
    }

private:
    enum class Ctx { Main, BaseMethod, PartialMethod };

    const Token& cur() const { return toks_[i_]; }
    bool peek(Tok k, std::size_t ahead = 0) const {
        return i_ + ahead < toks_.size() && toks_[i_ + ahead].kind == k;
    }
    bool accept(Tok k) {
        if (!peek(k)) return false;
        ++i_;
        return true;
    }
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const auto& t = cur();
        std::string found = t.kind == Tok::End ? "end of input" : "'" + std::string(t.text) + "'";
        throw ParseError(t.span, std::move(expected), found);
    }
    const Token& expect(Tok k) {
        if (!peek(k)) fail({describe(k)});
        return toks_[i_++];
    }
    std::string_view ident() { return expect(Tok::Ident).text; }

    static SourceSpan join(SourceSpan a, SourceSpan b) { return {a.begin, b.end, a.line, a.column}; }
    SourceSpan last_span() const { return toks_[i_ - 1].span; }

    ClassDecl class_decl() {
        ClassDecl c;
        c.span = expect(Tok::Class).span;
        c.name = ClassName(ident());
        expect(Tok::Extends);
        c.superclass = ClassName(ident());
        expect(Tok::LBrace);
        // fielddecl := type ID ";"   methoddecl := type ID "(" ...
        while (peek(Tok::Ident) && peek(Tok::Ident, 1) && peek(Tok::Semi, 2)) {
            FieldDecl f;
            f.span = cur().span;
            f.type = ClassName(ident());
            f.name = FieldName(ident());
            expect(Tok::Semi);
            c.fields.push_back(f);
        }
        while (!peek(Tok::RBrace)) {
            if (!peek(Tok::Ident)) fail({describe(Tok::Ident), describe(Tok::RBrace)});
            MethodDecl m;
            m.span = cur().span;
            m.return_type = ClassName(ident());
            m.name = MethodName(ident());
            m.params = params();
            ctx_ = Ctx::BaseMethod;
            m.body = method_body();
            c.methods.push_back(std::move(m));
        }
        expect(Tok::RBrace);
        return c;
    }

    LayerDecl layer_decl() {
        LayerDecl l;
        l.span = cur().span;
        l.swappable = accept(Tok::Swappable);
        expect(Tok::Layer);
        l.name = LayerName(ident());
        if (accept(Tok::Extends)) l.superlayer = LayerName(ident());
        if (accept(Tok::Requires)) {
            do {
                l.required.emplace_back(ident());
            } while (accept(Tok::Comma));
        }
        expect(Tok::LBrace);
        while (!peek(Tok::RBrace)) {
            if (!peek(Tok::Ident)) fail({describe(Tok::Ident), describe(Tok::RBrace)});
            PartialMethodDecl pm;
            pm.span = cur().span;
            pm.return_type = ClassName(ident());
            pm.target_class = ClassName(ident());
            expect(Tok::Dot);
            pm.name = MethodName(ident());
            pm.params = params();
            ctx_ = Ctx::PartialMethod;
            pm.body = method_body();
            l.partial_methods.push_back(std::move(pm));
        }
        expect(Tok::RBrace);
        return l;
    }

    std::vector<Param> params() {
        std::vector<Param> out;
        expect(Tok::LParen);
        if (!peek(Tok::RParen)) {
            do {
                Param p;
                p.type = ClassName(ident());
                p.name = VarName(ident());
                out.push_back(p);
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        return out;
    }

    Expr method_body() {
        expect(Tok::LBrace);
        expect(Tok::Return);
        Expr e = expr();
        expect(Tok::Semi);
        expect(Tok::RBrace);
        return e;
    }

    ExprList args() {
        ExprList out;
        expect(Tok::LParen);
        if (!peek(Tok::RParen)) {
            do {
                out.push_back(expr());
            } while (accept(Tok::Comma));
        }
        expect(Tok::RParen);
        return out;
    }

    Expr expr() {
        Expr e = primary();
        while (accept(Tok::Dot)) {
            const SourceSpan start = e->span;
            auto name = ident();
            if (peek(Tok::LParen)) {
                auto a = args();
                e = make_expr(Invoke{e, MethodName(name), std::move(a)}, join(start, last_span()));
            } else {
                e = make_expr(FieldGet{e, FieldName(name)}, join(start, last_span()));
            }
        }
        return e;
    }

    Expr primary() {
        const SourceSpan start = cur().span;
        switch (cur().kind) {
            case Tok::Ident: {
                auto name = ident();
                return make_expr(Var{VarName(name)}, start);
            }
            case Tok::This:
                ++i_;
                return make_expr(Var{this_var()}, start);
            case Tok::New: {
                ++i_;
                auto name = ident();
                auto a = args();
                // Class or layer is decided once the tables are known.
                return make_expr(NewClass{ClassName(name), std::move(a)}, join(start, last_span()));
            }
            case Tok::Proceed: {
                if (ctx_ != Ctx::PartialMethod) fail({"an expression ('proceed' is only valid in a partial method)"});
                ++i_;
                auto a = args();
                return make_expr(Proceed{std::move(a)}, join(start, last_span()));
            }
            case Tok::SuperProceed: {
                if (ctx_ != Ctx::PartialMethod)
                    fail({"an expression ('superproceed' is only valid in a partial method)"});
                ++i_;
                auto a = args();
                return make_expr(SuperProceed{std::move(a)}, join(start, last_span()));
            }
            case Tok::Super: {
                if (ctx_ == Ctx::Main) fail({"an expression ('super' is only valid in a method)"});
                ++i_;
                expect(Tok::Dot);
                auto name = ident();
                auto a = args();
                return make_expr(SuperCall{MethodName(name), std::move(a)}, join(start, last_span()));
            }
            case Tok::With: {
                ++i_;
                Expr layer = expr();
                expect(Tok::LBrace);
                Expr body = expr();
                expect(Tok::RBrace);
                return make_expr(With{layer, body}, join(start, last_span()));
            }
            case Tok::Swap: {
                ++i_;
                expect(Tok::LParen);
                Expr layer = expr();
                expect(Tok::Comma);
                auto sw = ident();
                expect(Tok::RParen);
                expect(Tok::LBrace);
                Expr body = expr();
                expect(Tok::RBrace);
                return make_expr(Swap{layer, LayerName(sw), body}, join(start, last_span()));
            }
            case Tok::LParen: {
                ++i_;
                Expr e = expr();
                expect(Tok::RParen);
                return e;
            }
            default:
                fail({describe(Tok::Ident), describe(Tok::This), describe(Tok::New), describe(Tok::Proceed),
                      describe(Tok::SuperProceed), describe(Tok::Super), describe(Tok::With), describe(Tok::Swap),
                      describe(Tok::LParen)});
        }
    }

public:
    struct Resolver {
        std::set<std::string> layer_names;

        Type type(const Type& raw) const {
            // The parser always produces class-tagged names; retag layer names.
            if (raw.is_class() && layer_names.count(raw.as_class().str())) return LayerName(raw.as_class().view());
            return raw;
        }

        Expr expr(const Expr& e) const {
            return std::visit(
                [&](const auto& n) -> Expr {
                    using T = std::decay_t<decltype(n)>;
                    if constexpr (std::is_same_v<T, FieldGet>) {
                        return make_expr(FieldGet{expr(n.target), n.field}, e->span);
                    } else if constexpr (std::is_same_v<T, Invoke>) {
                        return make_expr(Invoke{expr(n.receiver), n.method, list(n.args)}, e->span);
                    } else if constexpr (std::is_same_v<T, NewClass>) {
                        if (n.args.empty() && layer_names.count(n.cls.str()))
                            return make_expr(NewLayer{LayerName(n.cls.view())}, e->span);
                        return make_expr(NewClass{n.cls, list(n.args)}, e->span);
                    } else if constexpr (std::is_same_v<T, With>) {
                        return make_expr(With{expr(n.layer), expr(n.body)}, e->span);
                    } else if constexpr (std::is_same_v<T, Swap>) {
                        return make_expr(Swap{expr(n.layer), n.swappable, expr(n.body)}, e->span);
                    } else if constexpr (std::is_same_v<T, Proceed>) {
                        return make_expr(Proceed{list(n.args)}, e->span);
                    } else if constexpr (std::is_same_v<T, SuperCall>) {
                        return make_expr(SuperCall{n.method, list(n.args)}, e->span);
                    } else if constexpr (std::is_same_v<T, SuperProceed>) {
                        return make_expr(SuperProceed{list(n.args)}, e->span);
                    } else {
                        return e;
                    }
                },
                e->node);
        }

        ExprList list(const ExprList& es) const {
            ExprList out;
            out.reserve(es.size());
            for (const auto& a : es) out.push_back(expr(a));
            return out;
        }

        void params(std::vector<Param>& ps) const {
            for (auto& p : ps) p.type = type(p.type);
        }
    };

private:
    static Program resolve(std::vector<ClassDecl> classes, std::vector<LayerDecl> layers, Expr main) {
        Resolver r;
        r.layer_names.insert("Base");
        for (const auto& l : layers) r.layer_names.insert(l.name.str());
        for (auto& c : classes) {
            for (auto& f : c.fields) f.type = r.type(f.type);
            for (auto& m : c.methods) {
                m.return_type = r.type(m.return_type);
                r.params(m.params);
                m.body = r.expr(m.body);
            }
        }
        for (auto& l : layers) {
            for (auto& pm : l.partial_methods) {
                pm.return_type = r.type(pm.return_type);
                r.params(pm.params);
                pm.body = r.expr(pm.body);
            }
        }
        return make_program(std::move(classes), std::move(layers), r.expr(main));
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    Ctx ctx_ = Ctx::Main;
};

}  // namespace detail

/// Parses a program and checks the sanity conditions.
/// Throws ParseError on syntax errors and ValidationError on violations.
inline Program parse_program(std::string_view text) {
    Program p = detail::Parser(text).program();
    auto report = validate_tables(p);
    if (!report.ok()) throw ValidationError(std::move(report));
    return p;
}

/// Parses without running the sanity checks.
inline Program parse_program_unvalidated(std::string_view text) { return detail::Parser(text).program(); }

/// Parses a main expression against existing tables (names resolved the same
/// way as in a whole program).
inline Expr parse_main_expr(const Tables& tables, std::string_view text) {
    detail::Parser parser(text);
    Expr raw = parser.standalone_expr();
    detail::Parser::Resolver r;
    r.layer_names.insert("Base");
    for (const auto& l : tables.layers()) r.layer_names.insert(l.name.str());
    return r.expr(raw);
}

}  // namespace cfj
