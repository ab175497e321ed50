#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfj/ast.hpp"
#include "cfj/parser.hpp"
#include "cfj/render.hpp"
#include "cfj/semantics.hpp"
#include "cfj/typing.hpp"

namespace cfj {

// ---------------------------------------------------------------------------
// Dispatch oracle
//
// Written from the informal description of method lookup, without the lookup
// module: look at the most recently activated layer first, then the earlier
// ones; a layer that has no C.m is asked through its superlayers; if no
// active layer has C.m, use the class's own method; if the class has none,
// start over at the superclass with all active layers again.

struct Resolution {
    ClassName cls;
    std::optional<LayerName> layer;  // empty: the base method of `cls`
    friend bool operator==(const Resolution&, const Resolution&) = default;
};

inline std::string describe(const Resolution& r) {
    return r.layer ? r.layer->str() + "." + r.cls.str() : r.cls.str();
}

inline std::optional<Resolution> resolve_oracle(const Tables& t, const LayerSeq& seq, ClassName c, MethodName m) {
    std::set<ClassName> visited_classes;
    ClassName cls = c;
    while (visited_classes.insert(cls).second) {
        const ClassDecl* cd = t.find_class(cls);
        if (!cd) return std::nullopt;
        const auto& active = seq.items();
        for (auto it = active.rbegin(); it != active.rend(); ++it) {
            std::set<LayerName> visited_layers;
            LayerName l = *it;
            while (visited_layers.insert(l).second) {
                const LayerDecl* ld = t.find_layer(l);
                if (!ld) break;
                for (const auto& pm : ld->partial_methods)
                    if (pm.target_class == cls && pm.name == m) return Resolution{cls, l};
                l = ld->superlayer;
            }
        }
        for (const auto& md : cd->methods)
            if (md.name == m) return Resolution{cls, std::nullopt};
        cls = cd->superclass;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Soundness checking along a trace

struct StepRecord {
    std::size_t index = 0;
    std::string rule;
    std::string pre_type;
    std::string post_type;
    bool subtype_ok = true;
    std::string message;  // set on failure
};

struct SoundnessReport {
    std::string id;
    enum class Verdict { Pass, Fail, Rejected };
    Verdict verdict = Verdict::Pass;
    std::string static_type;
    std::size_t steps = 0;
    std::string outcome;  // "value", "stuck", "fuel"
    std::string final_expr;
    std::vector<StepRecord> records;
    std::vector<std::string> violations;
    std::optional<std::size_t> failing_step;
    std::size_t dispatch_checks = 0;
    std::vector<TypeError> type_errors;  // when rejected

    [[nodiscard]] bool passed() const { return verdict == Verdict::Pass; }
};

inline const char* verdict_name(SoundnessReport::Verdict v) {
    switch (v) {
        case SoundnessReport::Verdict::Pass: return "pass";
        case SoundnessReport::Verdict::Fail: return "fail";
        case SoundnessReport::Verdict::Rejected: return "rejected";
    }
    return "?";
}

struct SoundnessOptions {
    std::size_t max_steps = default_max_steps;
    bool typecheck = true;       // reject ill-typed programs up front
    bool check_dispatch = true;  // compare fresh dispatches with the oracle
    bool keep_records = true;
    bool tables_checked = false;  // caller already ran check_tables; type only main
};

/// Evaluates main, re-typing the whole expression after every step
/// (subject reduction), requiring that no stuck state is reached (progress)
/// and that the final value's type is a subtype of the static type.
inline SoundnessReport run_soundness(const Program& p, const SoundnessOptions& opt = {}, std::string id = {}) {
    SoundnessReport rep;
    rep.id = std::move(id);
    const Tables& t = p.t();
    std::optional<Type> static_type;
    if (opt.typecheck && opt.tables_checked) {
        try {
            static_type = TypeChecker(t).type_expr(TopLevel{}, {}, {}, p.main);
            rep.static_type = static_type->str();
        } catch (const TypeError& e) {
            rep.verdict = SoundnessReport::Verdict::Rejected;
            rep.type_errors.push_back(e);
            return rep;
        }
    } else if (opt.typecheck) {
        auto chk = check_program(p);
        if (!chk.ok()) {
            rep.verdict = SoundnessReport::Verdict::Rejected;
            rep.type_errors = std::move(chk.errors);
            return rep;
        }
        static_type = chk.type;
        rep.static_type = static_type->str();
    }

    TypeChecker tc(t);
    const ActivationLedger* ledger = nullptr;
    tc.set_witness_provider([&](const LayerSeq& s) { return ledger ? ledger->find(s) : nullptr; });
    std::optional<Type> pre = static_type;

    auto violate = [&](std::size_t step, const std::string& msg) {
        rep.violations.push_back("step " + std::to_string(step) + ": " + msg);
        if (!rep.failing_step) rep.failing_step = step;
    };

    auto observer = [&](const TraceEntry& entry, const Expr&, const ActivationLedger& l) {
        ledger = &l;
        StepRecord rec;
        rec.index = entry.index;
        rec.rule = rule_name(entry.rule());
        if (pre) rec.pre_type = pre->str();
        if (opt.check_dispatch && entry.dispatch) {
            const auto& d = *entry.dispatch;
            if (const auto* k = std::get_if<TripleCursor>(&d.cursor); k && k->prefix == k->full) {
                ++rep.dispatch_checks;
                auto expected = resolve_oracle(t, k->full, k->target, d.method);
                Resolution got{d.found_class, d.defining_layer};
                if (!expected || !(*expected == got))
                    violate(entry.index, "dispatch of " + k->target.str() + "." + d.method.str() + " under " +
                                             render(k->full) + " found " + describe(got) + " but the oracle says " +
                                             (expected ? describe(*expected) : std::string("undefined")));
            }
        }
        if (opt.typecheck) {
            try {
                Type post = tc.type_expr(TopLevel{}, {}, {}, entry.expr_after);
                rec.post_type = post.str();
                if (pre && !subtype(t, post, *pre)) {
                    rec.subtype_ok = false;
                    rec.message = post.str() + " is not a subtype of " + pre->str();
                    violate(entry.index, "subject reduction: " + rec.message);
                }
                pre = post;
            } catch (const TypeError& e) {
                rec.subtype_ok = false;
                rec.message = "[" + e.rule + "] " + e.what();
                violate(entry.index, "subject reduction: post-step expression is ill typed: " + rec.message);
            }
        }
        if (opt.keep_records) rep.records.push_back(std::move(rec));
    };
    EvalResult result = eval(t, p.main, opt.max_steps, observer);

    rep.steps = result.steps;
    rep.final_expr = render(result.final_expr);
    switch (result.kind) {
        case EvalResult::Kind::Value: {
            rep.outcome = "value";
            if (static_type) {
                try {
                    Type vt = tc.type_expr(TopLevel{}, {}, {}, result.final_expr);
                    if (!subtype(t, vt, *static_type))
                        violate(result.steps, "type soundness: value of type " + vt.str() +
                                                  " is not a subtype of " + static_type->str());
                } catch (const TypeError& e) {
                    violate(result.steps, std::string("type soundness: final value is ill typed: ") + e.what());
                }
            }
            break;
        }
        case EvalResult::Kind::Stuck:
            rep.outcome = "stuck";
            violate(result.steps + 1, "progress: stuck under " + render_active(result.stuck_active) + ": " +
                                          result.stuck_reason + " at " + rep.final_expr);
            break;
        case EvalResult::Kind::OutOfFuel:
            rep.outcome = "fuel";
            break;
    }
    rep.verdict = rep.violations.empty() ? SoundnessReport::Verdict::Pass : SoundnessReport::Verdict::Fail;
    return rep;
}

// ---------------------------------------------------------------------------
// Enumeration

/// All main expressions of exactly the given depth over the tables' names.
///
/// Depth 1: `new C()` for every field-free class in the table and `new L()`
/// for every layer. Depth d wraps each depth d-1 expression in one of
/// `new C(e)` (one-field classes), `e.m()` (methods with no parameters),
/// `e.f`, `with new L() { e }`, `swap (new L(), Lsw) { e }` (Lsw swappable).
class Enumerator {
public:
    explicit Enumerator(const Tables& t) {
        for (const auto& c : t.classes()) {
            const auto fs = fields(t, c.name);
            if (fs.empty()) leaves_.push_back(make_expr(NewClass{c.name, {}}));
            if (fs.size() == 1) unary_classes_.push_back(c.name);
            for (const auto& f : c.fields) field_names_.insert(f.name);
            for (const auto& m : c.methods)
                if (m.params.empty()) nullary_methods_.insert(m.name);
        }
        for (const auto& l : t.layers()) {
            leaves_.push_back(make_expr(NewLayer{l.name}));
            layers_.push_back(l.name);
            if (l.swappable) swappables_.push_back(l.name);
            for (const auto& pm : l.partial_methods)
                if (pm.params.empty()) nullary_methods_.insert(pm.name);
        }
    }

    [[nodiscard]] std::size_t leaf_count() const { return leaves_.size(); }
    [[nodiscard]] std::size_t wrapper_count() const {
        return unary_classes_.size() + nullary_methods_.size() + field_names_.size() + layers_.size() +
               layers_.size() * swappables_.size();
    }

    std::vector<Expr> exactly(std::size_t depth) const {
        if (depth == 0) return {};
        std::vector<Expr> cur = leaves_;
        for (std::size_t d = 1; d < depth; ++d) {
            std::vector<Expr> next;
            next.reserve(cur.size() * wrapper_count());
            for (const auto& e : cur) {
                for (ClassName c : unary_classes_) next.push_back(make_expr(NewClass{c, {e}}));
                for (MethodName m : nullary_methods_) next.push_back(make_expr(Invoke{e, m, {}}));
                for (FieldName f : field_names_) next.push_back(make_expr(FieldGet{e, f}));
                for (LayerName l : layers_) next.push_back(make_expr(With{make_expr(NewLayer{l}), e}));
                for (LayerName l : layers_)
                    for (LayerName sw : swappables_) next.push_back(make_expr(Swap{make_expr(NewLayer{l}), sw, e}));
            }
            cur = std::move(next);
        }
        return cur;
    }

    /// Every expression of depth 1..max_depth, shallowest first.
    std::vector<Expr> up_to(std::size_t max_depth) const {
        if (max_depth > 5) throw std::invalid_argument("enumeration depth is limited to 5");
        std::vector<Expr> out;
        for (std::size_t d = 1; d <= max_depth; ++d) {
            auto layer = exactly(d);
            out.insert(out.end(), layer.begin(), layer.end());
        }
        return out;
    }

private:
    std::vector<Expr> leaves_;
    std::vector<ClassName> unary_classes_;
    std::set<MethodName> nullary_methods_;
    std::set<FieldName> field_names_;
    std::vector<LayerName> layers_;
    std::vector<LayerName> swappables_;
};

inline std::vector<Program> enumerate_programs(const Program& tables, std::size_t depth) {
    std::vector<Program> out;
    for (auto& e : Enumerator(tables.t()).up_to(depth)) out.push_back(tables.with_main(std::move(e)));
    return out;
}

struct DifferentialSummary {
    std::size_t candidates = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t values = 0;
    std::size_t out_of_fuel = 0;
    std::size_t dispatch_checks = 0;
    std::vector<SoundnessReport> failures;

    [[nodiscard]] std::size_t violations() const { return failures.size(); }
};

using CandidateSink = std::function<void(const SoundnessReport&)>;

/// Checks every enumerated candidate: accepted ones must pass run_soundness,
/// including oracle agreement on every fresh dispatch. `sink` sees every
/// candidate's report in enumeration order.
inline DifferentialSummary run_differential(const Program& tables, std::size_t depth, std::size_t max_steps,
                                            const std::string& id_prefix = "candidate",
                                            const CandidateSink& sink = {}) {
    DifferentialSummary s;
    SoundnessOptions opt;
    opt.max_steps = max_steps;
    opt.keep_records = false;
    opt.tables_checked = true;
    const bool tables_ok = check_tables(tables.t()).empty();
    const auto mains = Enumerator(tables.t()).up_to(depth);
    for (std::size_t i = 0; i < mains.size(); ++i) {
        ++s.candidates;
        const std::string id = id_prefix + "#" + std::to_string(i + 1);
        if (!tables_ok) {
            ++s.rejected;
            if (sink) {
                SoundnessReport rep;
                rep.id = id;
                rep.verdict = SoundnessReport::Verdict::Rejected;
                sink(rep);
            }
            continue;
        }
        auto rep = run_soundness(tables.with_main(mains[i]), opt, id);
        if (sink) sink(rep);
        if (rep.verdict == SoundnessReport::Verdict::Rejected) {
            ++s.rejected;
            continue;
        }
        ++s.accepted;
        s.dispatch_checks += rep.dispatch_checks;
        if (rep.outcome == "value") ++s.values;
        if (rep.outcome == "fuel") ++s.out_of_fuel;
        if (!rep.passed()) {
            rep.final_expr = render(mains[i]) + "  =>  " + rep.final_expr;
            s.failures.push_back(std::move(rep));
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Fixtures

/// A `.cfj` file plus the expectations in its header comments:
///   // @expect accept <Type>
///   // @result <value>
///   // @reject <RULE> [<premise>]
///   // @stuck <max steps>        (evaluating without typechecking gets stuck)
struct Fixture {
    std::string id;
    std::filesystem::path path;
    std::string source;
    std::optional<std::string> accept_type;
    std::optional<std::string> result;
    std::optional<std::string> reject_rule;
    std::optional<std::string> reject_premise;
    std::optional<std::size_t> stuck_within;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Fixture load_fixture(const std::filesystem::path& path) {
    Fixture f;
    f.path = path;
    f.id = path.stem().string();
    f.source = read_file(path);
    std::istringstream lines(f.source);
    std::string line;
    while (std::getline(lines, line)) {
        const auto at = line.find("// @");
        if (at == std::string::npos) continue;
        std::istringstream words(line.substr(at + 4));
        std::string key;
        words >> key;
        std::string rest;
        std::getline(words, rest);
        rest.erase(0, rest.find_first_not_of(' '));
        while (!rest.empty() && (rest.back() == ' ' || rest.back() == '\r')) rest.pop_back();
        if (key == "expect") {
            std::istringstream r(rest);
            std::string kind, type;
            r >> kind >> type;
            if (kind == "accept") f.accept_type = type;
        } else if (key == "result") {
            f.result = rest;
        } else if (key == "reject") {
            std::istringstream r(rest);
            std::string rule, premise;
            r >> rule >> premise;
            f.reject_rule = rule;
            if (!premise.empty()) f.reject_premise = premise;
        } else if (key == "stuck") {
            f.stuck_within = std::stoul(rest);
        }
    }
    return f;
}

/// All `.cfj` files directly inside `dir`, sorted by file name.
inline std::vector<Fixture> load_fixtures(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cfj") paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    std::vector<Fixture> out;
    for (const auto& p : paths) out.push_back(load_fixture(p));
    return out;
}

}  // namespace cfj
