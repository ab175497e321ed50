// cfj: check, run and soundness-test ContextFJ programs.
//
// Exit codes:
//   0  accepted / evaluated to a value / no soundness violations
//   1  type error
//   2  parse or validation error, unreadable input, bad usage
//   3  evaluation got stuck
//   4  evaluation ran out of fuel
//   5  soundness violation

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfj/cfj.hpp"

namespace fs = std::filesystem;
using namespace cfj;

namespace {

enum Exit { Ok = 0, TypeErr = 1, InputErr = 2, Stuck = 3, Fuel = 4, Violation = 5 };

std::string where(const std::string& file, const SourceSpan& s) {
    if (!s.known()) return file + ": ";
    return file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column) + ": ";
}

void report_type_errors(const std::string& file, const std::vector<TypeError>& errors) {
    for (const auto& e : errors) {
        std::cerr << where(file, e.span) << "[" << e.rule;
        if (!e.premise.empty()) std::cerr << " " << e.premise;
        std::cerr << "] " << e.what() << "\n";
        for (const auto& r : e.related) std::cerr << "  note: " << r << "\n";
    }
}

// Parses and validates; on failure prints diagnostics and returns nullopt.
std::optional<Program> load(const std::string& file) {
    std::string text;
    try {
        text = read_file(file);
    } catch (const std::exception& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return std::nullopt;
    }
    try {
        return parse_program(text);
    } catch (const ParseError& e) {
        std::cerr << where(file, e.span()) << "[parse] " << e.what() << "\n";
    } catch (const ValidationError& e) {
        for (const auto& v : e.report().violations)
            std::cerr << where(file, v.span) << "[sanity " << v.condition << "] " << v.message << "\n";
    }
    return std::nullopt;
}

int cmd_check(const std::string& file) {
    auto p = load(file);
    if (!p) return InputErr;
    auto r = check_program(*p);
    if (!r.ok()) {
        report_type_errors(file, r.errors);
        return TypeErr;
    }
    std::cout << r.type->str() << "\n";
    return Ok;
}

int cmd_run(const std::string& file, bool trace, std::size_t max_steps, bool unchecked) {
    auto p = load(file);
    if (!p) return InputErr;
    if (!unchecked) {
        auto r = check_program(*p);
        if (!r.ok()) {
            report_type_errors(file, r.errors);
            return TypeErr;
        }
    }
    EvalResult res = eval(p->t(), p->main, max_steps);
    if (trace) write_trace(std::cout, res.trace);
    std::cout << render(res.final_expr) << "\n";
    switch (res.kind) {
        case EvalResult::Kind::Value: return Ok;
        case EvalResult::Kind::Stuck:
            std::cerr << file << ": stuck after " << res.steps << " steps under " << render_active(res.stuck_active)
                      << ": " << res.stuck_reason << "\n";
            return Stuck;
        case EvalResult::Kind::OutOfFuel:
            std::cerr << file << ": out of fuel after " << res.steps << " steps\n";
            return Fuel;
    }
    return Ok;
}

nlohmann::json to_json(const SoundnessReport& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["verdict"] = verdict_name(r.verdict);
    j["steps"] = r.steps;
    j["failing_step"] = r.failing_step ? nlohmann::json(*r.failing_step) : nlohmann::json(nullptr);
    j["outcome"] = r.outcome.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.outcome);
    j["violations"] = r.violations;
    return j;
}

int cmd_soundness(const std::string& path, const std::string& suite, std::size_t max_steps,
                  std::optional<std::size_t> depth, const std::string& report_file) {
    std::vector<fs::path> files;
    if (!suite.empty()) {
        if (!fs::is_directory(suite)) {
            std::cerr << suite << ": not a directory\n";
            return InputErr;
        }
        for (const auto& f : load_fixtures(suite)) files.push_back(f.path);
    } else {
        files.push_back(path);
    }

    std::ofstream report;
    if (!report_file.empty()) {
        report.open(report_file);
        if (!report) {
            std::cerr << report_file << ": cannot open for writing\n";
            return InputErr;
        }
    }
    auto emit = [&](const SoundnessReport& r) {
        if (report) report << to_json(r).dump() << "\n";
    };

    std::size_t passed = 0, rejected = 0, failed = 0;
    bool bad_input = false;
    SoundnessOptions opt;
    opt.max_steps = max_steps;
    opt.keep_records = false;
    for (const auto& file : files) {
        const std::string id = file.stem().string();
        auto p = load(file.string());
        if (!p) {
            bad_input = true;
            continue;
        }
        auto rep = run_soundness(*p, opt, id);
        emit(rep);
        switch (rep.verdict) {
            case SoundnessReport::Verdict::Pass:
                ++passed;
                std::cout << id << ": pass, " << rep.steps << " steps, " << rep.outcome << ", type "
                          << rep.static_type << "\n";
                break;
            case SoundnessReport::Verdict::Rejected:
                ++rejected;
                std::cout << id << ": rejected [" << rep.type_errors.front().rule << "]\n";
                break;
            case SoundnessReport::Verdict::Fail:
                ++failed;
                std::cout << id << ": FAIL\n";
                for (const auto& v : rep.violations) std::cout << "  " << v << "\n";
                break;
        }
        if (depth) {
            auto s = run_differential(*p, *depth, max_steps, id, emit);
            std::cout << id << ": depth " << *depth << ", " << s.candidates << " candidates, " << s.accepted
                      << " accepted, " << s.rejected << " rejected, " << s.dispatch_checks << " dispatch checks, "
                      << s.violations() << " violations\n";
            for (const auto& f : s.failures) {
                std::cout << "  " << f.id << ": " << f.final_expr << "\n";
                for (const auto& v : f.violations) std::cout << "    " << v << "\n";
            }
            failed += s.violations();
        }
    }
    std::cout << files.size() << " programs: " << passed << " passed, " << rejected << " rejected, " << failed
              << " violations\n";
    if (failed) return Violation;
    return bad_input ? InputErr : Ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ContextFJ checker, evaluator and soundness harness"};
    app.require_subcommand(1);

    std::string file;
    bool trace = false, unchecked = false;
    std::size_t max_steps = env_max_steps();
    std::optional<std::size_t> depth;
    std::string suite, report_file;

    auto* check = app.add_subcommand("check", "typecheck a program and print the type of main");
    check->add_option("file", file, "program file")->required();

    auto* run = app.add_subcommand("run", "evaluate main and print the result");
    run->add_option("file", file, "program file")->required();
    run->add_flag("--trace", trace, "print one line per reduction step");
    run->add_option("--max-steps", max_steps, "fuel (default 10000, or CFJ_MAX_STEPS)");
    run->add_flag("--unchecked", unchecked, "skip typechecking");

    auto* snd = app.add_subcommand("soundness", "check subject reduction and progress along the trace");
    auto* file_opt = snd->add_option("file", file, "program file");
    auto* suite_opt = snd->add_option("--suite", suite, "directory of .cfj files");
    file_opt->excludes(suite_opt);
    snd->add_option("--max-steps", max_steps, "fuel per program");
    snd->add_option("--depth", depth, "also check every main up to this depth over each program's tables")
        ->check(CLI::Range(1, 5));
    snd->add_option("--report", report_file, "write one JSON record per program or candidate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Ok : InputErr;
    }

    try {
        if (*check) return cmd_check(file);
        if (*run) return cmd_run(file, trace, max_steps, unchecked);
        if (file.empty() && suite.empty()) {
            std::cerr << "soundness: give a file or --suite DIR\n";
            return InputErr;
        }
        return cmd_soundness(file, suite, max_steps, depth, report_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return InputErr;
    }
}
