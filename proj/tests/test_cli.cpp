#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "support.hpp"

using namespace cfj;
using namespace cfj::test;

namespace {

struct Run {
    int code = -1;
    std::string out;  // stdout only
    std::string err;
};

Run run(const std::string& args, const std::string& bin = CFJ_BIN, const std::string& env = {}) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto out_path = dir / ("cfj_cli_out_" + std::to_string(::getpid()));
    const auto err_path = dir / ("cfj_cli_err_" + std::to_string(::getpid()));
    const std::string cmd = env + " '" + bin + "' " + args + " >'" + out_path.string() + "' 2>'" + err_path.string() + "'";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    std::filesystem::remove(out_path);
    std::filesystem::remove(err_path);
    return r;
}

std::string fx(const std::string& id) { return "'" + (fixture_dir() / (id + ".cfj")).string() + "'"; }

}  // namespace

TEST(Cli, CheckPrintsType) {
    auto r = run("check " + fx("game"));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "Text\n");
}

TEST(Cli, CheckReportsRuleAndPosition) {
    auto r = run("check " + fx("cex_requires"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("cex_requires.cfj:12:1: [T-LayerSW requires-equality]"), std::string::npos) << r.err;
}

TEST(Cli, MalformedInputsExitTwo) {
    for (const auto& entry : std::filesystem::directory_iterator(data_dir())) {
        auto r = run("check '" + entry.path().string() + "'");
        EXPECT_EQ(r.code, 2) << entry.path().filename();
        EXPECT_FALSE(r.err.empty());
    }
    EXPECT_EQ(run("check /nonexistent/file.cfj").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("run").code, 2);
}

TEST(Cli, ParseErrorsCarryPositions) {
    auto r = run("check '" + (data_dir() / "missing_semicolon.cfj").string() + "'");
    EXPECT_NE(r.err.find("[parse]"), std::string::npos) << r.err;
}

TEST(Cli, RunPrintsValue) {
    auto r = run("run " + fx("object"));
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "new Object()\n");
}

TEST(Cli, TraceMatchesGolden) {
    for (const char* id : {"lookup1", "lookup2", "game"}) {
        auto r = run(std::string("run --trace ") + fx(id));
        EXPECT_EQ(r.code, 0) << id;
        EXPECT_EQ(r.out, golden(std::string(id) + ".trace")) << id;
    }
}

TEST(Cli, UncheckedCounterexampleIsStuck) {
    auto r = run("run --unchecked " + fx("cex_requires"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("stuck"), std::string::npos);
    auto trace = run("run --unchecked --trace " + fx("cex_requires"));
    EXPECT_EQ(trace.out, golden("cex_requires.unchecked.trace"));
    // Without --unchecked the program is rejected before it runs.
    EXPECT_EQ(run("run " + fx("cex_requires")).code, 1);
}

TEST(Cli, FuelExhaustion) {
    EXPECT_EQ(run("run --max-steps 4 " + fx("lookup2")).code, 4);
    EXPECT_EQ(run("run " + fx("lookup2"), CFJ_BIN, "CFJ_MAX_STEPS=4").code, 4);
    EXPECT_EQ(run("run " + fx("lookup2"), CFJ_BIN, "CFJ_MAX_STEPS=1000").code, 0);
}

TEST(Cli, SoundnessSuite) {
    auto r = run("soundness --suite '" + fixture_dir().string() + "'");
    EXPECT_EQ(r.code, 0) << r.out << r.err;
    EXPECT_NE(r.out.find("44 programs: 23 passed, 21 rejected, 0 violations"), std::string::npos) << r.out;
}

TEST(Cli, MutantIsCaught) {
    auto r = run("soundness --suite '" + fixture_dir().string() + "'", CFJ_MUTANT_BIN);
    EXPECT_EQ(r.code, 5);
    EXPECT_EQ(r.out.find(" 0 violations"), std::string::npos);
}

TEST(Cli, EmptySuite) {
    const auto dir = std::filesystem::temp_directory_path() / ("cfj_empty_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    auto r = run("soundness --suite '" + dir.string() + "'");
    std::filesystem::remove_all(dir);
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("0 programs"), std::string::npos);
}

TEST(Cli, JsonlReport) {
    const auto report = std::filesystem::temp_directory_path() / ("cfj_report_" + std::to_string(::getpid()));
    auto r = run("soundness " + fx("lookup1") + " --depth 2 --report '" + report.string() + "'");
    EXPECT_EQ(r.code, 0);
    std::ifstream in(report);
    std::string line;
    std::vector<nlohmann::json> rows;
    while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
    std::filesystem::remove(report);
    // The program itself plus 30 candidates of depth <= 2.
    ASSERT_EQ(rows.size(), 31u);
    EXPECT_EQ(rows[0]["id"], "lookup1");
    EXPECT_EQ(rows[0]["verdict"], "pass");
    EXPECT_EQ(rows[0]["steps"], 4);
    EXPECT_EQ(rows[1]["id"], "lookup1#1");
    for (const auto& row : rows) {
        EXPECT_TRUE(row.contains("outcome"));
        EXPECT_TRUE(row.contains("failing_step"));
    }
}

TEST(Cli, DepthOutOfRange) {
    EXPECT_EQ(run("soundness " + fx("lookup1") + " --depth 6").code, 2);
}
