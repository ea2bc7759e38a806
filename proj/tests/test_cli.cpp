#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "mmw/experiment.hpp"

using namespace mmw;
namespace fs = std::filesystem;

namespace {

const std::string kSmall =
    " --override n_phi=16 --override n_energy=8 --override n_time=20 --override n_power=6";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("mmw_cli_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(p);
    return p;
}

int run(const std::string& args) {
    const std::string cmd = std::string(MMW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

bool has_hash_line(const fs::path& f) {
    const auto text = read_text_file(f);
    return text.rfind("# scenario=", 0) == 0;
}

}  // namespace

TEST(Csv, RoundTrip) {
    CsvTable t{"abc123", {"x", "y"}, {}};
    t.add({0.1, -2.5e-13});
    t.add({1.0 / 3.0, 7.0});
    const auto back = parse_csv(to_csv(t));
    EXPECT_EQ(back.scenario, "abc123");
    EXPECT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows.size(), 2u);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(back.rows[r][c], t.rows[r][c]);
}

TEST(Csv, HeaderOnlyTable) {
    CsvTable t{"h", {"a", "b", "c"}, {}};
    const auto back = parse_csv(to_csv(t));
    EXPECT_EQ(back.columns.size(), 3u);
    EXPECT_TRUE(back.rows.empty());
}

TEST(Csv, RejectsRaggedRowsAndJunk) {
    CsvTable t{"h", {"a", "b"}, {}};
    EXPECT_THROW(t.add({1.0}), std::invalid_argument);
    EXPECT_THROW(parse_csv("a,b\n1,2,3\n"), std::runtime_error);
    EXPECT_THROW(parse_csv("a,b\n1,zz\n"), std::runtime_error);
}

TEST(OutputGuard, RemovesFilesUnlessCommitted) {
    const auto dir = scratch("guard");
    {
        detail::OutputGuard g(dir);
        write_text_file(g.file("a.csv"), "x\n");
        EXPECT_TRUE(fs::exists(dir / "a.csv"));
    }
    EXPECT_FALSE(fs::exists(dir));
    {
        detail::OutputGuard g(dir);
        write_text_file(g.file("a.csv"), "x\n");
        g.commit();
    }
    EXPECT_TRUE(fs::exists(dir / "a.csv"));
    fs::remove_all(dir);
}

TEST(RunExperiment, BadOverrideIsConfigError) {
    RunOptions opt;
    opt.out_dir = scratch("badov");
    opt.overrides = {"n_phi=2"};
    std::ostringstream log, err;
    EXPECT_EQ(run_experiment(opt, log, err), kExitConfig);
    EXPECT_NE(err.str().find("n_phi"), std::string::npos);
    EXPECT_FALSE(fs::exists(opt.out_dir));
}

TEST(RunExperiment, OutputPathThatIsAFileFails) {
    const auto f = scratch("plainfile");
    write_text_file(f, "occupied\n");
    RunOptions opt;
    opt.command = Command::tables;
    opt.out_dir = f;
    std::ostringstream log, err;
    EXPECT_EQ(run_experiment(opt, log, err), kExitRuntime);
    EXPECT_EQ(read_text_file(f), "occupied\n");
    fs::remove(f);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("codes");
    EXPECT_EQ(run("solve --config /nonexistent/x.ini --out " + dir.string()), kExitConfig);
    EXPECT_EQ(run("solve --override no_such_key=1 --out " + dir.string()), kExitConfig);
    EXPECT_EQ(run("solve --override lambda_u=abc --out " + dir.string()), kExitConfig);
    EXPECT_EQ(run("frobnicate"), kExitConfig);
    EXPECT_EQ(run("solve --bogus"), kExitConfig);
    EXPECT_FALSE(fs::exists(dir));

    const auto bad = scratch("bad.ini");
    write_text_file(bad, "[network]\nlambda_b = 0.01\nlambda_b = 0.02\n");
    EXPECT_EQ(run("tables --config " + bad.string() + " --out " + dir.string()), kExitConfig);
    EXPECT_FALSE(fs::exists(dir));
    fs::remove(bad);
}

TEST(Cli, TablesWithShippedConfig) {
    const auto dir = scratch("tables");
    ASSERT_EQ(run("tables --config " + std::string(MMW_CONFIG_DIR) + "/default.ini --out " + dir.string()), kExitOk);
    for (const char* f : {"geometry.csv", "association.csv", "kernel.csv", "scenario.ini"}) {
        ASSERT_TRUE(fs::exists(dir / f)) << f;
        EXPECT_TRUE(has_hash_line(dir / f)) << f;
    }
    const auto assoc = read_csv(dir / "association.csv");
    EXPECT_EQ(assoc.scenario, scenario_hash_hex(default_scenario()));
    for (const auto& row : assoc.rows) EXPECT_NEAR(row[1] + row[2], 1.0, 1e-12);
    fs::remove_all(dir);
}

TEST(Cli, ScenarioEchoReparsesToSameHash) {
    const auto dir = scratch("echo");
    ASSERT_EQ(run("tables --override lambda_b=0.02 --out " + dir.string()), kExitOk);
    const auto text = read_text_file(dir / "scenario.ini");
    const Scenario s = parse_scenario(text);
    EXPECT_EQ(s.lambda_b, 0.02);
    EXPECT_NE(text.find(scenario_hash_hex(s)), std::string::npos);
    fs::remove_all(dir);
}

TEST(Cli, SolveIsDeterministicOnReducedGrid) {
    const auto a = scratch("solve_a"), b = scratch("solve_b");
    ASSERT_EQ(run("solve --seed 5" + kSmall + " --out " + a.string()), kExitOk);
    ASSERT_EQ(run("solve --seed 5" + kSmall + " --out " + b.string()), kExitOk);
    for (const char* f : {"policy.csv", "utility.csv", "meanfield.csv", "average.csv", "scenario.ini"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_TRUE(has_hash_line(a / f)) << f;
        EXPECT_EQ(read_text_file(a / f), read_text_file(b / f)) << f;
    }
    EXPECT_TRUE(fs::exists(a / "diagnostics.json"));
    const auto pol = read_csv(a / "policy.csv");
    EXPECT_EQ(pol.rows.size(), 20u * 16u * 8u);
    for (const auto& row : pol.rows) {
        EXPECT_GE(row[3], 0.0);
        EXPECT_GE(row[4], 0.0);
    }
    EXPECT_EQ(read_csv(a / "meanfield.csv").rows.size(), 21u * 16u * 8u);
    EXPECT_EQ(read_csv(a / "average.csv").rows.size(), 20u);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Cli, ValidateWritesChecks) {
    const auto dir = scratch("validate");
    const int code = run("validate --samples 2000 --seed 3 --out " + dir.string());
    EXPECT_TRUE(code == kExitOk || code == kExitRuntime) << code;
    ASSERT_TRUE(fs::exists(dir / "checks.csv"));
    EXPECT_TRUE(has_hash_line(dir / "checks.csv"));
    EXPECT_TRUE(has_hash_line(dir / "curves.csv"));
    fs::remove_all(dir);
}
