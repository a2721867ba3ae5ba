#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

namespace {

const std::string kCli = ADAPTWIN_CLI;
const std::string kBridge = std::string(ADAPTWIN_SOURCE_DIR) + "/configs/bridge.json";

int run(const std::string& args) {
    const int status = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Cli, ValidateConfig) {
    EXPECT_EQ(run("validate-config --config " + kBridge), 0);
    EXPECT_EQ(run("validate-config --config /nonexistent/cfg.json"), 2);
    const auto bad = std::filesystem::temp_directory_path() / "adaptwin_cli_bad.json";
    std::ofstream(bad) << "{\"state_space\": {}}";
    EXPECT_EQ(run("validate-config --config " + bad.string()), 1);
}

TEST(Cli, RunWritesOutputs) {
    const auto dir = fresh_dir("adaptwin_cli_run");
    ASSERT_EQ(run("run --config " + kBridge + " --seed 7 --mode static --out " + dir.string()), 0);
    for (const char* f : {"traces.csv", "forecasts.csv", "posteriors.json", "policy.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    }
}

TEST(Cli, ExperimentWritesSummary) {
    const auto dir = fresh_dir("adaptwin_cli_experiment");
    ASSERT_EQ(run("experiment --config " + kBridge + " --runs 2 --out " + dir.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.json"));
}

TEST(Cli, UsageErrors) {
    EXPECT_NE(run(""), 0);
    EXPECT_NE(run("run --config " + kBridge + " --seed 1 --mode greedy --out /tmp/x"), 0);
    EXPECT_NE(run("run --config " + kBridge + " --out /tmp/x"), 0);
}
