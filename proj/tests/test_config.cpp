#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "adaptwin/config.hpp"

using namespace adaptwin;
using nlohmann::json;

namespace {

const std::filesystem::path kBridge = std::filesystem::path(ADAPTWIN_SOURCE_DIR) / "configs" / "bridge.json";

json bridge_json() {
    std::ifstream in(kBridge);
    return json::parse(in);
}

}  // namespace

TEST(Config, LoadsBridge) {
    const auto cfg = load_config(kBridge);
    EXPECT_EQ(cfg.space.n_states(), 37u);
    ASSERT_EQ(cfg.n_actions(), 4u);
    EXPECT_EQ(cfg.actions[0].name, "DN");
    EXPECT_EQ(std::get<DirichletParams>(cfg.actions[0].prior), DirichletParams({10, 7, 4}));
    EXPECT_EQ(std::get<DirichletParams>(cfg.actions[1].prior), DirichletParams({10, 5, 2}));
    EXPECT_EQ(std::get<DirichletParams>(cfg.actions[2].prior), DirichletParams({3, 10, 9}));
    EXPECT_EQ(cfg.actions[2].kind, ActionKind::Improve);
    EXPECT_EQ(cfg.actions[3].kind, ActionKind::Reset);
    EXPECT_EQ(cfg.rewards.control, (std::vector<double>{30, 18, -75, -250}));
    EXPECT_EQ(cfg.rewards.health_failure, -250.0);
    EXPECT_EQ(cfg.statistic, Statistic::Mean);
    EXPECT_EQ(cfg.actions[0].perturbation, 1e-6);
    EXPECT_EQ(cfg.horizon, 60u);
    EXPECT_EQ(cfg.forecast_depth, 5u);
    EXPECT_EQ(cfg.runs, 30u);
    EXPECT_EQ(cfg.seeds.size(), 30u);
    EXPECT_NEAR(cfg.confusion.entries()(5, 5), 0.9139, 1e-12);

    const auto& dn = cfg.environment.actions[0];
    EXPECT_EQ(dn.true_alpha, (std::vector<double>{500, 400, 200}));
    EXPECT_DOUBLE_EQ(dn.initiation[0], 0.5);
    EXPECT_DOUBLE_EQ(dn.initiation[3], 0.5 / 6);
    EXPECT_DOUBLE_EQ(cfg.environment.actions[1].initiation[0], 0.75);
    EXPECT_DOUBLE_EQ(cfg.environment.actions[1].initiation[6], 0.25 / 6);
    EXPECT_EQ(cfg.environment.actions[2].true_alpha, (std::vector<double>{1, 100, 300}));
    EXPECT_DOUBLE_EQ(cfg.environment.actions[2].drift_mean, -0.02);
}

TEST(Config, SeedList) {
    auto cfg = load_config(kBridge);
    const auto seeds = cfg.seed_list(32);
    EXPECT_EQ(seeds[0], 101u);
    EXPECT_EQ(seeds[29], 130u);
    EXPECT_EQ(seeds[30], cfg.base_seed + 30);
}

TEST(Config, RejectsInvalid) {
    const auto check = [](auto mutate) {
        json j = bridge_json();
        mutate(j);
        EXPECT_THROW(parse_config(j), ValidationError) << j.dump();
    };
    check([](json& j) { j.erase("rewards"); });
    check([](json& j) { j["horizon"]["T"] = 0; });
    check([](json& j) { j["actions"]["models"][0]["kind"] = "explode"; });
    check([](json& j) { j["actions"]["models"][1]["name"] = "DN"; });
    check([](json& j) { j["actions"]["models"][0]["prior"] = json{{"dirichlet", {10, 7}}}; });
    check([](json& j) { j["actions"]["models"][0]["prior"] = json{{"dirichlet", {10, 0, 4}}}; });
    check([](json& j) { j["state_space"]["interval_bounds"] = {0.3, 0.2}; });
    check([](json& j) { j["state_space"]["n_locations"] = 0; });
    check([](json& j) { j["rewards"]["control"].erase("PR"); });
    check([](json& j) { j["environment"]["actions"].erase("MR"); });
    check([](json& j) { j["environment"]["actions"]["DN"]["initiation"] = {0.5, 0.5}; });
    check([](json& j) { j["observation"]["accuracy"] = 1.5; });
    check([](json& j) { j["observation"]["source"] = "camera"; });
    check([](json& j) { j["experiment"]["mode"] = "greedy"; });
    check([](json& j) { j["experiment"]["runs"] = 0; });
    check([](json& j) { j["horizon"]["T"] = "sixty"; });
}

TEST(Config, FileConfusionResolvesRelativePath) {
    const auto dir = std::filesystem::temp_directory_path() / "adaptwin_cfg_file";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "conf.txt");
        for (int r = 0; r < 37; ++r) {
            for (int c = 0; c < 37; ++c) out << (r == c ? 1 : 0) << ' ';
            out << '\n';
        }
    }
    json j = bridge_json();
    j["observation"] = {{"source", "file"}, {"path", "conf.txt"}};
    const auto cfg = parse_config(j, dir);
    EXPECT_TRUE(cfg.observation_source.from_file);
    EXPECT_TRUE(cfg.confusion.entries().isIdentity(0.0));
    EXPECT_THROW(parse_config(j, dir / "missing"), IoError);
}

TEST(Config, FileErrors) {
    EXPECT_THROW(load_config("/nonexistent/adaptwin.json"), IoError);
    const auto p = std::filesystem::temp_directory_path() / "adaptwin_broken.json";
    std::ofstream(p) << "{ not json";
    EXPECT_THROW(load_config(p), ValidationError);
}

TEST(Config, BetaPrior) {
    json j = bridge_json();
    j["actions"]["models"][1]["max_step"] = 1;
    j["actions"]["models"][1]["prior"] = json{{"beta", {2, 5}}};
    j["environment"]["actions"]["RO"]["true_alpha"] = {3, 1};
    const auto cfg = parse_config(j);
    EXPECT_EQ(std::get<BetaParams>(cfg.actions[1].prior), BetaParams(2, 5));
}
