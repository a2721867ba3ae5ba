#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adaptwin/adaptwin.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalid = 1, kIo = 2, kRuntime = 3 };

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kOk;
    } catch (const adaptwin::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kInvalid;
    } catch (const adaptwin::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive digital-twin maintenance simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 1;
    std::string mode_name = "adaptive";
    std::size_t runs = 0;
    std::size_t threads = 0;

    auto* run = app.add_subcommand("run", "Simulate one episode");
    run->add_option("--config", config_path, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Random seed")->required();
    run->add_option("--mode", mode_name, "adaptive or static")->check(CLI::IsMember({"adaptive", "static"}));
    run->add_option("--out", out_dir, "Output directory")->required();

    auto* experiment = app.add_subcommand("experiment", "Run seeded episodes for every configured mode");
    experiment->add_option("--config", config_path, "Experiment configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    experiment->add_option("--runs", runs, "Episodes per mode (default: from config)");
    experiment->add_option("--threads", threads, "Worker threads (default: from config)");
    experiment->add_option("--out", out_dir, "Output directory")->required();

    auto* validate = app.add_subcommand("validate-config", "Check a configuration file");
    validate->add_option("--config", config_path, "Experiment configuration (JSON)")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return guarded([&] {
            const auto cfg = adaptwin::load_config(config_path);
            const auto trace = adaptwin::run_episode(cfg, seed, adaptwin::parse_mode(mode_name));
            const std::filesystem::path dir(out_dir);
            adaptwin::emit_outputs(dir, cfg, {trace});
            adaptwin::write_policy_csv(dir / "policy.csv", cfg, trace.final_policy);
            std::cout << "seed " << seed << " mode " << mode_name << " cumulative_reward " << trace.cumulative_reward
                      << " failed " << (trace.failed ? "yes" : "no") << '\n';
        });
    }
    if (experiment->parsed()) {
        return guarded([&] {
            auto cfg = adaptwin::load_config(config_path);
            if (threads) cfg.threads = threads;
            const auto result = adaptwin::run_experiment(cfg, runs);
            std::vector<adaptwin::EpisodeTrace> all;
            for (const auto& per_mode : result.traces) all.insert(all.end(), per_mode.begin(), per_mode.end());
            adaptwin::emit_outputs(out_dir, cfg, all, result.summary);
            bool any_error = false;
            for (const auto& m : result.summary.modes) {
                std::cout << adaptwin::to_string(m.mode) << ": runs " << m.runs << " final_mean "
                          << (m.mean_cumulative.empty() ? 0.0 : m.mean_cumulative.back()) << " final_std "
                          << (m.std_cumulative.empty() ? 0.0 : m.std_cumulative.back()) << " failure_rate "
                          << m.failure_rate << '\n';
                for (const auto& [s, what] : m.errors) {
                    std::cerr << adaptwin::to_string(m.mode) << " seed " << s << ": " << what << '\n';
                    any_error = true;
                }
            }
            if (any_error) throw std::runtime_error("some episodes failed");
        });
    }
    return guarded([&] {
        const auto cfg = adaptwin::load_config(config_path);
        std::cout << "ok: " << cfg.space.n_states() << " states, " << cfg.n_actions() << " actions, T=" << cfg.horizon
                  << '\n';
    });
}
