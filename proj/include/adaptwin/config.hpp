#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adaptwin/environment.hpp"
#include "adaptwin/error.hpp"
#include "adaptwin/observation.hpp"
#include "adaptwin/planner.hpp"
#include "adaptwin/state_space.hpp"
#include "adaptwin/transition_model.hpp"

namespace adaptwin {

enum class Mode { Adaptive, Static };

inline std::string to_string(Mode m) { return m == Mode::Adaptive ? "adaptive" : "static"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "adaptive") return Mode::Adaptive;
    if (s == "static") return Mode::Static;
    throw ValidationError("unknown mode '" + s + "' (expected adaptive or static)");
}

struct ObservationSource {
    bool from_file = false;
    std::string path;
    double accuracy = 1.0;
    double adjacent_mass = 0.0;
};

struct ExperimentConfig {
    StateSpace space{1, {0.0, 1.0}};
    std::vector<ActionModel> actions;
    Statistic statistic = Statistic::Mean;
    RewardConfig rewards;
    EnvModel environment;
    GroundTruth initial_truth;
    ObservationSource observation_source;
    ConfusionMatrix confusion;

    std::size_t horizon = 60;
    std::size_t forecast_depth = 5;
    std::vector<std::size_t> forecast_checkpoints;
    std::size_t recompute_every = 1;

    Mode mode = Mode::Adaptive;
    std::vector<Mode> modes{Mode::Adaptive, Mode::Static};
    std::vector<std::uint64_t> seeds;
    std::size_t runs = 1;
    std::uint64_t base_seed = 1;
    std::size_t threads = 0;
    StateId initial_belief_state = 0;

    std::size_t n_actions() const noexcept { return actions.size(); }

    std::optional<ActionId> action_index(const std::string& name) const {
        for (ActionId u = 0; u < actions.size(); ++u) {
            if (actions[u].name == name) return u;
        }
        return std::nullopt;
    }

    /// Seeds for `count` runs: the pinned list first, then base_seed + i.
    std::vector<std::uint64_t> seed_list(std::size_t count) const {
        std::vector<std::uint64_t> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(i < seeds.size() ? seeds[i] : base_seed + i);
        }
        return out;
    }

    void validate() const {
        detail::require(!actions.empty(), "at least one action is required");
        for (const auto& a : actions) {
            a.validate();
            if (a.kind == ActionKind::Frozen) {
                detail::require(a.frozen->size() == space.n_states(),
                                "action '" + a.name + "': frozen matrix does not match the state space");
            }
        }
        rewards.validate(actions.size());
        detail::require(environment.actions.size() == actions.size(),
                        "environment must describe every action");
        environment.validate(space.n_locations());
        detail::require(initial_truth.location <= space.n_locations(), "initial damage location out of range");
        if (initial_truth.location != 0) {
            detail::require(initial_truth.delta >= space.delta_min(), "initial damage below the first interval");
        }
        detail::require(confusion.size() == space.n_states(), "confusion matrix does not match the state space");
        detail::require(recompute_every >= 1, "recompute_every must be at least 1");
        detail::require(runs >= 1, "run count must be at least 1");
        detail::require(!modes.empty(), "at least one mode is required");
        detail::require(initial_belief_state < space.n_states(), "initial belief state out of range");
    }
};

namespace detail {

using nlohmann::json;

inline const json& section(const json& j, const char* key) {
    require(j.contains(key), std::string("configuration is missing section '") + key + "'");
    return j.at(key);
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline ActionKind parse_action_kind(const std::string& s) {
    if (s == "degrade") return ActionKind::Degrade;
    if (s == "improve") return ActionKind::Improve;
    if (s == "reset") return ActionKind::Reset;
    if (s == "frozen-matrix" || s == "frozen") return ActionKind::Frozen;
    throw ValidationError("unknown action kind '" + s + "'");
}

inline TruthKind parse_truth_kind(const std::string& s) {
    if (s == "degrade") return TruthKind::Degrade;
    if (s == "improve") return TruthKind::Improve;
    if (s == "reset") return TruthKind::Reset;
    if (s == "hold") return TruthKind::Hold;
    throw ValidationError("unknown environment kind '" + s + "'");
}

inline Statistic parse_statistic(const std::string& s) {
    if (s == "mean") return Statistic::Mean;
    if (s == "mode") return Statistic::Mode;
    throw ValidationError("unknown statistic '" + s + "'");
}

inline Eigen::MatrixXd parse_matrix(const json& rows) {
    require(rows.is_array() && !rows.empty(), "matrix must be a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows.at(static_cast<std::size_t>(r));
        require(row.is_array() && static_cast<Eigen::Index>(row.size()) == n, "matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

/// Accepts a full categorical or {"stay": p}, which spreads 1-p evenly
/// over the damage locations.
inline std::vector<double> parse_initiation(const json& j, std::size_t n_locations) {
    if (j.is_array()) return j.get<std::vector<double>>();
    require(j.is_object() && j.contains("stay"), "initiation must be an array or {\"stay\": p}");
    const double stay = j.at("stay").get<double>();
    std::vector<double> out(n_locations + 1, (1.0 - stay) / static_cast<double>(n_locations));
    out[0] = stay;
    return out;
}

}  // namespace detail

/// Builds a configuration from its JSON form. Relative file paths resolve
/// against `base_dir`.
inline ExperimentConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir = {}) {
    using detail::json;
    using detail::require;
    using detail::section;
    using detail::value_or;
    ExperimentConfig cfg;
    try {
        const json& ss = section(root, "state_space");
        cfg.space = StateSpace(ss.at("n_locations").get<std::size_t>(),
                               ss.at("interval_bounds").get<std::vector<double>>());

        const json& acts = section(root, "actions");
        cfg.statistic = detail::parse_statistic(value_or<std::string>(acts, "statistic", "mean"));
        const double default_eps = value_or<double>(acts, "perturbation", 1e-6);
        for (const json& m : acts.at("models")) {
            ActionModel model;
            model.name = m.at("name").get<std::string>();
            require(!cfg.action_index(model.name), "duplicate action name '" + model.name + "'");
            model.kind = detail::parse_action_kind(m.at("kind").get<std::string>());
            model.max_step = value_or<std::size_t>(m, "max_step", 1);
            model.perturbation = value_or<double>(m, "perturbation", default_eps);
            if (m.contains("prior")) {
                const json& p = m.at("prior");
                if (p.contains("dirichlet")) {
                    model.prior = DirichletParams(p.at("dirichlet").get<std::vector<double>>());
                } else if (p.contains("beta")) {
                    const auto ab = p.at("beta").get<std::vector<double>>();
                    require(ab.size() == 2, "beta prior takes [a, b]");
                    model.prior = BetaParams(ab[0], ab[1]);
                } else {
                    require(false, "prior must be {\"dirichlet\": [...]} or {\"beta\": [a, b]}");
                }
            }
            if (m.contains("matrix")) model.frozen = TransitionMatrix(detail::parse_matrix(m.at("matrix")));
            cfg.actions.push_back(std::move(model));
        }

        const json& rw = section(root, "rewards");
        cfg.rewards.health_ok = value_or<double>(rw, "health_ok", 0.0);
        if (rw.contains("health_damaged")) {
            const json& h = rw.at("health_damaged");
            cfg.rewards.health_scale = value_or<double>(h, "scale", -1.0);
            cfg.rewards.health_rate = value_or<double>(h, "rate", 5.0);
            cfg.rewards.health_offset = value_or<double>(h, "offset", 4.0);
        }
        cfg.rewards.health_failure = value_or<double>(rw, "health_failure", -250.0);
        cfg.rewards.xi = value_or<double>(rw, "xi", 1.0);
        cfg.rewards.terminal_level_failed = value_or<bool>(rw, "terminal_level_failed", true);
        const json& control = rw.at("control");
        cfg.rewards.control.resize(cfg.actions.size());
        for (ActionId u = 0; u < cfg.actions.size(); ++u) {
            require(control.contains(cfg.actions[u].name),
                    "rewards.control has no entry for action '" + cfg.actions[u].name + "'");
            cfg.rewards.control[u] = control.at(cfg.actions[u].name).get<double>();
        }

        const json& env = section(root, "environment");
        if (env.contains("init_delta_range")) {
            const auto r = env.at("init_delta_range").get<std::vector<double>>();
            require(r.size() == 2, "init_delta_range takes [lo, hi]");
            cfg.environment.init_delta_lo = r[0];
            cfg.environment.init_delta_hi = r[1];
        }
        cfg.environment.step_scale = value_or<double>(env, "step_scale", 0.1);
        cfg.environment.delta_floor = value_or<double>(env, "delta_floor", cfg.space.delta_min());
        cfg.environment.delta_fail = value_or<double>(env, "delta_fail", cfg.space.delta_max());
        if (env.contains("initial_truth")) {
            cfg.initial_truth.location = value_or<std::size_t>(env.at("initial_truth"), "location", 0);
            cfg.initial_truth.delta = value_or<double>(env.at("initial_truth"), "delta", 0.0);
            cfg.initial_truth.failed = cfg.initial_truth.location != 0 &&
                                       cfg.initial_truth.delta >= cfg.environment.delta_fail;
        }
        const json& env_actions = env.at("actions");
        for (const auto& model : cfg.actions) {
            require(env_actions.contains(model.name),
                    "environment.actions has no entry for action '" + model.name + "'");
            const json& e = env_actions.at(model.name);
            TruthAction ta;
            ta.kind = detail::parse_truth_kind(e.at("kind").get<std::string>());
            if (e.contains("initiation")) ta.initiation = detail::parse_initiation(e.at("initiation"), cfg.space.n_locations());
            if (e.contains("true_alpha")) ta.true_alpha = e.at("true_alpha").get<std::vector<double>>();
            if (e.contains("drift")) {
                ta.drift_mean = value_or<double>(e.at("drift"), "mean", 0.0);
                ta.drift_std = value_or<double>(e.at("drift"), "std", 0.0);
            }
            cfg.environment.actions.push_back(std::move(ta));
        }

        const json& obs = section(root, "observation");
        const auto source = value_or<std::string>(obs, "source", "synthetic");
        if (source == "file") {
            cfg.observation_source.from_file = true;
            std::filesystem::path p = obs.at("path").get<std::string>();
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            cfg.observation_source.path = p.string();
            cfg.confusion = load_confusion(cfg.observation_source.path, cfg.space.n_states());
        } else {
            require(source == "synthetic", "observation.source must be 'synthetic' or 'file'");
            cfg.observation_source.accuracy = obs.at("accuracy").get<double>();
            cfg.observation_source.adjacent_mass = value_or<double>(obs, "adjacent_mass", 0.0);
            cfg.confusion = synth_confusion(cfg.space, cfg.observation_source.accuracy,
                                            cfg.observation_source.adjacent_mass);
        }

        const json& hz = section(root, "horizon");
        cfg.horizon = hz.at("T").get<std::size_t>();
        require(cfg.horizon >= 1, "horizon T must be at least 1");
        cfg.forecast_depth = value_or<std::size_t>(hz, "forecast_depth", 5);
        cfg.forecast_checkpoints =
            value_or<std::vector<std::size_t>>(hz, "forecast_checkpoints", std::vector<std::size_t>{cfg.horizon});
        cfg.recompute_every = value_or<std::size_t>(hz, "recompute_every", 1);

        const json& ex = section(root, "experiment");
        cfg.mode = parse_mode(value_or<std::string>(ex, "mode", "adaptive"));
        if (ex.contains("modes")) {
            cfg.modes.clear();
            for (const auto& m : ex.at("modes")) cfg.modes.push_back(parse_mode(m.get<std::string>()));
        }
        cfg.seeds = value_or<std::vector<std::uint64_t>>(ex, "seeds", {});
        cfg.base_seed = value_or<std::uint64_t>(ex, "base_seed", 1);
        cfg.runs = value_or<std::size_t>(ex, "runs", cfg.seeds.empty() ? 1 : cfg.seeds.size());
        cfg.threads = value_or<std::size_t>(ex, "threads", 0);
        cfg.initial_belief_state = value_or<std::size_t>(ex, "initial_belief_state", 0);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed configuration: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file '" + path.string() + "'");
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("configuration file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(root, path.parent_path());
}

}  // namespace adaptwin
