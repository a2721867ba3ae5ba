#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "adaptwin/config.hpp"
#include "adaptwin/error.hpp"
#include "adaptwin/harness.hpp"

namespace adaptwin {

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("malformed number '" + std::string(s) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw ValidationError("malformed integer '" + std::string(s) + "'");
    }
    return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
    }
}

inline std::size_t posterior_width(const ActionModel& a) {
    if (!a.learnable()) return 0;
    if (const auto* d = std::get_if<DirichletParams>(&a.prior)) return d->size();
    return 2;
}

}  // namespace detail

inline std::string trace_header(const ExperimentConfig& cfg) {
    std::string h = "seed,mode,t,location,delta,failed,true_state,observation,map_state,action,reward,cumulative_reward";
    for (StateId d = 0; d < cfg.space.n_states(); ++d) h += ",b" + std::to_string(d);
    for (const auto& a : cfg.actions) {
        for (std::size_t k = 0; k < detail::posterior_width(a); ++k) h += ",post_" + a.name + "_" + std::to_string(k);
    }
    return h;
}

/// One row per step, every episode in order, under a single header.
inline void write_traces_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                             const std::vector<EpisodeTrace>& traces) {
    auto out = detail::open_out(path);
    out << trace_header(cfg) << '\n';
    using detail::format_double;
    for (const auto& tr : traces) {
        double cumulative = 0.0;
        for (const auto& s : tr.steps) {
            cumulative += s.reward;
            out << tr.seed << ',' << to_string(tr.mode) << ',' << s.t << ',' << s.truth.location << ','
                << format_double(s.truth.delta) << ',' << (s.truth.failed ? 1 : 0) << ',' << s.true_state << ','
                << s.observation << ',' << s.map_state << ',' << s.action << ',' << format_double(s.reward) << ','
                << format_double(cumulative);
            for (Eigen::Index d = 0; d < s.belief.size(); ++d) out << ',' << format_double(s.belief(d));
            for (ActionId u = 0; u < cfg.actions.size(); ++u) {
                const std::size_t width = detail::posterior_width(cfg.actions[u]);
                for (std::size_t k = 0; k < width; ++k) out << ',' << format_double(s.posterior.at(u).at(k));
            }
            out << '\n';
        }
    }
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Reads traces written by write_traces_csv. Per-episode fields not stored
/// in the table (p_true, forecasts, policy) are left empty.
inline std::vector<EpisodeTrace> read_traces_csv(const std::filesystem::path& path, const ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line != trace_header(cfg)) {
        throw ValidationError("trace file '" + path.string() + "' header does not match the configuration");
    }
    const std::size_t n_states = cfg.space.n_states();
    std::vector<EpisodeTrace> traces;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        std::size_t expected = 12 + n_states;
        for (const auto& a : cfg.actions) expected += detail::posterior_width(a);
        detail::require(f.size() == expected, "trace row has " + std::to_string(f.size()) + " fields, expected " +
                                                  std::to_string(expected));
        const std::uint64_t seed = detail::parse_uint(f[0]);
        const Mode mode = parse_mode(std::string(f[1]));
        StepRecord s;
        s.t = detail::parse_uint(f[2]);
        if (traces.empty() || traces.back().seed != seed || traces.back().mode != mode || s.t == 0) {
            EpisodeTrace tr;
            tr.seed = seed;
            tr.mode = mode;
            traces.push_back(std::move(tr));
        }
        s.truth.location = detail::parse_uint(f[3]);
        s.truth.delta = detail::parse_double(f[4]);
        s.truth.failed = detail::parse_uint(f[5]) != 0;
        s.true_state = detail::parse_uint(f[6]);
        s.observation = detail::parse_uint(f[7]);
        s.map_state = detail::parse_uint(f[8]);
        s.action = detail::parse_uint(f[9]);
        s.reward = detail::parse_double(f[10]);
        s.belief.resize(static_cast<Eigen::Index>(n_states));
        std::size_t col = 12;
        for (StateId d = 0; d < n_states; ++d) s.belief(static_cast<Eigen::Index>(d)) = detail::parse_double(f[col++]);
        for (const auto& a : cfg.actions) {
            std::vector<double> p(detail::posterior_width(a));
            for (double& v : p) v = detail::parse_double(f[col++]);
            s.posterior.push_back(std::move(p));
        }
        auto& tr = traces.back();
        tr.cumulative_reward += s.reward;
        tr.failed = tr.failed || s.truth.failed;
        tr.steps.push_back(std::move(s));
    }
    return traces;
}

inline void write_forecasts_csv(const std::filesystem::path& path, const ExperimentConfig& cfg,
                                const std::vector<EpisodeTrace>& traces) {
    auto out = detail::open_out(path);
    out << "seed,mode,t_current,t";
    for (StateId d = 0; d < cfg.space.n_states(); ++d) out << ",b" << d;
    for (const auto& a : cfg.actions) out << ",p_" << a.name;
    out << '\n';
    for (const auto& tr : traces) {
        for (const auto& fc : tr.forecasts) {
            for (std::size_t i = 0; i < fc.state_beliefs.size(); ++i) {
                out << tr.seed << ',' << to_string(tr.mode) << ',' << fc.t_current << ',' << fc.t_current + 1 + i;
                const auto& b = fc.state_beliefs[i].probs();
                for (Eigen::Index d = 0; d < b.size(); ++d) out << ',' << detail::format_double(b(d));
                const auto& a = fc.action_beliefs[i];
                for (Eigen::Index u = 0; u < a.size(); ++u) out << ',' << detail::format_double(a(u));
                out << '\n';
            }
        }
    }
}

/// Decision rule and value of every state at each time of the policy horizon.
inline void write_policy_csv(const std::filesystem::path& path, const ExperimentConfig& cfg, const Policy& policy) {
    auto out = detail::open_out(path);
    out << 't';
    for (StateId d = 0; d < cfg.space.n_states(); ++d) out << ",action_" << d;
    for (StateId d = 0; d < cfg.space.n_states(); ++d) out << ",value_" << d;
    out << '\n';
    for (std::size_t i = 0; i < policy.actions.size(); ++i) {
        out << policy.t_start + i;
        for (ActionId u : policy.actions[i]) out << ',' << cfg.actions.at(u).name;
        for (Eigen::Index d = 0; d < policy.values[i].size(); ++d) out << ',' << detail::format_double(policy.values[i](d));
        out << '\n';
    }
}

/// Prior, true and final posterior step parameters per episode.
inline nlohmann::json posterior_snapshot(const ExperimentConfig& cfg, const EpisodeTrace& tr) {
    nlohmann::json j;
    j["seed"] = tr.seed;
    j["mode"] = to_string(tr.mode);
    j["cumulative_reward"] = tr.cumulative_reward;
    j["failed"] = tr.failed;
    j["conflicts_resolved"] = tr.conflicts_resolved;
    for (ActionId u = 0; u < cfg.actions.size(); ++u) {
        const auto& a = cfg.actions[u];
        if (!a.learnable()) continue;
        nlohmann::json e;
        e["kind"] = to_string(a.kind);
        e["family"] = std::holds_alternative<BetaParams>(a.prior) ? "beta" : "dirichlet";
        e["prior"] = detail::flatten(detail::Posterior(a.prior));
        if (!tr.steps.empty()) e["posterior"] = tr.steps.back().posterior.at(u);
        if (u < tr.p_true.size()) e["p_true"] = tr.p_true[u];
        if (u < tr.final_counts.size() && !tr.final_counts[u].counts.empty()) {
            e["counts"] = tr.final_counts[u].counts;
            e["inconsistent"] = tr.final_counts[u].inconsistent;
            e["uninformative"] = tr.final_counts[u].uninformative;
        }
        j["actions"][a.name] = std::move(e);
    }
    return j;
}

inline void write_posteriors_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                                  const std::vector<EpisodeTrace>& traces) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& tr : traces) j.push_back(posterior_snapshot(cfg, tr));
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

/// Mean and standard deviation of the cumulative reward per step, one
/// column pair per mode.
inline void write_summary_csv(const std::filesystem::path& path, const ExperimentSummary& summary) {
    auto out = detail::open_out(path);
    out << 't';
    std::size_t len = 0;
    for (const auto& m : summary.modes) {
        out << ',' << to_string(m.mode) << "_mean," << to_string(m.mode) << "_std";
        len = std::max(len, m.mean_cumulative.size());
    }
    out << '\n';
    for (std::size_t t = 0; t < len; ++t) {
        out << t;
        for (const auto& m : summary.modes) {
            if (t < m.mean_cumulative.size()) {
                out << ',' << detail::format_double(m.mean_cumulative[t]) << ','
                    << detail::format_double(m.std_cumulative[t]);
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentSummary& summary) {
    nlohmann::json j;
    for (const auto& m : summary.modes) {
        nlohmann::json e;
        e["runs"] = m.runs;
        e["failure_rate"] = m.failure_rate;
        if (!m.mean_cumulative.empty()) {
            e["final_mean_cumulative_reward"] = m.mean_cumulative.back();
            e["final_std_cumulative_reward"] = m.std_cumulative.back();
        }
        for (ActionId u = 0; u < cfg.actions.size(); ++u) {
            if (!cfg.actions[u].learnable()) continue;
            e["prior_mean_l1"][cfg.actions[u].name] = m.prior_l1.at(u);
            e["posterior_mean_l1"][cfg.actions[u].name] = m.posterior_l1.at(u);
        }
        e["errors"] = nlohmann::json::array();
        for (const auto& [seed, what] : m.errors) e["errors"].push_back({{"seed", seed}, {"error", what}});
        j[to_string(m.mode)] = std::move(e);
    }
    return j;
}

/// Writes traces, forecasts, posterior snapshots and, when given, the
/// experiment summary into `dir`.
inline void emit_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                         const std::vector<EpisodeTrace>& traces,
                         const std::optional<ExperimentSummary>& summary = std::nullopt) {
    detail::ensure_dir(dir);
    write_traces_csv(dir / "traces.csv", cfg, traces);
    write_forecasts_csv(dir / "forecasts.csv", cfg, traces);
    write_posteriors_json(dir / "posteriors.json", cfg, traces);
    if (summary) {
        write_summary_csv(dir / "summary.csv", *summary);
        auto out = detail::open_out(dir / "summary.json");
        out << summary_json(cfg, *summary).dump(2) << '\n';
    }
}

}  // namespace adaptwin
