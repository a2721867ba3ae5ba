#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/belief.hpp"
#include "adaptwin/config.hpp"
#include "adaptwin/environment.hpp"
#include "adaptwin/error.hpp"
#include "adaptwin/planner.hpp"
#include "adaptwin/transition_model.hpp"

namespace adaptwin {

struct StepRecord {
    std::size_t t = 0;
    GroundTruth truth;
    StateId true_state = 0;
    StateId observation = 0;
    Eigen::VectorXd belief;
    StateId map_state = 0;
    ActionId action = 0;
    double reward = 0.0;
    /// Posterior parameters per action after this step's update: Dirichlet
    /// alphas, or (a, b) for a Beta prior; empty for non-learnable actions.
    std::vector<std::vector<double>> posterior;
};

struct EpisodeTrace {
    std::uint64_t seed = 0;
    Mode mode = Mode::Adaptive;
    TrueParams p_true;
    std::vector<StepRecord> steps;
    double cumulative_reward = 0.0;
    /// Set if the structure failed at any step.
    bool failed = false;
    std::vector<Forecast> forecasts;
    Policy final_policy;
    /// Final tallies per learnable action (empty counts otherwise).
    std::vector<StepCounts> final_counts;
    /// Assimilation steps that needed the perturbation fallback.
    std::size_t conflicts_resolved = 0;

    std::vector<double> cumulative_curve() const {
        std::vector<double> out;
        out.reserve(steps.size());
        double acc = 0.0;
        for (const auto& s : steps) out.push_back(acc += s.reward);
        return out;
    }
};

namespace detail {

/// Prior or posterior of one action, as the flat parameter vector stored in traces.
using Posterior = std::variant<std::monostate, DirichletParams, BetaParams>;

inline std::vector<double> flatten(const Posterior& p) {
    if (const auto* d = std::get_if<DirichletParams>(&p)) return d->alpha;
    if (const auto* b = std::get_if<BetaParams>(&p)) return {b->a, b->b};
    return {};
}

inline Posterior update_posterior(const Posterior& prior, const StepCounts& counts) {
    if (const auto* d = std::get_if<DirichletParams>(&prior)) return update_dirichlet(*d, counts);
    if (const auto* b = std::get_if<BetaParams>(&prior)) return update_beta(*b, counts.counts.at(0), counts.counts.at(1));
    return prior;
}

inline std::vector<TransitionMatrix> build_matrices(const ExperimentConfig& cfg, const std::vector<Posterior>& post) {
    std::vector<TransitionMatrix> out;
    out.reserve(cfg.actions.size());
    for (ActionId u = 0; u < cfg.actions.size(); ++u) {
        ActionModel model = cfg.actions[u];
        model.prior = post[u];
        const auto probs = step_probabilities(model, cfg.statistic);
        out.push_back(perturb_normalize(build_matrix(cfg.space, model, probs), model.perturbation));
    }
    return out;
}

inline Rng stream(std::uint64_t seed, std::uint64_t channel, std::uint64_t step = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(channel), static_cast<std::uint32_t>(step),
                      static_cast<std::uint32_t>(step >> 32)};
    return Rng(seq);
}

enum Channel : std::uint64_t { kParams = 0, kEnvironment = 1, kObservation = 2 };

inline double fallback_epsilon(const ExperimentConfig& cfg) {
    double eps = 0.0;
    for (const auto& a : cfg.actions) eps = std::max(eps, a.perturbation);
    return eps > 0.0 ? eps : 1e-6;
}

}  // namespace detail

/// Runs one online episode over t = 0..T: observe, assimilate, learn
/// (adaptive mode), plan, act, collect reward.
inline EpisodeTrace run_episode(const ExperimentConfig& cfg, std::uint64_t seed, Mode mode) {
    cfg.validate();
    const StateSpace& space = cfg.space;
    const std::size_t n_actions = cfg.n_actions();
    const std::size_t T = cfg.horizon;
    const double fallback_eps = detail::fallback_epsilon(cfg);

    // Per-step streams: runs sharing a seed draw identical randomness at
    // step t, so adaptive/static pairs differ only through their actions.
    Rng param_rng = detail::stream(seed, detail::kParams);

    EpisodeTrace trace;
    trace.seed = seed;
    trace.mode = mode;
    trace.p_true = sample_true_params(cfg.environment, param_rng);

    std::vector<detail::Posterior> priors;
    for (const auto& a : cfg.actions) {
        priors.push_back(a.learnable() ? detail::Posterior(a.prior) : detail::Posterior{});
    }
    std::vector<detail::Posterior> posteriors = priors;
    std::vector<TransitionMatrix> matrices = detail::build_matrices(cfg, posteriors);
    const Eigen::MatrixXd rewards = reward_table(cfg.rewards, space);

    Policy policy;
    if (mode == Mode::Static) policy = value_iteration(matrices, rewards, 0, T);

    std::vector<StateId> state_history;
    std::vector<ActionId> action_history;
    trace.final_counts.assign(n_actions, StepCounts{});
    GroundTruth truth = cfg.initial_truth;
    Belief belief = Belief::unit(space.n_states(), cfg.initial_belief_state);

    for (std::size_t t = 0; t <= T; ++t) {
        try {
            StepRecord rec;
            rec.t = t;
            rec.truth = truth;
            rec.true_state = true_state_of(space, truth);
            Rng obs_rng = detail::stream(seed, detail::kObservation, t);
            rec.observation = emit_observation(cfg.confusion, rec.true_state, obs_rng);

            if (t == 0) {
                const Eigen::VectorXd lik = likelihood_column(cfg.confusion, rec.observation);
                try {
                    belief = correct(belief, lik);
                } catch (const ConflictError&) {
                    Eigen::VectorXd mixed = belief.probs().array() + fallback_eps;
                    belief = correct(Belief(mixed / mixed.sum()), lik);
                    ++trace.conflicts_resolved;
                }
            } else {
                try {
                    belief = assimilate(belief, action_history.back(), rec.observation, matrices, cfg.confusion);
                } catch (const ConflictError&) {
                    belief = assimilate(belief, action_history.back(), rec.observation, matrices, cfg.confusion,
                                        fallback_eps);
                    ++trace.conflicts_resolved;
                }
            }
            rec.belief = belief.probs();
            rec.map_state = belief.map_state();
            state_history.push_back(rec.map_state);

            if (mode == Mode::Adaptive) {
                for (ActionId u = 0; u < n_actions; ++u) {
                    const ActionModel& a = cfg.actions[u];
                    if (!a.learnable()) continue;
                    const StepCounts counts =
                        tally_step_counts(space, state_history, action_history, u, a.kind, a.max_step);
                    posteriors[u] = detail::update_posterior(priors[u], counts);
                    trace.final_counts[u] = counts;
                }
                matrices = detail::build_matrices(cfg, posteriors);
                if (t % cfg.recompute_every == 0 || !policy.covers(t)) {
                    policy = value_iteration(matrices, rewards, t, T);
                }
            }

            rec.action = select_action(policy, t, belief, n_actions);
            rec.reward = reward(cfg.rewards, space, rec.true_state, rec.action, truth.failed);
            for (const auto& p : posteriors) rec.posterior.push_back(detail::flatten(p));

            if (cfg.forecast_depth > 0 &&
                std::find(cfg.forecast_checkpoints.begin(), cfg.forecast_checkpoints.end(), t) !=
                    cfg.forecast_checkpoints.end()) {
                const std::size_t t_predict = t + cfg.forecast_depth;
                const Policy& fpolicy = policy.covers(t_predict) && policy.covers(t)
                                            ? policy
                                            : value_iteration(matrices, rewards, t, std::max(T, t_predict));
                trace.forecasts.push_back(forecast(belief, fpolicy, matrices, t, t_predict));
            }

            trace.failed = trace.failed || truth.failed;
            trace.cumulative_reward += rec.reward;
            trace.steps.push_back(std::move(rec));

            if (t < T) {
                action_history.push_back(trace.steps.back().action);
                Rng env_rng = detail::stream(seed, detail::kEnvironment, t);
                truth = step_truth(truth, trace.steps.back().action, cfg.environment, trace.p_true, env_rng);
            }
        } catch (const StepError&) {
            throw;
        } catch (const std::exception& e) {
            throw StepError(t, e.what());
        }
    }
    trace.final_policy = std::move(policy);
    return trace;
}

struct ModeSummary {
    Mode mode = Mode::Adaptive;
    std::size_t runs = 0;
    std::vector<double> mean_cumulative;
    std::vector<double> std_cumulative;
    double failure_rate = 0.0;
    /// Mean L1 distance to p_true per action: prior mean and final posterior mean.
    std::vector<double> prior_l1;
    std::vector<double> posterior_l1;
    std::vector<std::pair<std::uint64_t, std::string>> errors;
};

struct ExperimentSummary {
    std::vector<ModeSummary> modes;
};

struct ExperimentResult {
    ExperimentSummary summary;
    /// traces[m][i] is the i-th completed run of summary.modes[m].
    std::vector<std::vector<EpisodeTrace>> traces;
};

/// L1 distance between an action's parameter vector mean and `p_true`.
inline double mean_l1(const std::vector<double>& params, bool beta, const std::vector<double>& p_true) {
    if (params.empty() || p_true.empty()) return 0.0;
    std::vector<double> mean;
    if (beta) {
        mean = beta_statistic(BetaParams(params[0], params[1]), Statistic::Mean);
    } else {
        mean = dirichlet_statistic(DirichletParams(params), Statistic::Mean);
    }
    if (mean.size() != p_true.size()) return 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < mean.size(); ++k) d += std::abs(mean[k] - p_true[k]);
    return d;
}

inline ModeSummary summarize(const ExperimentConfig& cfg, Mode mode, const std::vector<EpisodeTrace>& traces) {
    ModeSummary s;
    s.mode = mode;
    s.runs = traces.size();
    const std::size_t n_actions = cfg.n_actions();
    s.prior_l1.assign(n_actions, 0.0);
    s.posterior_l1.assign(n_actions, 0.0);
    if (traces.empty()) return s;

    const std::size_t len = traces.front().steps.size();
    s.mean_cumulative.assign(len, 0.0);
    s.std_cumulative.assign(len, 0.0);
    std::vector<std::vector<double>> curves;
    for (const auto& tr : traces) curves.push_back(tr.cumulative_curve());
    const auto n = static_cast<double>(traces.size());
    for (std::size_t t = 0; t < len; ++t) {
        double sum = 0.0;
        for (const auto& c : curves) sum += c.at(t);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& c : curves) ss += (c[t] - mean) * (c[t] - mean);
        s.mean_cumulative[t] = mean;
        s.std_cumulative[t] = traces.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    std::size_t failures = 0;
    for (const auto& tr : traces) {
        failures += tr.failed ? 1 : 0;
        for (ActionId u = 0; u < n_actions; ++u) {
            const bool beta = std::holds_alternative<BetaParams>(cfg.actions[u].prior);
            const auto prior = detail::flatten(cfg.actions[u].learnable() ? detail::Posterior(cfg.actions[u].prior)
                                                                          : detail::Posterior{});
            s.prior_l1[u] += mean_l1(prior, beta, tr.p_true[u]) / n;
            s.posterior_l1[u] += mean_l1(tr.steps.back().posterior[u], beta, tr.p_true[u]) / n;
        }
    }
    s.failure_rate = static_cast<double>(failures) / n;
    return s;
}

/// Runs `runs` seeded episodes per requested mode. Episodes execute on up
/// to cfg.threads workers; results are ordered by seed regardless.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t runs = 0) {
    cfg.validate();
    if (runs == 0) runs = cfg.runs;
    detail::require(runs >= 1, "run count must be at least 1");
    const auto seeds = cfg.seed_list(runs);

    struct Job {
        std::size_t mode_index;
        std::size_t run;
    };
    std::vector<Job> jobs;
    for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        for (std::size_t i = 0; i < runs; ++i) jobs.push_back({m, i});
    }
    std::vector<std::vector<EpisodeTrace>> slots(cfg.modes.size(), std::vector<EpisodeTrace>(runs));
    std::vector<std::vector<std::string>> failures(cfg.modes.size(), std::vector<std::string>(runs));

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            try {
                slots[job.mode_index][job.run] = run_episode(cfg, seeds[job.run], cfg.modes[job.mode_index]);
            } catch (const std::exception& e) {
                failures[job.mode_index][job.run] = e.what();
            }
        }
    };
    std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, jobs.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    ExperimentResult result;
    for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        std::vector<EpisodeTrace> done;
        std::vector<std::pair<std::uint64_t, std::string>> errors;
        for (std::size_t i = 0; i < runs; ++i) {
            if (failures[m][i].empty()) {
                done.push_back(std::move(slots[m][i]));
            } else {
                errors.emplace_back(seeds[i], failures[m][i]);
            }
        }
        ModeSummary s = summarize(cfg, cfg.modes[m], done);
        s.errors = std::move(errors);
        result.summary.modes.push_back(std::move(s));
        result.traces.push_back(std::move(done));
    }
    return result;
}

}  // namespace adaptwin
