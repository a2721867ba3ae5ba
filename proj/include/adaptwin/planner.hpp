#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/belief.hpp"
#include "adaptwin/error.hpp"
#include "adaptwin/policy.hpp"
#include "adaptwin/state_space.hpp"
#include "adaptwin/transition_model.hpp"

namespace adaptwin {

/// Health reward is `health_ok` when undamaged,
/// `health_scale * exp(health_rate * delta) + health_offset` while damaged
/// and `health_failure` once failed. Control rewards are weighted by `xi`.
/// With `terminal_level_failed`, planning prices every terminal-level state
/// as failed: that level's interval ends at the failure threshold and all
/// over-range magnitudes clamp into it.
struct RewardConfig {
    double health_ok = 0.0;
    double health_scale = -1.0;
    double health_rate = 5.0;
    double health_offset = 4.0;
    double health_failure = -250.0;
    std::vector<double> control;
    double xi = 1.0;
    bool terminal_level_failed = true;

    double health_at(double delta) const { return health_scale * std::exp(health_rate * delta) + health_offset; }

    void validate(std::size_t n_actions) const {
        detail::require(control.size() == n_actions, "a control reward is required for every action");
        detail::require(std::isfinite(xi), "reward weight xi must be finite");
    }
};

/// Health term for a digital state, evaluated at the midpoint of its
/// damage interval.
inline double health_reward(const RewardConfig& config, const StateSpace& space, StateId d, bool failed = false) {
    if (failed) return config.health_failure;
    if (d == 0) return config.health_ok;
    return config.health_at(space.level_midpoint(space.location_level_of(d).level));
}

inline double reward(const RewardConfig& config, const StateSpace& space, StateId d, ActionId u,
                     bool failed = false) {
    detail::require(u < config.control.size(), "action out of range");
    return health_reward(config, space, d, failed) + config.xi * config.control[u];
}

/// Planning rewards R(d, u): states (rows) by actions (columns).
inline Eigen::MatrixXd reward_table(const RewardConfig& config, const StateSpace& space) {
    const auto n_actions = config.control.size();
    Eigen::MatrixXd r(space.n_states(), n_actions);
    for (StateId d = 0; d < space.n_states(); ++d) {
        const bool failed = config.terminal_level_failed && space.is_terminal_level(d);
        for (ActionId u = 0; u < n_actions; ++u) {
            r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(u)) = reward(config, space, d, u, failed);
        }
    }
    return r;
}

/// Finite-horizon backward induction without discounting. The value at
/// the last step is the best immediate reward; ties pick the lowest action.
inline Policy value_iteration(std::span<const TransitionMatrix> matrices, const Eigen::MatrixXd& rewards,
                              std::size_t t_start, std::size_t t_end) {
    detail::require(t_end >= t_start, "planning horizon ends before it starts");
    detail::require(!matrices.empty(), "at least one action is required");
    const Eigen::Index n = rewards.rows();
    const auto n_actions = static_cast<Eigen::Index>(matrices.size());
    detail::require(rewards.cols() == n_actions, "reward table does not match the action count");
    for (const auto& m : matrices) {
        detail::require(static_cast<Eigen::Index>(m.size()) == n, "transition matrix does not match reward table");
    }

    const std::size_t steps = t_end - t_start + 1;
    Policy policy;
    policy.t_start = t_start;
    policy.t_end = t_end;
    policy.actions.assign(steps, std::vector<ActionId>(static_cast<std::size_t>(n), 0));
    policy.values.assign(steps, Eigen::VectorXd::Zero(n));

    Eigen::VectorXd next_value = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd q(n, n_actions);
    for (std::size_t i = steps; i-- > 0;) {
        const bool terminal = i + 1 == steps;
        for (Eigen::Index u = 0; u < n_actions; ++u) {
            q.col(u) = rewards.col(u);
            if (!terminal) {
                q.col(u).noalias() += matrices[static_cast<std::size_t>(u)].entries().transpose() * next_value;
            }
        }
        auto& rule = policy.actions[i];
        auto& value = policy.values[i];
        for (Eigen::Index d = 0; d < n; ++d) {
            Eigen::Index best = 0;
            for (Eigen::Index u = 1; u < n_actions; ++u) {
                if (q(d, u) > q(d, best)) best = u;
            }
            rule[static_cast<std::size_t>(d)] = static_cast<ActionId>(best);
            value(d) = q(d, best);
        }
        next_value = value;
    }
    return policy;
}

inline Policy value_iteration(std::span<const TransitionMatrix> matrices, const RewardConfig& config,
                              const StateSpace& space, std::size_t t_start, std::size_t t_end) {
    config.validate(matrices.size());
    return value_iteration(matrices, reward_table(config, space), t_start, t_end);
}

/// Action carrying the most belief mass under the time-t decision rule.
inline ActionId select_action(const Policy& policy, std::size_t t, const Belief& belief, std::size_t n_actions) {
    const Eigen::VectorXd mass = action_belief(policy, t, belief, n_actions);
    Eigen::Index best = 0;
    for (Eigen::Index u = 1; u < mass.size(); ++u) {
        if (mass(u) > mass(best)) best = u;
    }
    return static_cast<ActionId>(best);
}

}  // namespace adaptwin
