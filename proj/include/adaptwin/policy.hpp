#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/error.hpp"
#include "adaptwin/state_space.hpp"

namespace adaptwin {

/// Non-stationary deterministic policy over the closed horizon
/// [t_start, t_end], with the value table it was derived from.
struct Policy {
    std::size_t t_start = 0;
    std::size_t t_end = 0;
    std::vector<std::vector<ActionId>> actions;  // [t - t_start][state]
    std::vector<Eigen::VectorXd> values;         // [t - t_start](state)

    bool covers(std::size_t t) const noexcept { return t >= t_start && t <= t_end && !actions.empty(); }

    ActionId action(std::size_t t, StateId d) const {
        detail::require(covers(t), "time " + std::to_string(t) + " outside the policy horizon");
        return actions[t - t_start].at(d);
    }

    double value(std::size_t t, StateId d) const {
        detail::require(covers(t), "time " + std::to_string(t) + " outside the policy horizon");
        return values[t - t_start](static_cast<Eigen::Index>(d));
    }

    std::size_t n_states() const { return actions.empty() ? 0 : actions.front().size(); }
};

}  // namespace adaptwin
