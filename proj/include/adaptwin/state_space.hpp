#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "adaptwin/error.hpp"

namespace adaptwin {

using StateId = std::size_t;
using ActionId = std::size_t;

/// Location/level coordinates of a digital state. Location 0 is the
/// undamaged state and carries level 0; damaged states use 1-based
/// location and level.
struct StateCoords {
    std::size_t location = 0;
    std::size_t level = 0;

    friend bool operator==(const StateCoords&, const StateCoords&) = default;
};

/// Discrete health states: one undamaged state followed by every
/// (location, damage level) pair, ordered by location then level.
class StateSpace {
public:
    StateSpace(std::size_t n_locations, std::vector<double> interval_bounds)
        : n_locations_(n_locations), bounds_(std::move(interval_bounds)) {
        detail::require(n_locations_ >= 1, "state space needs at least one damage location");
        detail::require(bounds_.size() >= 2, "state space needs at least two interval bounds");
        for (std::size_t i = 1; i < bounds_.size(); ++i) {
            detail::require(bounds_[i] > bounds_[i - 1],
                            "interval bounds must be strictly increasing");
        }
    }

    std::size_t n_locations() const noexcept { return n_locations_; }
    std::size_t n_levels() const noexcept { return bounds_.size() - 1; }
    std::size_t n_states() const noexcept { return 1 + n_levels() * n_locations_; }
    const std::vector<double>& bounds() const noexcept { return bounds_; }

    double delta_min() const noexcept { return bounds_.front(); }
    double delta_max() const noexcept { return bounds_.back(); }

    /// Lower/upper bound of 1-based level k.
    double level_lower(std::size_t level) const { return bounds_.at(level - 1); }
    double level_upper(std::size_t level) const { return bounds_.at(level); }
    double level_midpoint(std::size_t level) const {
        return 0.5 * (level_lower(level) + level_upper(level));
    }

    StateId index_of(std::size_t location, std::size_t level) const {
        if (location == 0) return 0;
        detail::require(location <= n_locations_, "damage location out of range");
        detail::require(level >= 1 && level <= n_levels(), "damage level out of range");
        return 1 + (location - 1) * n_levels() + (level - 1);
    }

    StateCoords location_level_of(StateId state) const {
        detail::require(state < n_states(), "state index out of range");
        if (state == 0) return {};
        const std::size_t offset = state - 1;
        return {offset / n_levels() + 1, offset % n_levels() + 1};
    }

    bool is_terminal_level(StateId state) const {
        return state != 0 && location_level_of(state).level == n_levels();
    }

    /// Half-open interval lookup; magnitudes at or above the last bound
    /// clamp into the final level.
    std::size_t interval_of(double delta) const {
        detail::require(delta >= delta_min(), "damage magnitude below the first interval");
        for (std::size_t k = 1; k < bounds_.size(); ++k) {
            if (delta < bounds_[k]) return k;
        }
        return n_levels();
    }

private:
    std::size_t n_locations_;
    std::vector<double> bounds_;
};

inline StateSpace build_state_space(std::size_t n_locations, std::vector<double> interval_bounds) {
    return StateSpace(n_locations, std::move(interval_bounds));
}

}  // namespace adaptwin
