#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "adaptwin/error.hpp"
#include "adaptwin/observation.hpp"
#include "adaptwin/state_space.hpp"
#include "adaptwin/transition_model.hpp"

namespace adaptwin {

/// Physical (ground-truth) health: damage location and continuous magnitude.
struct GroundTruth {
    std::size_t location = 0;
    double delta = 0.0;
    bool failed = false;

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

enum class TruthKind { Degrade, Improve, Reset, Hold };

/// How the hidden process responds to one action.
struct TruthAction {
    TruthKind kind = TruthKind::Hold;
    /// Categorical over {stay undamaged, location 1..N}; degrade only.
    std::vector<double> initiation;
    /// Dirichlet the per-episode step probabilities are drawn from.
    std::vector<double> true_alpha;
    double drift_mean = 0.0;
    double drift_std = 0.0;
};

struct EnvModel {
    std::vector<TruthAction> actions;
    double init_delta_lo = 0.30;
    double init_delta_hi = 0.35;
    /// Magnitude change per categorical step.
    double step_scale = 0.1;
    /// Improvement never pushes a damaged magnitude below this floor.
    double delta_floor = 0.30;
    /// Magnitudes at or above this mark the structure as failed.
    double delta_fail = 0.80;

    void validate(std::size_t n_locations) const {
        detail::require(init_delta_lo <= init_delta_hi, "initial damage range is inverted");
        detail::require(delta_floor <= init_delta_lo, "damage floor exceeds the initial damage range");
        for (std::size_t u = 0; u < actions.size(); ++u) {
            const auto& a = actions[u];
            const std::string tag = "environment action " + std::to_string(u);
            if (a.kind == TruthKind::Degrade) {
                detail::require(a.initiation.size() == n_locations + 1,
                                tag + ": initiation needs one entry per location plus undamaged");
                double sum = 0.0;
                for (double p : a.initiation) {
                    detail::require(p >= 0.0, tag + ": negative initiation probability");
                    sum += p;
                }
                detail::require(std::abs(sum - 1.0) <= 1e-9, tag + ": initiation probabilities must sum to 1");
            }
            if (a.kind == TruthKind::Degrade || a.kind == TruthKind::Improve) {
                DirichletParams check(a.true_alpha);
                detail::require(a.drift_std >= 0.0, tag + ": drift std must be non-negative");
            }
        }
    }
};

using TrueParams = std::vector<std::vector<double>>;

inline std::vector<double> sample_dirichlet(std::span<const double> alpha, Rng& rng) {
    std::vector<double> out(alpha.size());
    double total = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        std::gamma_distribution<double> g(alpha[k], 1.0);
        out[k] = g(rng);
        total += out[k];
    }
    for (double& v : out) v /= total;
    return out;
}

/// One step-probability draw per degrade/improve action; empty otherwise.
inline TrueParams sample_true_params(const EnvModel& model, Rng& rng) {
    TrueParams out(model.actions.size());
    for (std::size_t u = 0; u < model.actions.size(); ++u) {
        const auto& a = model.actions[u];
        if (a.kind == TruthKind::Degrade || a.kind == TruthKind::Improve) {
            out[u] = sample_dirichlet(a.true_alpha, rng);
        }
    }
    return out;
}

namespace detail {

inline double draw_normal(double mean, double stddev, Rng& rng) {
    if (stddev == 0.0) return mean;
    std::normal_distribution<double> n(mean, stddev);
    return n(rng);
}

inline std::size_t draw_categorical(std::span<const double> probs, Rng& rng) {
    std::discrete_distribution<std::size_t> d(probs.begin(), probs.end());
    return d(rng);
}

}  // namespace detail

inline GroundTruth step_truth(const GroundTruth& truth, ActionId action, const EnvModel& model,
                              const TrueParams& p_true, Rng& rng) {
    detail::require(action < model.actions.size() && action < p_true.size(), "action out of range");
    const TruthAction& a = model.actions[action];
    GroundTruth next = truth;
    switch (a.kind) {
        case TruthKind::Hold:
            return next;
        case TruthKind::Reset:
            return GroundTruth{};
        case TruthKind::Degrade:
            if (truth.location == 0) {
                next.location = detail::draw_categorical(a.initiation, rng);
                if (next.location != 0) {
                    std::uniform_real_distribution<double> init(model.init_delta_lo, model.init_delta_hi);
                    next.delta = init(rng);
                }
            } else {
                const auto k = static_cast<double>(detail::draw_categorical(p_true[action], rng));
                const double noise = std::max(0.0, detail::draw_normal(a.drift_mean, a.drift_std, rng));
                next.delta = truth.delta + model.step_scale * k + noise;
            }
            break;
        case TruthKind::Improve:
            if (truth.location != 0) {
                const auto k = static_cast<double>(detail::draw_categorical(p_true[action], rng));
                const double noise = std::min(0.0, detail::draw_normal(a.drift_mean, a.drift_std, rng));
                next.delta = std::max(model.delta_floor, truth.delta - model.step_scale * k + noise);
            }
            break;
    }
    next.failed = next.location != 0 && next.delta >= model.delta_fail;
    return next;
}

inline StateId true_state_of(const StateSpace& space, const GroundTruth& truth) {
    if (truth.location == 0) return 0;
    return space.index_of(truth.location, space.interval_of(truth.delta));
}

}  // namespace adaptwin
