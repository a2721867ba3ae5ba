#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/error.hpp"
#include "adaptwin/observation.hpp"
#include "adaptwin/policy.hpp"
#include "adaptwin/state_space.hpp"
#include "adaptwin/transition_model.hpp"

namespace adaptwin {

/// Normalized categorical distribution over digital states.
class Belief {
public:
    static constexpr double kTolerance = 1e-9;

    Belief() = default;
    explicit Belief(Eigen::VectorXd probs) : p_(std::move(probs)) {
        detail::require(p_.size() > 0, "belief must be non-empty");
        detail::require(p_.allFinite() && (p_.array() >= 0.0).all(), "belief entries must be non-negative");
        detail::require(std::abs(p_.sum() - 1.0) <= kTolerance, "belief must sum to 1");
    }

    static Belief unit(std::size_t n, StateId state) {
        detail::require(state < n, "state out of range");
        Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        v(static_cast<Eigen::Index>(state)) = 1.0;
        return Belief(std::move(v));
    }

    static Belief uniform(std::size_t n) {
        detail::require(n > 0, "belief must be non-empty");
        return Belief(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
    }

    const Eigen::VectorXd& probs() const noexcept { return p_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(p_.size()); }
    double operator[](StateId d) const { return p_(static_cast<Eigen::Index>(d)); }

    /// Most probable state; ties resolve to the lowest index.
    StateId map_state() const {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < p_.size(); ++i) {
            if (p_(i) > p_(best)) best = i;
        }
        return static_cast<StateId>(best);
    }

private:
    Eigen::VectorXd p_;
};

inline Belief predict(const Belief& belief, const TransitionMatrix& matrix) {
    detail::require(matrix.size() == belief.size(), "transition matrix and belief differ in dimension");
    Eigen::VectorXd next = matrix.entries() * belief.probs();
    // column-stochastic products drift from 1 only by rounding
    next /= next.sum();
    return Belief(std::move(next));
}

/// Bayes correction: posterior proportional to belief times likelihood.
inline Belief correct(const Belief& belief, const Eigen::VectorXd& likelihood) {
    detail::require(static_cast<std::size_t>(likelihood.size()) == belief.size(),
                    "likelihood and belief differ in dimension");
    detail::require(likelihood.allFinite() && (likelihood.array() >= 0.0).all(),
                    "likelihood entries must be non-negative");
    Eigen::VectorXd post = belief.probs().cwiseProduct(likelihood);
    const double z = post.sum();
    if (!(z > 0.0)) {
        throw ConflictError("observation has zero probability under the predicted belief; "
                            "perturb the transition matrices and retry");
    }
    return Belief(post / z);
}

/// One predictor-corrector step. When `fallback_epsilon` is set, a
/// conflict is retried once with the action's matrix perturbed by it.
inline Belief assimilate(const Belief& previous, ActionId action, StateId label,
                         std::span<const TransitionMatrix> matrices, const ConfusionMatrix& channel,
                         std::optional<double> fallback_epsilon = std::nullopt) {
    detail::require(action < matrices.size(), "action out of range");
    const Eigen::VectorXd likelihood = likelihood_column(channel, label);
    try {
        return correct(predict(previous, matrices[action]), likelihood);
    } catch (const ConflictError&) {
        if (!fallback_epsilon || *fallback_epsilon <= 0.0) throw;
        return correct(predict(previous, perturb_normalize(matrices[action], *fallback_epsilon)), likelihood);
    }
}

/// Probability of each action when acting on `belief` with the decision rule of time t.
inline Eigen::VectorXd action_belief(const Policy& policy, std::size_t t, const Belief& belief,
                                     std::size_t n_actions) {
    detail::require(policy.covers(t), "time " + std::to_string(t) + " outside the policy horizon");
    detail::require(policy.n_states() == belief.size(), "policy and belief differ in dimension");
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_actions));
    for (StateId d = 0; d < belief.size(); ++d) {
        const ActionId u = policy.action(t, d);
        detail::require(u < n_actions, "policy refers to an unknown action");
        mass(static_cast<Eigen::Index>(u)) += belief[d];
    }
    return mass;
}

struct Forecast {
    std::size_t t_current = 0;
    /// Entry i describes time t_current + 1 + i.
    std::vector<Belief> state_beliefs;
    std::vector<Eigen::VectorXd> action_beliefs;
};

/// Unrolls the prediction network from t_current to t_predict: the
/// policy partitions the belief by action, each part moves under its
/// action's matrix, and the parts are summed.
inline Forecast forecast(const Belief& belief, const Policy& policy, std::span<const TransitionMatrix> matrices,
                         std::size_t t_current, std::size_t t_predict) {
    detail::require(t_predict > t_current, "prediction time must follow the current time");
    detail::require(policy.covers(t_current) && policy.covers(t_predict),
                    "forecast horizon extends beyond the policy");
    const std::size_t n_actions = matrices.size();
    const auto n = static_cast<Eigen::Index>(belief.size());
    Forecast out;
    out.t_current = t_current;
    Belief current = belief;
    for (std::size_t t = t_current; t < t_predict; ++t) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
        for (ActionId u = 0; u < n_actions; ++u) {
            Eigen::VectorXd part = Eigen::VectorXd::Zero(n);
            for (StateId d = 0; d < current.size(); ++d) {
                if (policy.action(t, d) == u) part(static_cast<Eigen::Index>(d)) = current[d];
            }
            if (part.isZero(0.0)) continue;
            detail::require(matrices[u].size() == current.size(), "transition matrix dimension mismatch");
            next += matrices[u].entries() * part;
        }
        next /= next.sum();
        current = Belief(std::move(next));
        out.state_beliefs.push_back(current);
        out.action_beliefs.push_back(action_belief(policy, t + 1, current, n_actions));
    }
    return out;
}

}  // namespace adaptwin
