#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/error.hpp"
#include "adaptwin/state_space.hpp"

namespace adaptwin {

/// Concentration parameters of a Dirichlet over step probabilities
/// (entry k is the pseudo-count for moving k levels).
struct DirichletParams {
    std::vector<double> alpha;

    DirichletParams() = default;
    explicit DirichletParams(std::vector<double> a) : alpha(std::move(a)) {
        detail::require(!alpha.empty(), "Dirichlet needs at least one concentration parameter");
        for (double v : alpha) {
            detail::require(std::isfinite(v) && v > 0.0,
                            "Dirichlet concentration parameters must be positive");
        }
    }

    std::size_t size() const noexcept { return alpha.size(); }
    double total() const { return std::accumulate(alpha.begin(), alpha.end(), 0.0); }

    friend bool operator==(const DirichletParams&, const DirichletParams&) = default;
};

struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    BetaParams() = default;
    BetaParams(double a_, double b_) : a(a_), b(b_) {
        detail::require(std::isfinite(a) && a > 0.0 && std::isfinite(b) && b > 0.0,
                        "Beta shape parameters must be positive");
    }

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Observed step-transition tallies for one action. Transitions the step
/// model cannot represent are counted separately instead of being dropped.
struct StepCounts {
    std::vector<std::size_t> counts;
    /// Transitions that contradict the action kind (wrong direction, location
    /// change, step beyond the maximum).
    std::size_t inconsistent = 0;
    /// Transitions out of a state whose column does not depend on the step
    /// probabilities (absorbing terminal level, clamped floor).
    std::size_t uninformative = 0;

    StepCounts() = default;
    explicit StepCounts(std::size_t bins) : counts(bins, 0) {}

    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

    friend bool operator==(const StepCounts&, const StepCounts&) = default;
};

enum class Statistic { Mean, Mode };

enum class ActionKind { Degrade, Improve, Reset, Frozen };

inline std::string to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::Degrade: return "degrade";
        case ActionKind::Improve: return "improve";
        case ActionKind::Reset: return "reset";
        case ActionKind::Frozen: return "frozen-matrix";
    }
    return "unknown";
}

inline std::string to_string(Statistic s) { return s == Statistic::Mean ? "mean" : "mode"; }

/// Column-stochastic matrix: entry (arrival, start) = p(arrival | start).
class TransitionMatrix {
public:
    static constexpr double kTolerance = 1e-9;

    TransitionMatrix() = default;
    explicit TransitionMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
        detail::require(m_.rows() == m_.cols() && m_.rows() > 0,
                        "transition matrix must be square and non-empty");
        detail::require((m_.array() >= 0.0).all() && m_.allFinite(),
                        "transition matrix entries must be finite and non-negative");
        for (Eigen::Index c = 0; c < m_.cols(); ++c) {
            detail::require(std::abs(m_.col(c).sum() - 1.0) <= kTolerance,
                            "transition matrix column " + std::to_string(c) + " does not sum to 1");
        }
    }

    const Eigen::MatrixXd& entries() const noexcept { return m_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    double operator()(StateId arrival, StateId start) const {
        return m_(static_cast<Eigen::Index>(arrival), static_cast<Eigen::Index>(start));
    }

private:
    Eigen::MatrixXd m_;
};

/// Per-action transition model declaration.
struct ActionModel {
    std::string name;
    ActionKind kind = ActionKind::Degrade;
    std::size_t max_step = 1;
    std::variant<std::monostate, DirichletParams, BetaParams> prior;
    double perturbation = 1e-6;
    std::optional<TransitionMatrix> frozen;

    bool learnable() const {
        return (kind == ActionKind::Degrade || kind == ActionKind::Improve) &&
               !std::holds_alternative<std::monostate>(prior);
    }

    void validate() const {
        detail::require(perturbation >= 0.0 && std::isfinite(perturbation),
                        "action '" + name + "': perturbation must be non-negative");
        switch (kind) {
            case ActionKind::Degrade:
            case ActionKind::Improve:
                detail::require(max_step >= 1, "action '" + name + "': max_step must be >= 1");
                if (const auto* d = std::get_if<DirichletParams>(&prior)) {
                    detail::require(d->size() == max_step + 1,
                                    "action '" + name + "': Dirichlet prior length must be max_step+1");
                } else if (std::holds_alternative<BetaParams>(prior)) {
                    detail::require(max_step == 1, "action '" + name + "': Beta prior requires max_step=1");
                } else {
                    detail::require(false, "action '" + name + "': degrade/improve actions need a prior");
                }
                break;
            case ActionKind::Reset:
                detail::require(std::holds_alternative<std::monostate>(prior),
                                "action '" + name + "': reset actions take no prior");
                break;
            case ActionKind::Frozen:
                detail::require(frozen.has_value(), "action '" + name + "': frozen action needs a matrix");
                break;
        }
    }
};

// -- conjugate statistics and updates ---------------------------------------

inline std::vector<double> dirichlet_statistic(const DirichletParams& params, Statistic statistic) {
    const double total = params.total();
    std::vector<double> p(params.size());
    if (statistic == Statistic::Mean) {
        for (std::size_t k = 0; k < p.size(); ++k) p[k] = params.alpha[k] / total;
        return p;
    }
    for (double a : params.alpha) {
        if (a <= 1.0) throw ValidationError("Dirichlet mode is undefined unless every alpha > 1");
    }
    const double denom = total - static_cast<double>(params.size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = (params.alpha[k] - 1.0) / denom;
    return p;
}

inline DirichletParams update_dirichlet(const DirichletParams& prior, const StepCounts& counts) {
    detail::require(prior.size() == counts.counts.size(),
                    "Dirichlet prior and step counts differ in length");
    std::vector<double> alpha = prior.alpha;
    for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] += static_cast<double>(counts.counts[k]);
    return DirichletParams(std::move(alpha));
}

inline BetaParams update_beta(const BetaParams& prior, std::size_t stay_count, std::size_t move_count) {
    return BetaParams(prior.a + static_cast<double>(move_count), prior.b + static_cast<double>(stay_count));
}

/// Step probabilities (stay, move) implied by a Beta over the move probability.
inline std::vector<double> beta_statistic(const BetaParams& params, Statistic statistic) {
    // each component computed directly so it matches the two-bin Dirichlet bit for bit
    if (statistic == Statistic::Mean) {
        const double total = params.b + params.a;
        return {params.b / total, params.a / total};
    }
    if (params.a <= 1.0 || params.b <= 1.0) {
        throw ValidationError("Beta mode is undefined unless a > 1 and b > 1");
    }
    const double denom = params.b + params.a - 2.0;
    return {(params.b - 1.0) / denom, (params.a - 1.0) / denom};
}

// -- state-dependent Dirichlet table ----------------------------------------

/// One Dirichlet over arrival states for each (start state, action) pair.
struct StateDependentDirichlet {
    std::map<std::pair<StateId, ActionId>, DirichletParams> table;

    static StateDependentDirichlet uniform(std::size_t n_states, std::size_t n_actions, double alpha) {
        StateDependentDirichlet out;
        for (StateId d = 0; d < n_states; ++d) {
            for (ActionId u = 0; u < n_actions; ++u) {
                out.table.emplace(std::pair{d, u}, DirichletParams(std::vector<double>(n_states, alpha)));
            }
        }
        return out;
    }

    friend bool operator==(const StateDependentDirichlet&, const StateDependentDirichlet&) = default;
};

struct Transition {
    StateId from = 0;
    ActionId action = 0;
    StateId to = 0;
};

inline StateDependentDirichlet update_state_dependent(StateDependentDirichlet table,
                                                      std::span<const Transition> transitions) {
    for (const auto& tr : transitions) {
        auto it = table.table.find({tr.from, tr.action});
        detail::require(it != table.table.end(), "no Dirichlet row for state " + std::to_string(tr.from) +
                                                     " under action " + std::to_string(tr.action));
        detail::require(tr.to < it->second.size(), "arrival state out of range");
        it->second.alpha[tr.to] += 1.0;
    }
    return table;
}

inline TransitionMatrix state_dependent_matrix(const StateDependentDirichlet& table, ActionId action,
                                               std::size_t n_states, Statistic statistic) {
    Eigen::MatrixXd m(n_states, n_states);
    for (StateId d = 0; d < n_states; ++d) {
        auto it = table.table.find({d, action});
        detail::require(it != table.table.end() && it->second.size() == n_states,
                        "state-dependent table incomplete for action " + std::to_string(action));
        const auto p = dirichlet_statistic(it->second, statistic);
        for (StateId k = 0; k < n_states; ++k) m(k, d) = p[k];
    }
    return TransitionMatrix(std::move(m));
}

// -- step tallies -----------------------------------------------------------

namespace detail {

enum class StepClass { Counted, Inconsistent, Uninformative };

struct ClassifiedStep {
    StepClass cls = StepClass::Inconsistent;
    std::size_t step = 0;
};

inline ClassifiedStep classify_step(const StateSpace& space, StateId from_id, StateId to_id,
                                    ActionKind kind, std::size_t max_step) {
    const StateCoords from = space.location_level_of(from_id);
    const StateCoords to = space.location_level_of(to_id);
    const auto counted = [max_step](std::ptrdiff_t step) {
        if (step < 0 || static_cast<std::size_t>(step) > max_step) return ClassifiedStep{StepClass::Inconsistent, 0};
        return ClassifiedStep{StepClass::Counted, static_cast<std::size_t>(step)};
    };
    const auto level_diff = [&](std::size_t a, std::size_t b) {
        return static_cast<std::ptrdiff_t>(a) - static_cast<std::ptrdiff_t>(b);
    };

    if (kind == ActionKind::Degrade) {
        if (from.location == 0) {
            // damage initiation at level k counts as a k-step move
            return to.location == 0 ? counted(0) : counted(static_cast<std::ptrdiff_t>(to.level));
        }
        if (to.location != from.location) return {StepClass::Inconsistent, 0};
        if (from.level == space.n_levels()) {
            return to.level == from.level ? ClassifiedStep{StepClass::Uninformative, 0}
                                          : ClassifiedStep{StepClass::Inconsistent, 0};
        }
        return counted(level_diff(to.level, from.level));
    }

    // improvement: never returns to undamaged, floors at level 1
    if (from.location == 0) {
        return to.location == 0 ? ClassifiedStep{StepClass::Uninformative, 0}
                                : ClassifiedStep{StepClass::Inconsistent, 0};
    }
    if (to.location != from.location) return {StepClass::Inconsistent, 0};
    if (from.level == 1) {
        return to.level == 1 ? ClassifiedStep{StepClass::Uninformative, 0}
                             : ClassifiedStep{StepClass::Inconsistent, 0};
    }
    return counted(level_diff(from.level, to.level));
}

}  // namespace detail

/// Counts 0..max_step level moves observed under `action` along a state
/// history. `actions[t]` is the action applied between `states[t]` and
/// `states[t+1]`.
inline StepCounts tally_step_counts(const StateSpace& space, std::span<const StateId> states,
                                    std::span<const ActionId> actions, ActionId action, ActionKind kind,
                                    std::size_t max_step) {
    detail::require(kind == ActionKind::Degrade || kind == ActionKind::Improve,
                    "step counts are only defined for degrade/improve actions");
    detail::require(states.empty() ? actions.empty() : actions.size() + 1 == states.size(),
                    "action history must be one shorter than state history");
    StepCounts out(max_step + 1);
    for (std::size_t t = 0; t < actions.size(); ++t) {
        if (actions[t] != action) continue;
        const auto c = detail::classify_step(space, states[t], states[t + 1], kind, max_step);
        switch (c.cls) {
            case detail::StepClass::Counted: ++out.counts[c.step]; break;
            case detail::StepClass::Inconsistent: ++out.inconsistent; break;
            case detail::StepClass::Uninformative: ++out.uninformative; break;
        }
    }
    return out;
}

// -- matrix builders --------------------------------------------------------

/// Builds the action's transition matrix from step probabilities
/// `probs` = (p^0, ..., p^I). Moves that overshoot a location's ladder
/// accumulate on its terminal level.
inline TransitionMatrix build_matrix(const StateSpace& space, const ActionModel& model,
                                     std::span<const double> probs = {}) {
    const std::size_t n = space.n_states();
    const std::size_t levels = space.n_levels();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);

    switch (model.kind) {
        case ActionKind::Reset:
            m.row(0).setOnes();
            return TransitionMatrix(std::move(m));
        case ActionKind::Frozen:
            detail::require(model.frozen.has_value() && model.frozen->size() == n,
                            "frozen matrix does not match the state space");
            return *model.frozen;
        case ActionKind::Degrade:
        case ActionKind::Improve:
            break;
    }

    detail::require(probs.size() == model.max_step + 1, "step probability vector has wrong length");
    double sum = 0.0;
    for (double p : probs) {
        detail::require(p >= 0.0 && std::isfinite(p), "step probabilities must be non-negative");
        sum += p;
    }
    detail::require(std::abs(sum - 1.0) <= 1e-9, "step probabilities must sum to 1");

    const auto idx = [](StateId s) { return static_cast<Eigen::Index>(s); };

    if (model.kind == ActionKind::Degrade) {
        const double per_location = 1.0 / static_cast<double>(space.n_locations());
        m(0, 0) += probs[0];
        for (std::size_t s = 1; s < probs.size(); ++s) {
            const std::size_t level = std::min(s, levels);
            for (std::size_t y = 1; y <= space.n_locations(); ++y) {
                m(idx(space.index_of(y, level)), 0) += probs[s] * per_location;
            }
        }
        for (std::size_t y = 1; y <= space.n_locations(); ++y) {
            for (std::size_t k = 1; k <= levels; ++k) {
                const StateId from = space.index_of(y, k);
                if (k == levels) {
                    m(idx(from), idx(from)) = 1.0;
                    continue;
                }
                for (std::size_t s = 0; s < probs.size(); ++s) {
                    m(idx(space.index_of(y, std::min(k + s, levels))), idx(from)) += probs[s];
                }
            }
        }
    } else {
        m(0, 0) = 1.0;
        for (std::size_t y = 1; y <= space.n_locations(); ++y) {
            for (std::size_t k = 1; k <= levels; ++k) {
                const StateId from = space.index_of(y, k);
                for (std::size_t s = 0; s < probs.size(); ++s) {
                    const std::size_t to = s >= k ? 1 : std::max<std::size_t>(k - s, 1);
                    m(idx(space.index_of(y, to)), idx(from)) += probs[s];
                }
            }
        }
    }
    return TransitionMatrix(std::move(m));
}

/// Adds `epsilon` to every entry and renormalizes each column.
inline TransitionMatrix perturb_normalize(const TransitionMatrix& matrix, double epsilon) {
    detail::require(epsilon >= 0.0 && std::isfinite(epsilon), "perturbation must be non-negative");
    if (epsilon == 0.0) return matrix;
    Eigen::MatrixXd m = matrix.entries().array() + epsilon;
    for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) /= m.col(c).sum();
    return TransitionMatrix(std::move(m));
}

/// Step probabilities for a learnable model under the chosen statistic.
inline std::vector<double> step_probabilities(const ActionModel& model, Statistic statistic) {
    if (const auto* d = std::get_if<DirichletParams>(&model.prior)) return dirichlet_statistic(*d, statistic);
    if (const auto* b = std::get_if<BetaParams>(&model.prior)) return beta_statistic(*b, statistic);
    return {};
}

}  // namespace adaptwin
