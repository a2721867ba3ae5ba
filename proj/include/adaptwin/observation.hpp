#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "adaptwin/error.hpp"
#include "adaptwin/state_space.hpp"

namespace adaptwin {

using Rng = std::mt19937_64;

/// Classifier confusion matrix: row = true state, column = predicted label.
class ConfusionMatrix {
public:
    static constexpr double kRowTolerance = 1e-6;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
        detail::require(m_.rows() == m_.cols() && m_.rows() > 0, "confusion matrix must be square");
        detail::require(m_.allFinite() && (m_.array() >= 0.0).all(),
                        "confusion matrix entries must be finite and non-negative");
        for (Eigen::Index r = 0; r < m_.rows(); ++r) {
            detail::require(std::abs(m_.row(r).sum() - 1.0) <= kRowTolerance,
                            "confusion matrix row " + std::to_string(r) + " does not sum to 1");
        }
    }

    const Eigen::MatrixXd& entries() const noexcept { return m_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }

private:
    Eigen::MatrixXd m_;
};

/// Synthetic channel: `accuracy` on the diagonal, `adjacent_mass` split
/// over neighbouring levels of the same location, the remainder spread
/// uniformly over every other state. States without neighbours fold
/// `adjacent_mass` into the uniform remainder.
inline ConfusionMatrix synth_confusion(const StateSpace& space, double accuracy, double adjacent_mass) {
    detail::require(accuracy > 0.0 && accuracy <= 1.0, "accuracy must lie in (0, 1]");
    detail::require(adjacent_mass >= 0.0, "adjacent mass must be non-negative");
    detail::require(accuracy + adjacent_mass <= 1.0 + 1e-12, "accuracy + adjacent mass exceeds 1");
    const std::size_t n = space.n_states();
    detail::require(n > 1 || accuracy == 1.0, "a single-state channel must be exact");

    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (StateId d = 0; d < n; ++d) {
        std::vector<StateId> neighbours;
        if (d != 0) {
            const auto c = space.location_level_of(d);
            if (c.level > 1) neighbours.push_back(space.index_of(c.location, c.level - 1));
            if (c.level < space.n_levels()) neighbours.push_back(space.index_of(c.location, c.level + 1));
        }
        const auto row = static_cast<Eigen::Index>(d);
        m(row, row) = accuracy;
        double remainder = 1.0 - accuracy;
        if (!neighbours.empty()) {
            for (StateId nb : neighbours) {
                m(row, static_cast<Eigen::Index>(nb)) = adjacent_mass / static_cast<double>(neighbours.size());
            }
            remainder -= adjacent_mass;
        }
        const std::size_t others = n - 1 - neighbours.size();
        if (others > 0) {
            const double share = std::max(remainder, 0.0) / static_cast<double>(others);
            for (StateId k = 0; k < n; ++k) {
                if (k == d || std::find(neighbours.begin(), neighbours.end(), k) != neighbours.end()) continue;
                m(row, static_cast<Eigen::Index>(k)) = share;
            }
        } else if (remainder > 0.0 && !neighbours.empty()) {
            for (StateId nb : neighbours) {
                m(row, static_cast<Eigen::Index>(nb)) += remainder / static_cast<double>(neighbours.size());
            }
        }
        m.row(row) /= m.row(row).sum();
    }
    return ConfusionMatrix(std::move(m));
}

/// Reads a whitespace-separated matrix, one row per line.
inline ConfusionMatrix load_confusion(const std::string& path, std::size_t n_states) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open confusion matrix file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double v = 0.0;
        while (ls >> v) row.push_back(v);
        if (!ls.eof()) throw ValidationError("confusion matrix file '" + path + "': non-numeric entry");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    detail::require(rows.size() == n_states, "confusion matrix file '" + path + "' has " +
                                                 std::to_string(rows.size()) + " rows, expected " +
                                                 std::to_string(n_states));
    Eigen::MatrixXd m(n_states, n_states);
    for (std::size_t r = 0; r < n_states; ++r) {
        detail::require(rows[r].size() == n_states, "confusion matrix file '" + path + "': row " +
                                                         std::to_string(r) + " has wrong length");
        for (std::size_t c = 0; c < n_states; ++c) m(r, c) = rows[r][c];
    }
    return ConfusionMatrix(std::move(m));
}

inline StateId emit_observation(const ConfusionMatrix& confusion, StateId true_state, Rng& rng) {
    detail::require(true_state < confusion.size(), "true state out of range");
    const auto row = confusion.entries().row(static_cast<Eigen::Index>(true_state));
    // rows are strided in column-major storage
    std::vector<double> weights(static_cast<std::size_t>(row.size()));
    for (Eigen::Index c = 0; c < row.size(); ++c) weights[static_cast<std::size_t>(c)] = row(c);
    std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
    return dist(rng);
}

/// p(label | d) for every state d; not normalized over d.
inline Eigen::VectorXd likelihood_column(const ConfusionMatrix& confusion, StateId label) {
    detail::require(label < confusion.size(), "observation label out of range");
    return confusion.entries().col(static_cast<Eigen::Index>(label));
}

}  // namespace adaptwin
