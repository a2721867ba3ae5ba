#include <random>

#include <gtest/gtest.h>

#include "adaptwin/belief.hpp"
#include "adaptwin/planner.hpp"
#include "oracles.hpp"

using namespace adaptwin;

namespace {

Belief make(std::initializer_list<double> v) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) p(i++) = x;
    return Belief(p);
}

TransitionMatrix reset_matrix(std::size_t n) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m.row(0).setOnes();
    return TransitionMatrix(m);
}

/// Constant decision rule over [t0, t1].
Policy constant_policy(std::size_t n, std::size_t t0, std::size_t t1, std::vector<ActionId> rule) {
    Policy p;
    p.t_start = t0;
    p.t_end = t1;
    p.actions.assign(t1 - t0 + 1, rule);
    p.values.assign(t1 - t0 + 1, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
    return p;
}

StateSpace bridge() { return build_state_space(6, {0.30, 0.35, 0.45, 0.55, 0.65, 0.75, 0.80}); }

}  // namespace

TEST(Belief, Validation) {
    EXPECT_THROW(make({0.5, 0.6}), ValidationError);
    EXPECT_THROW(make({1.5, -0.5}), ValidationError);
    EXPECT_THROW(Belief::unit(3, 3), ValidationError);
    EXPECT_EQ(make({0.2, 0.4, 0.4}).map_state(), 1u);
}

TEST(Predict, IdentityAndReset) {
    const auto b = make({0.2, 0.3, 0.5});
    EXPECT_EQ(predict(b, TransitionMatrix(Eigen::MatrixXd::Identity(3, 3))).probs(), b.probs());
    EXPECT_EQ(predict(b, reset_matrix(3)).probs(), Eigen::Vector3d(1, 0, 0));
    EXPECT_THROW(predict(b, TransitionMatrix(Eigen::MatrixXd::Identity(2, 2))), ValidationError);
}

TEST(Predict, TwoStepsEqualSquare) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd m = oracle::random_stochastic(6, rng);
        const auto p = oracle::random_simplex(6, rng);
        const Belief b(Eigen::Map<const Eigen::VectorXd>(p.data(), 6));
        const TransitionMatrix tm(m);
        const auto twice = predict(predict(b, tm), tm);
        const auto squared = predict(b, TransitionMatrix(m * m));
        EXPECT_TRUE(twice.probs().isApprox(squared.probs(), 1e-12));
    }
}

TEST(Predict, PreservesNormalization) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = oracle::random_simplex(10, rng);
        const Belief b(Eigen::Map<const Eigen::VectorXd>(p.data(), 10));
        const auto out = predict(b, TransitionMatrix(oracle::random_stochastic(10, rng)));
        EXPECT_NEAR(out.probs().sum(), 1.0, 1e-12);
        EXPECT_TRUE((out.probs().array() >= 0.0).all());
    }
}

TEST(Correct, Examples) {
    const auto u = Belief::uniform(3);
    const Eigen::Vector3d lik(0.2, 0.6, 0.2);
    EXPECT_TRUE(correct(u, lik).probs().isApprox(lik, 1e-15));
    const auto b = make({0.2, 0.3, 0.5});
    EXPECT_TRUE(correct(b, Eigen::Vector3d::Ones()).probs().isApprox(b.probs(), 1e-15));
    EXPECT_EQ(correct(make({0.5, 0.5, 0.0}), Eigen::Vector3d(0, 1, 1)).probs(), Eigen::Vector3d(0, 1, 0));
}

TEST(Correct, ConflictAndBadInput) {
    EXPECT_THROW(correct(make({1, 0, 0}), Eigen::Vector3d(0, 1, 1)), ConflictError);
    EXPECT_THROW(correct(make({1, 0, 0}), Eigen::Vector3d(-1, 1, 1)), ValidationError);
    EXPECT_THROW(correct(make({1, 0, 0}), Eigen::Vector2d(1, 1)), ValidationError);
}

TEST(Assimilate, MatchesJointTable) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::MatrixXd P = oracle::random_stochastic(3, rng);
        Eigen::MatrixXd conf = oracle::random_stochastic(3, rng).transpose();
        const auto p = oracle::random_simplex(3, rng);
        const Belief b(Eigen::Map<const Eigen::VectorXd>(p.data(), 3));
        const std::vector<TransitionMatrix> mats{TransitionMatrix(Eigen::MatrixXd::Identity(3, 3)), TransitionMatrix(P)};
        const StateId label = rng() % 3;
        const auto got = assimilate(b, 1, label, mats, ConfusionMatrix(conf));
        const auto expect = oracle::joint_table_posterior(b.probs(), P, conf, label);
        EXPECT_LE((got.probs() - expect).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Assimilate, HandInstance) {
    Eigen::Matrix3d P;
    P << 0.7, 0.0, 0.0,
         0.3, 0.6, 0.0,
         0.0, 0.4, 1.0;
    Eigen::Matrix3d conf;
    conf << 0.8, 0.2, 0.0,
            0.1, 0.8, 0.1,
            0.0, 0.2, 0.8;
    const auto b = make({0.5, 0.5, 0.0});
    const std::vector<TransitionMatrix> mats{TransitionMatrix(P)};
    const auto got = assimilate(b, 0, 1, mats, ConfusionMatrix(conf));
    // predicted (0.35, 0.45, 0.2); times column (0.2, 0.8, 0.2) -> (0.07, 0.36, 0.04) / 0.47
    EXPECT_NEAR(got[0], 0.07 / 0.47, 1e-12);
    EXPECT_NEAR(got[1], 0.36 / 0.47, 1e-12);
    EXPECT_NEAR(got[2], 0.04 / 0.47, 1e-12);
}

TEST(Assimilate, ExactChannel) {
    std::mt19937_64 rng(4);
    const ConfusionMatrix exact(Eigen::MatrixXd::Identity(5, 5));
    const std::vector<TransitionMatrix> mats{perturb_normalize(TransitionMatrix(Eigen::MatrixXd::Identity(5, 5)), 1e-6)};
    for (StateId label = 0; label < 5; ++label) {
        const auto got = assimilate(Belief::unit(5, (label + 2) % 5), 0, label, mats, exact);
        EXPECT_EQ(got.probs(), Eigen::VectorXd::Unit(5, static_cast<Eigen::Index>(label)));
    }
}

TEST(Assimilate, UninformativeChannelEqualsPredict) {
    std::mt19937_64 rng(5);
    const ConfusionMatrix flat(Eigen::MatrixXd::Constant(4, 4, 0.25));
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<TransitionMatrix> mats{TransitionMatrix(oracle::random_stochastic(4, rng))};
        const auto p = oracle::random_simplex(4, rng);
        const Belief b(Eigen::Map<const Eigen::VectorXd>(p.data(), 4));
        EXPECT_TRUE(assimilate(b, 0, 2, mats, flat).probs().isApprox(predict(b, mats[0]).probs(), 1e-14));
    }
}

TEST(Assimilate, PermutationChainRecoversTruth) {
    const std::size_t n = 6;
    Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t d = 0; d < n; ++d) perm((d + 1) % n, d) = 1.0;
    const std::vector<TransitionMatrix> mats{TransitionMatrix(perm)};
    const ConfusionMatrix exact(Eigen::MatrixXd::Identity(n, n));
    Belief b = Belief::unit(n, 0);
    StateId truth = 0;
    for (int t = 0; t < 20; ++t) {
        truth = (truth + 1) % n;
        b = assimilate(b, 0, truth, mats, exact);
        EXPECT_EQ(b.map_state(), truth);
        EXPECT_EQ(b[truth], 1.0);
    }
}

TEST(Assimilate, ConflictRetriesWithPerturbation) {
    const std::vector<TransitionMatrix> mats{TransitionMatrix(Eigen::MatrixXd::Identity(3, 3))};
    const ConfusionMatrix exact(Eigen::MatrixXd::Identity(3, 3));
    EXPECT_THROW(assimilate(Belief::unit(3, 0), 0, 2, mats, exact), ConflictError);
    const auto got = assimilate(Belief::unit(3, 0), 0, 2, mats, exact, 1e-6);
    EXPECT_EQ(got.map_state(), 2u);
    EXPECT_THROW(assimilate(Belief::unit(3, 0), 1, 2, mats, exact), ValidationError);
}

TEST(Forecast, OneStepUnitBelief) {
    const std::size_t n = 3;
    const std::vector<TransitionMatrix> mats{TransitionMatrix(Eigen::MatrixXd::Identity(n, n)), reset_matrix(n)};
    Policy p = constant_policy(n, 0, 2, {0, 0, 1});
    p.actions[1] = {1, 1, 0};
    const auto f = forecast(Belief::unit(n, 2), p, mats, 0, 1);
    ASSERT_EQ(f.state_beliefs.size(), 1u);
    // state 2 moves under pi_0 (reset) to 0, then acts by pi_1(0)
    EXPECT_EQ(f.state_beliefs[0].probs(), Eigen::Vector3d(1, 0, 0));
    EXPECT_EQ(f.action_beliefs[0], Eigen::Vector2d(0, 1));
}

TEST(Forecast, ResetOnlyPolicy) {
    const auto s = bridge();
    std::vector<TransitionMatrix> mats{reset_matrix(s.n_states())};
    const auto f = forecast(Belief::uniform(s.n_states()), constant_policy(s.n_states(), 0, 5, std::vector<ActionId>(37, 0)),
                            mats, 0, 5);
    ASSERT_EQ(f.state_beliefs.size(), 5u);
    for (const auto& b : f.state_beliefs) EXPECT_EQ(b[0], 1.0);
}

TEST(Forecast, MixtureConservesMass) {
    std::mt19937_64 rng(6);
    const std::size_t n = 8;
    std::vector<TransitionMatrix> mats;
    for (int u = 0; u < 3; ++u) mats.emplace_back(oracle::random_stochastic(n, rng));
    Policy p = constant_policy(n, 2, 12, std::vector<ActionId>(n, 0));
    for (auto& rule : p.actions) {
        for (auto& a : rule) a = rng() % 3;
    }
    const auto init = oracle::random_simplex(n, rng);
    const Belief b(Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(n)));
    const auto f = forecast(b, p, mats, 2, 12);
    ASSERT_EQ(f.state_beliefs.size(), 10u);
    Eigen::VectorXd cur = b.probs();
    for (std::size_t i = 0; i < 10; ++i) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t d = 0; d < n; ++d) {
            next += cur(static_cast<Eigen::Index>(d)) * mats[p.actions[i][d]].entries().col(static_cast<Eigen::Index>(d));
        }
        EXPECT_TRUE(f.state_beliefs[i].probs().isApprox(next, 1e-12));
        EXPECT_NEAR(f.state_beliefs[i].probs().sum(), 1.0, 1e-12);
        EXPECT_NEAR(f.action_beliefs[i].sum(), 1.0, 1e-12);
        cur = next;
    }
}

TEST(Forecast, HorizonChecks) {
    const std::vector<TransitionMatrix> mats{TransitionMatrix(Eigen::MatrixXd::Identity(2, 2))};
    const auto p = constant_policy(2, 0, 3, {0, 0});
    EXPECT_THROW(forecast(Belief::uniform(2), p, mats, 1, 4), ValidationError);
    EXPECT_THROW(forecast(Belief::uniform(2), p, mats, 2, 2), ValidationError);
}
