#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "icq/dataset.hpp"
#include "icq/operators.hpp"
#include "icq/rng.hpp"

using namespace icq;

namespace {

// behavior estimate defined directly by a joint table
BehaviorEstimate make_behavior(int num_states, int num_actions,
                               const std::vector<std::vector<double>>& rows) {
    BehaviorEstimate mu;
    mu.num_agents = 1;
    mu.action_space = {num_actions};
    mu.num_states = num_states;
    mu.joint.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
    mu.state_visits.assign(num_states, 1);
    for (int s = 0; s < num_states; ++s)
        for (int a = 0; a < num_actions; ++a)
            mu.joint[static_cast<std::size_t>(s) * num_actions + a] = rows[s][a];
    mu.per_agent = {mu.joint};
    mu.agent_counts = {std::vector<long long>(mu.joint.size(), 1)};
    return mu;
}

// independent oracle: plain value iteration restricted to seen actions,
// written from the Bellman recursion directly
QTable value_iteration_oracle(const TabularMdp& mdp, const std::vector<std::uint8_t>& seen,
                              double tol, int iters) {
    QTable q(mdp.num_states, mdp.num_joint_actions);
    for (int it = 0; it < iters; ++it) {
        QTable next(mdp.num_states, mdp.num_joint_actions);
        double delta = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_joint_actions; ++a) {
                double v = mdp.r(s, a);
                for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                    if (mdp.p(s, a, s2) == 0.0) continue;
                    double best = -1e300;
                    for (int a2 = 0; a2 < mdp.num_joint_actions; ++a2)
                        if (seen[s2 * mdp.num_joint_actions + a2] && q.at(s2, a2) > best)
                            best = q.at(s2, a2);
                    v += mdp.gamma * mdp.p(s, a, s2) * best;
                }
                next.at(s, a) = v;
                delta = std::max(delta, std::abs(v - q.at(s, a)));
            }
        }
        q = next;
        if (delta < tol) break;
    }
    return q;
}

TabularMdp three_state_mdp() {
    TabularMdp mdp;
    mdp.num_states = 3;
    mdp.num_joint_actions = 2;
    mdp.gamma = 0.9;
    mdp.horizon = 50;
    mdp.initial_state = 0;
    mdp.transition.assign(3 * 2 * 3, 0.0);
    mdp.reward.assign(3 * 2, 0.0);
    // action 0 cycles 0->1->2->0, action 1 stays with a tilt
    mdp.p_ref(0, 0, 1) = 1.0;
    mdp.p_ref(1, 0, 2) = 1.0;
    mdp.p_ref(2, 0, 0) = 1.0;
    mdp.p_ref(0, 1, 0) = 0.7;
    mdp.p_ref(0, 1, 2) = 0.3;
    mdp.p_ref(1, 1, 1) = 1.0;
    mdp.p_ref(2, 1, 1) = 0.5;
    mdp.p_ref(2, 1, 2) = 0.5;
    mdp.r_ref(0, 0) = 0.2;
    mdp.r_ref(0, 1) = 1.0;
    mdp.r_ref(1, 0) = 0.0;
    mdp.r_ref(1, 1) = 0.4;
    mdp.r_ref(2, 0) = 0.9;
    mdp.r_ref(2, 1) = 0.1;
    mdp.validate();
    return mdp;
}

}  // namespace

TEST_CASE("icq target on constant values is the constant") {
    QTable q(1, 2);
    q.at(0, 0) = 3.25;
    q.at(0, 1) = 3.25;
    BehaviorEstimate mu = make_behavior(1, 2, {{0.5, 0.5}});
    for (double alpha : {1e-6, 0.1, 1.0, 100.0, 1e9})
        CHECK(icq_target(q, mu, 0, alpha) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("icq target closed form e/(e+1)") {
    QTable q(1, 2);
    q.at(0, 0) = 1.0;
    q.at(0, 1) = 0.0;
    BehaviorEstimate mu = make_behavior(1, 2, {{0.5, 0.5}});
    double expected = std::exp(1.0) / (std::exp(1.0) + 1.0);
    CHECK(icq_target(q, mu, 0, 1.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("alpha limits: batch max and expected sarsa") {
    QTable q(1, 2);
    q.at(0, 0) = 2.0;
    q.at(0, 1) = 5.0;
    BehaviorEstimate mu = make_behavior(1, 2, {{0.7, 0.3}});
    CHECK(icq_target(q, mu, 0, 1e-9) == doctest::Approx(5.0).epsilon(1e-9));
    double sarsa = 0.7 * 2.0 + 0.3 * 5.0;
    CHECK(icq_target(q, mu, 0, 1e9) == doctest::Approx(sarsa).epsilon(1e-9));
}

TEST_CASE("icq target errors without seen actions") {
    QTable q(1, 2);
    BehaviorEstimate mu = make_behavior(1, 2, {{0.5, 0.5}});
    mu.state_visits[0] = 0;
    CHECK_THROWS(icq_target(q, mu, 0, 1.0));
}

TEST_CASE("bcq target max, mask, and tie-break") {
    QTable q(1, 2);
    q.at(0, 0) = 2.0;
    q.at(0, 1) = 5.0;
    std::vector<std::uint8_t> both{1, 1}, only0{1, 0}, none{0, 0};
    CHECK(bcq_target(q, both, 0) == 5.0);
    CHECK(bcq_target(q, only0, 0) == 2.0);
    CHECK_THROWS(bcq_target(q, none, 0));
    q.at(0, 0) = 3.0;
    q.at(0, 1) = 3.0;
    CHECK(bcq_target(q, both, 0) == 3.0);
}

TEST_CASE("softmax weights: normalized, supported on seen actions, shift invariant") {
    SplitMix64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        int na = 2 + rng.uniform_int(7);
        std::vector<double> q(na), mu(na, 0.0);
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            q[a] = rng.uniform(-5.0, 5.0);
            if (rng.next_double() < 0.7) mu[a] = rng.uniform(0.05, 1.0);
            sum += mu[a];
        }
        if (sum == 0.0) mu[0] = sum = 1.0;
        for (double& m : mu) m /= sum;
        double alpha = std::exp(rng.uniform(std::log(0.01), std::log(100.0)));

        SoftmaxTarget w = icq_weights(q, mu, alpha);
        double ws = 0.0;
        for (std::size_t i = 0; i < w.actions.size(); ++i) {
            CHECK(w.weights[i] >= 0.0);
            CHECK(mu[w.actions[i]] > 0.0);
            ws += w.weights[i];
        }
        CHECK(ws == doctest::Approx(1.0).epsilon(1e-10));

        // adding a constant to Q leaves the weights unchanged
        std::vector<double> shifted = q;
        for (double& v : shifted) v += 7.5;
        SoftmaxTarget w2 = icq_weights(shifted, mu, alpha);
        REQUIRE(w2.weights.size() == w.weights.size());
        for (std::size_t i = 0; i < w.weights.size(); ++i)
            CHECK(std::abs(w2.weights[i] - w.weights[i]) < 1e-12);
    }
}

TEST_CASE("icq target is non-decreasing in 1/alpha") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        int na = 2 + rng.uniform_int(5);
        QTable q(1, na);
        std::vector<std::vector<double>> rows(1, std::vector<double>(na));
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            q.at(0, a) = rng.uniform(-3.0, 3.0);
            rows[0][a] = rng.uniform(0.05, 1.0);
            sum += rows[0][a];
        }
        for (double& m : rows[0]) m /= sum;
        BehaviorEstimate mu = make_behavior(1, na, rows);
        double prev = -1e300;
        for (double alpha : {100.0, 10.0, 1.0, 0.3, 0.1, 0.01}) {
            double v = icq_target(q, mu, 0, alpha);
            CHECK(v >= prev - 1e-10);
            prev = v;
        }
    }
}

TEST_CASE("lemma bound holds on random states") {
    SplitMix64 rng(31);
    const double q_max = 8.0;
    for (int trial = 0; trial < 50; ++trial) {
        int na = 2 + rng.uniform_int(7);
        std::vector<double> q(na), mu(na);
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            q[a] = rng.uniform(-q_max, q_max);
            mu[a] = rng.uniform(0.02, 1.0);
            sum += mu[a];
        }
        for (double& m : mu) m /= sum;
        double alpha = std::exp(rng.uniform(std::log(0.05), std::log(50.0)));
        SoftmaxTarget w = icq_weights(q, mu, alpha);
        double soft = 0.0, top = -1e300;
        for (std::size_t i = 0; i < w.actions.size(); ++i) {
            soft += w.weights[i] * q[w.actions[i]];
            top = std::max(top, q[w.actions[i]]);
        }
        CHECK(top - soft <= softmax_gap_bound(q, mu, alpha, q_max) + 1e-12);
    }
}

TEST_CASE("zero rewards give a zero fixed point for every sweep kind") {
    TabularMdp mdp = three_state_mdp();
    for (double& r : mdp.reward) r = 0.0;
    std::vector<std::uint8_t> seen(3 * 2, 1);
    BehaviorEstimate mu = make_behavior(3, 2, {{0.5, 0.5}, {0.6, 0.4}, {0.3, 0.7}});
    JointPolicy pol;
    pol.num_states = 3;
    pol.actions_per_agent = {2};
    pol.per_agent = {{0.5, 0.5, 0.2, 0.8, 1.0, 0.0}};
    SweepStats stats{&seen, &mu, &pol};
    QTable q0(3, 2);
    for (OperatorKind kind : {OperatorKind::standard, OperatorKind::importance_sampled,
                              OperatorKind::icq, OperatorKind::bcq}) {
        OperatorSpec spec{kind, 1.0, 0.0};
        QTable q1 = apply_operator(spec, q0, mdp, stats);
        for (double v : q1.values) CHECK(v == 0.0);
    }
}

TEST_CASE("icq sweep at tiny alpha matches the bcq sweep") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen{1, 1, 1, 0, 1, 1};  // one unseen pair
    BehaviorEstimate mu = make_behavior(3, 2, {{0.5, 0.5}, {1.0, 0.0}, {0.3, 0.7}});
    SweepStats stats{&seen, &mu, nullptr};
    SplitMix64 rng(5);
    QTable q(3, 2);
    for (double& v : q.values) v = rng.uniform(-2.0, 2.0);
    QTable icq_q = apply_operator({OperatorKind::icq, 1e-9, 0.0}, q, mdp, stats);
    QTable bcq_q = apply_operator({OperatorKind::bcq, 0.0, 0.0}, q, mdp, stats);
    for (std::size_t i = 0; i < icq_q.values.size(); ++i)
        CHECK(std::abs(icq_q.values[i] - bcq_q.values[i]) < 1e-6);
}

TEST_CASE("bcq fixed point equals the value-iteration oracle") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen(3 * 2, 1);
    SweepStats stats{&seen, nullptr, nullptr};
    FixpointResult fp =
        iterate_to_fixpoint({OperatorKind::bcq, 0.0, 0.0}, QTable(3, 2), mdp, stats, 1e-13, 5000);
    CHECK(fp.converged);
    QTable oracle = value_iteration_oracle(mdp, seen, 1e-13, 5000);
    for (std::size_t i = 0; i < fp.q.values.size(); ++i)
        CHECK(std::abs(fp.q.values[i] - oracle.values[i]) < 1e-10);
    // residuals shrink monotonically (contraction)
    for (std::size_t k = 1; k + 1 < fp.residuals.size(); ++k)
        CHECK(fp.residuals[k + 1] <= fp.residuals[k] + 1e-12);
}

TEST_CASE("icq iterates stay inside the reward bound") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen(3 * 2, 1);
    BehaviorEstimate mu = make_behavior(3, 2, {{0.5, 0.5}, {0.6, 0.4}, {0.3, 0.7}});
    SweepStats stats{&seen, &mu, nullptr};
    double q_max = mdp.max_abs_reward() / (1.0 - mdp.gamma);
    for (double alpha : {0.05, 1.0, 50.0}) {
        FixpointResult fp = iterate_to_fixpoint({OperatorKind::icq, alpha, 0.0}, QTable(3, 2), mdp,
                                                stats, 1e-12, 2000);
        CHECK(!fp.diverged);
        for (double v : fp.q.values) {
            CHECK(v <= q_max + 1e-9);
            CHECK(v >= -q_max - 1e-9);
        }
    }
}

TEST_CASE("optimistic generalization at unseen pairs is flagged as divergence") {
    // uniform policy on the 4-agent environment with a thin dataset: mass on
    // unseen next actions plus inflated unseen values compounds through the
    // bootstrap
    MmdpSpec spec{4, 100, 0.99};
    TabularMdp mdp = build_mmdp(spec);
    OfflineDataset ds = collect_mmdp_dataset(spec, 8, 1, 3);
    auto seen = ds.seen_mask();
    JointPolicy uni = uniform_joint_policy(4, 2, 2);
    SweepStats stats{&seen, nullptr, &uni};
    UnseenInjection inj;
    inj.eps_b.assign(seen.size(), 1.0);
    inj.relative = true;
    FixpointResult fp = iterate_to_fixpoint({OperatorKind::standard, 1.0, 0.0}, QTable(2, 16), mdp,
                                            stats, 1e-10, 20000, &inj);
    CHECK(fp.diverged);
    CHECK(!fp.converged);
}

TEST_CASE("additive injection converges to a bounded offset") {
    MmdpSpec spec{2, 100, 0.99};
    TabularMdp mdp = build_mmdp(spec);
    OfflineDataset ds = collect_mmdp_dataset(spec, 8, 1, 3);
    auto seen = ds.seen_mask();
    JointPolicy uni = uniform_joint_policy(2, 2, 2);
    SweepStats stats{&seen, nullptr, &uni};
    UnseenInjection inj;
    inj.eps_b.assign(seen.size(), 0.5);
    FixpointResult fp = iterate_to_fixpoint({OperatorKind::standard, 1.0, 0.0}, QTable(2, 4), mdp,
                                            stats, 1e-10, 20000, &inj);
    CHECK(fp.converged);
    CHECK(!fp.diverged);
}

TEST_CASE("theorem2 gap sits under the bound across the alpha grid") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen(3 * 2, 1);
    BehaviorEstimate mu = make_behavior(3, 2, {{0.5, 0.5}, {0.6, 0.4}, {0.3, 0.7}});
    SweepStats stats{&seen, &mu, nullptr};
    std::vector<double> alphas{0.1, 0.5, 1.0, 5.0, 20.0};
    std::vector<double> gaps;
    for (double alpha : alphas) {
        Theorem2Result t = theorem2_gap(mdp, stats, alpha, 200);
        CHECK(t.gap <= t.bound + 1e-12);
        gaps.push_back(t.gap);
    }
    // log-gap decreasing in 1/alpha: negative slope between grid neighbors
    for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
        double slope = (std::log(gaps[i + 1]) - std::log(gaps[i])) /
                       (1.0 / alphas[i + 1] - 1.0 / alphas[i]);
        CHECK(slope < 0.0);
    }
}

TEST_CASE("theorem2 gap is zero with a single seen action per state") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen{1, 0, 1, 0, 1, 0};
    BehaviorEstimate mu = make_behavior(3, 2, {{1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}});
    SweepStats stats{&seen, &mu, nullptr};
    Theorem2Result t = theorem2_gap(mdp, stats, 1.0, 50);
    CHECK(t.gap == 0.0);
    CHECK(t.bound == 0.0);
}

TEST_CASE("lambda zero collapses to the one-step icq target") {
    MmdpSpec spec{2, 30, 0.99};
    TabularMdp mdp = build_mmdp(spec);
    OfflineDataset ds = collect_mmdp_dataset(spec, 100, 10, 5);
    BehaviorEstimate mu = estimate_behavior(ds);
    SplitMix64 rng(77);
    QTable q(2, 4);
    for (double& v : q.values) v = rng.uniform(-1.0, 1.0);
    const double alpha = 1.5, gamma = 0.99;
    for (int trial = 0; trial < 100; ++trial) {
        const Trajectory& traj = ds.trajectories[trial % ds.trajectories.size()];
        auto targets = lambda_icq_targets(traj, q, mu, alpha, 0.0, gamma);
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            double expected = traj.steps[t].reward;
            if (t + 1 < traj.steps.size()) {
                int s2 = traj.steps[t + 1].state;
                int a2 = traj.steps[t + 1].joint_action;
                // one-step form: r + gamma rho Q(s', a')
                double m = -1e300;
                for (int a = 0; a < 4; ++a)
                    if (mu.joint_prob(s2, a) > 0.0) m = std::max(m, q.at(s2, a));
                double z = 0.0;
                for (int a = 0; a < 4; ++a)
                    if (mu.joint_prob(s2, a) > 0.0)
                        z += mu.joint_prob(s2, a) * std::exp((q.at(s2, a) - m) / alpha);
                double rho = std::exp((q.at(s2, a2) - m) / alpha) / z;
                expected += gamma * rho * q.at(s2, a2);
            }
            CHECK(std::abs(targets[t] - expected) < 1e-12);
        }
    }
}

TEST_CASE("lambda one with huge alpha telescopes to the Monte-Carlo return") {
    // 3-step trajectory, rho -> 1: the corrections sum to the full return
    QTable q(2, 2);
    q.at(0, 0) = 0.3;
    q.at(0, 1) = -0.2;
    q.at(1, 0) = 0.8;
    q.at(1, 1) = 0.1;
    BehaviorEstimate mu = make_behavior(2, 2, {{0.5, 0.5}, {0.4, 0.6}});
    Trajectory traj;
    traj.steps.push_back({0, 1, 1.0, 1, false});
    traj.steps.push_back({1, 0, 2.0, 0, false});
    traj.steps.push_back({0, 0, 3.0, 1, true});
    traj.behavior_probs = {0.5, 0.4, 0.5};
    const double gamma = 0.9;
    auto targets = lambda_icq_targets(traj, q, mu, 1e12, 1.0, gamma);
    double mc0 = 1.0 + gamma * 2.0 + gamma * gamma * 3.0;
    double mc1 = 2.0 + gamma * 3.0;
    CHECK(targets[0] == doctest::Approx(mc0).epsilon(1e-8));
    CHECK(targets[1] == doctest::Approx(mc1).epsilon(1e-8));
    CHECK(targets[2] == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("zero temporal differences leave targets at the Q values") {
    QTable q(2, 2);  // all zeros
    BehaviorEstimate mu = make_behavior(2, 2, {{0.5, 0.5}, {0.5, 0.5}});
    Trajectory traj;
    traj.steps.push_back({0, 0, 0.0, 1, false});
    traj.steps.push_back({1, 1, 0.0, 0, false});
    traj.steps.push_back({0, 1, 0.0, 1, true});
    traj.behavior_probs = {0.5, 0.5, 0.5};
    for (double lambda : {0.0, 0.4, 1.0}) {
        auto targets = lambda_icq_targets(traj, q, mu, 2.0, lambda, 0.99);
        for (std::size_t t = 0; t < targets.size(); ++t)
            CHECK(targets[t] == doctest::Approx(q.at(traj.steps[t].state,
                                                     traj.steps[t].joint_action)).epsilon(1e-12));
    }
}

TEST_CASE("tree backup and q(lambda) collapse at lambda zero") {
    SplitMix64 rng(3);
    QTable q(2, 2);
    for (double& v : q.values) v = rng.uniform(-1.0, 1.0);
    JointPolicy pol;
    pol.num_states = 2;
    pol.actions_per_agent = {2};
    pol.per_agent = {{0.3, 0.7, 0.6, 0.4}};
    Trajectory traj;
    traj.steps.push_back({0, 1, 0.5, 1, false});
    traj.steps.push_back({1, 0, -0.3, 0, true});
    traj.behavior_probs = {0.7, 0.6};
    const double gamma = 0.95;
    auto tb = tree_backup_targets(traj, q, pol, 0.0, gamma);
    auto ql = q_lambda_targets(traj, q, 0.0, gamma);
    // expected-sarsa and max one-step targets respectively
    double esarsa = 0.5 + gamma * (0.6 * q.at(1, 0) + 0.4 * q.at(1, 1));
    double qmax = 0.5 + gamma * std::max(q.at(1, 0), q.at(1, 1));
    CHECK(tb[0] == doctest::Approx(esarsa).epsilon(1e-12));
    CHECK(ql[0] == doctest::Approx(qmax).epsilon(1e-12));
    CHECK(tb[1] == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(ql[1] == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("greedy deterministic policy matching the data makes both traces equal") {
    QTable q(2, 2);
    q.at(0, 0) = 1.0;
    q.at(0, 1) = 0.2;
    q.at(1, 0) = 0.9;
    q.at(1, 1) = 0.1;
    JointPolicy greedy;
    greedy.num_states = 2;
    greedy.actions_per_agent = {2};
    greedy.per_agent = {{1.0, 0.0, 1.0, 0.0}};  // argmax everywhere
    Trajectory traj;  // behavior takes the greedy action every step
    traj.steps.push_back({0, 0, 0.4, 1, false});
    traj.steps.push_back({1, 0, 0.6, 0, false});
    traj.steps.push_back({0, 0, 0.1, 1, true});
    traj.behavior_probs = {1.0, 1.0, 1.0};
    for (double lambda : {0.3, 0.8, 1.0}) {
        auto tb = tree_backup_targets(traj, q, greedy, lambda, 0.9);
        auto ql = q_lambda_targets(traj, q, lambda, 0.9);
        for (std::size_t t = 0; t < tb.size(); ++t)
            CHECK(tb[t] == doctest::Approx(ql[t]).epsilon(1e-12));
    }
}

TEST_CASE("uniform policy halves the tree backup weight per depth") {
    // zero Q: the target reduces to sum_s gamma^s (lambda/2)^s r_s
    QTable q(2, 2);
    JointPolicy uni;
    uni.num_states = 2;
    uni.actions_per_agent = {2};
    uni.per_agent = {{0.5, 0.5, 0.5, 0.5}};
    Trajectory traj;
    traj.steps.push_back({0, 0, 1.0, 1, false});
    traj.steps.push_back({1, 1, 1.0, 0, false});
    traj.steps.push_back({0, 1, 1.0, 1, true});
    traj.behavior_probs = {0.5, 0.5, 0.5};
    const double gamma = 0.9, lambda = 1.0;
    auto tb = tree_backup_targets(traj, q, uni, lambda, gamma);
    double expected = 1.0 + gamma * 0.5 * 1.0 + gamma * gamma * 0.25 * 1.0;
    CHECK(tb[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("trajectory kinds are rejected by the sweep entry point") {
    TabularMdp mdp = three_state_mdp();
    std::vector<std::uint8_t> seen(3 * 2, 1);
    SweepStats stats{&seen, nullptr, nullptr};
    CHECK_THROWS(apply_operator({OperatorKind::q_lambda, 1.0, 0.5}, QTable(3, 2), mdp, stats));
}

TEST_CASE("operator spec validation") {
    CHECK_THROWS(OperatorSpec{OperatorKind::icq, 0.0, 0.0}.validate());
    CHECK_THROWS(OperatorSpec{OperatorKind::q_lambda, 1.0, 1.5}.validate());
    OperatorSpec ok{OperatorKind::bcq, 0.0, 0.0};
    ok.validate();
}
