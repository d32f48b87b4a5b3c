#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "icq/dataset.hpp"
#include "icq/learners.hpp"
#include "icq/verify.hpp"

using namespace icq;

namespace {

OfflineDataset zero_reward_dataset() {
    // all-ones joint actions never pay reward
    MmdpSpec spec{2, 50, 0.99};
    TabularMdp mdp = build_mmdp(spec);
    JointPolicy stay = optimal_mmdp_policy(2);
    for (int i = 0; i < 2; ++i)
        for (int s = 0; s < 2; ++s) {
            stay.per_agent[i][s * 2 + 0] = 0.0;
            stay.per_agent[i][s * 2 + 1] = 1.0;
        }
    auto trajs = rollout(mdp, stay, 5, 12);
    return OfflineDataset::from_trajectories(std::move(trajs), 2, {2, 2}, 2, kMmdpTau2, 0.99, 50);
}

double max_q_init(const TrainMetrics& m) {
    double q = -1e300;
    for (const auto& r : m.records) q = std::max(q, r.q_init);
    return q;
}

double min_q_init(const TrainMetrics& m) {
    double q = 1e300;
    for (const auto& r : m.records) q = std::min(q, r.q_init);
    return q;
}

}  // namespace

TEST_CASE("huge alpha reduces the policy update to behavior cloning") {
    // with exp(Q/alpha) -> 1 the projection weight is uniform, so the first
    // actor update must match the bc update bit-for-bit up to fp noise
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 16, 2, 9);
    LearnerConfig icq_cfg = default_learner_config(Algorithm::icq_ma);
    icq_cfg.alpha = 1e12;
    icq_cfg.total_steps = 1;
    icq_cfg.seed = 4;
    LearnerConfig bc_cfg = default_learner_config(Algorithm::bc_ma);
    bc_cfg.total_steps = 1;
    bc_cfg.seed = 4;
    TrainResult a = train(ds, icq_cfg);
    TrainResult b = train(ds, bc_cfg);
    REQUIRE(a.actors.size() == b.actors.size());
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.actors.size(); ++i) {
        for (std::size_t l = 0; l < a.actors[i].layers.size(); ++l) {
            for (std::size_t k = 0; k < a.actors[i].layers[l].w.size(); ++k) {
                double da = a.actors[i].layers[l].w[k];
                double db = b.actors[i].layers[l].w[k];
                dot += da * db;
                na += da * da;
                nb += db * db;
            }
        }
    }
    double cosine = dot / std::sqrt(na * nb);
    CHECK(cosine > 0.999);
}

TEST_CASE("single-agent learner clones expert data to the optimal return") {
    OfflineDataset ds = collect_mmdp_dataset({1, 100, 0.99}, 8, 8, 3);
    LearnerConfig cfg = default_learner_config(Algorithm::icq);
    cfg.total_steps = 3000;
    cfg.seed = 1;
    TrainResult r = train(ds, cfg);
    CHECK(r.metrics.records.back().eval_return >= 0.95 * 100.0);
    CHECK(!r.metrics.diverged);
}

TEST_CASE("zero-reward data drives the critic to zero") {
    OfflineDataset ds = zero_reward_dataset();
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 1500;
    cfg.seed = 2;
    TrainResult r = train(ds, cfg);
    CHECK(std::abs(r.metrics.records.back().q_init) < 1e-3);
}

TEST_CASE("expert trajectories keep estimates bounded and the policy sharp") {
    // with singleton support the importance ratio is exactly 1 and the critic
    // tracks the behavior value
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, 32, 7);
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 8000;
    cfg.seed = 1;
    TrainResult r = train(ds, cfg);
    CHECK(r.metrics.records.back().eval_return >= 0.85 * 100.0);
    CHECK(max_q_init(r.metrics) <= 100.0);  // bounded by the horizon
    CHECK(min_q_init(r.metrics) >= 0.0);
    CHECK(!r.metrics.diverged);
}

TEST_CASE("mixture data caps the estimated value near the true optimum") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, 4, 7);
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 4000;
    cfg.seed = 3;
    TrainResult r = train(ds, cfg);
    CHECK(!r.metrics.diverged);
    CHECK(max_q_init(r.metrics) <= 1.5 * r.metrics.true_value);
    CHECK(min_q_init(r.metrics) >= 0.0);
}

TEST_CASE("policy weights collapse to one when the mixed values vanish") {
    // rho = exp(q/alpha - log z) with q identically zero is exactly 1, the
    // behavior-cloning weighting
    QTable q(1, 4);  // all zeros
    std::vector<std::pair<int, int>> batch{{0, 0}, {0, 1}, {0, 3}};
    auto log_z = compute_z(batch, q, nullptr, 2.5, ZMode::minibatch_softmax);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        double rho = std::exp(q.at(batch[i].first, batch[i].second) / 2.5 - log_z[i]);
        CHECK(rho == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("joint policy loss equals the decomposed per-agent sum") {
    SuiteResult res = run_theorem3_suite(100, 21);
    CHECK(res.passed == res.total);
}

TEST_CASE("bcq masking: threshold zero equals the spec threshold on dense data") {
    // every count ratio here exceeds 0.3, so both settings see identical masks
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, 4, 7);
    LearnerConfig a = default_learner_config(Algorithm::bcq_ma);
    a.total_steps = 500;
    a.seed = 5;
    LearnerConfig b = a;
    b.zeta = 0.0;
    TrainResult ra = train(ds, a);
    TrainResult rb = train(ds, b);
    REQUIRE(ra.metrics.records.size() == rb.metrics.records.size());
    for (std::size_t i = 0; i < ra.metrics.records.size(); ++i)
        CHECK(ra.metrics.records[i].q_init == rb.metrics.records[i].q_init);
    CHECK(ra.metrics.mask_fallbacks == 0);
}

TEST_CASE("bcq masking: threshold one keeps only the modal action") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, 4, 7);
    LearnerConfig cfg = default_learner_config(Algorithm::bcq_ma);
    cfg.total_steps = 500;
    cfg.seed = 5;
    cfg.zeta = 1.0;
    TrainResult r = train(ds, cfg);
    // every (state, agent) slot fell back to its most frequent action
    CHECK(r.metrics.mask_fallbacks == 2 * 2);
    // the greedy policy is then the modal behavior action everywhere
    BehaviorEstimate mu = estimate_behavior(ds);
    for (int i = 0; i < 2; ++i)
        for (int s = 0; s < 2; ++s)
            CHECK(r.policy.agent_prob(i, s, mu.modal_action(i, s)) == 1.0);
}

TEST_CASE("behavior cloning ranks datasets by quality") {
    double returns[3];
    int idx = 0;
    for (int expert : {32, 16, 4}) {
        OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, expert, 7);
        LearnerConfig cfg = default_learner_config(Algorithm::bc_ma);
        cfg.total_steps = 2500;
        cfg.seed = 1;
        returns[idx++] = train(ds, cfg).metrics.records.back().eval_return;
    }
    CHECK(returns[0] >= 0.95 * 100.0);  // expert-only clones the optimum
    CHECK(returns[0] > returns[1]);
    CHECK(returns[1] > returns[2]);
}

TEST_CASE("conservative penalty gradient vanishes at constant values under uniform data") {
    std::vector<double> q_row(4, 1.7);
    std::vector<double> uniform(4, 0.25);
    auto grad = cql_penalty_q_gradient(q_row, 0.8, 0.3, uniform);
    for (double g : grad) CHECK(std::abs(g) < 1e-12);
    // and it pushes down on over-weighted actions otherwise
    std::vector<double> skewed{0.7, 0.1, 0.1, 0.1};
    auto grad2 = cql_penalty_q_gradient(q_row, 0.8, 0.3, skewed);
    CHECK(grad2[0] < 0.0);
    CHECK(grad2[1] > 0.0);
}

TEST_CASE("cql learner trains with bounded estimates") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 32, 4, 7);
    LearnerConfig cfg = default_learner_config(Algorithm::cql_ma);
    cfg.total_steps = 1500;
    cfg.seed = 1;
    TrainResult r = train(ds, cfg);
    CHECK(!r.metrics.diverged);
    CHECK(max_q_init(r.metrics) < 100.0);
    CHECK(r.metrics.records.back().eval_return > 0.0);
}

TEST_CASE("normalizers: singleton batch, exact sum, and mode agreement") {
    // singleton minibatch: rho is exactly 1
    QTable q(1, 3);
    q.at(0, 0) = 2.0;
    std::vector<std::pair<int, int>> one{{0, 0}};
    auto lz = compute_z(one, q, nullptr, 0.7, ZMode::minibatch_softmax);
    CHECK(std::exp(q.at(0, 0) / 0.7 - lz[0]) == 1.0);

    // behavior-model mode reproduces the direct weighted sum
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 64, 8, 11);
    BehaviorEstimate mu = estimate_behavior(ds);
    QTable qt(2, 4);
    qt.at(0, 0) = 1.2;
    qt.at(0, 1) = -0.3;
    qt.at(0, 2) = 0.4;
    qt.at(0, 3) = 2.2;
    const double alpha = 1.3;
    std::vector<std::pair<int, int>> batch{{0, 0}, {0, 3}};
    auto lz2 = compute_z(batch, qt, &mu, alpha, ZMode::behavior_model);
    double direct = 0.0;
    for (int a = 0; a < 4; ++a)
        if (mu.joint_prob(0, a) > 0.0) direct += mu.joint_prob(0, a) * std::exp(qt.at(0, a) / alpha);
    CHECK(std::exp(lz2[0]) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(lz2[0] == lz2[1]);

    // behavior-model weights integrate to one under mu
    double total = 0.0;
    for (int a = 0; a < 4; ++a)
        if (mu.joint_prob(0, a) > 0.0)
            total += mu.joint_prob(0, a) * std::exp(qt.at(0, a) / alpha - lz2[0]);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // a large batch drawn from one state brings the two modes together
    std::vector<std::pair<int, int>> big;
    for (const auto& traj : ds.trajectories)
        for (const auto& st : traj.steps)
            if (st.state == 0) big.emplace_back(st.state, st.joint_action);
    auto lz_mb = compute_z(big, qt, nullptr, alpha, ZMode::minibatch_softmax);
    auto lz_bm = compute_z(big, qt, &mu, alpha, ZMode::behavior_model);
    double rel = std::abs(std::exp(lz_mb[0]) - std::exp(lz_bm[0])) / std::exp(lz_bm[0]);
    CHECK(rel < 0.05);

    // undefined behavior rows are an error in behavior-model mode
    std::vector<Trajectory> one_state;
    Trajectory t;
    t.steps.push_back({0, 0, 0.0, 1, true});
    t.behavior_probs.push_back(1.0);
    one_state.push_back(t);
    OfflineDataset tiny =
        OfflineDataset::from_trajectories(std::move(one_state), 1, {4}, 2, 0, 0.99, 5);
    BehaviorEstimate mu_tiny = estimate_behavior(tiny);
    std::vector<std::pair<int, int>> at_unvisited{{1, 0}};
    CHECK_THROWS(compute_z(at_unvisited, qt, &mu_tiny, alpha, ZMode::behavior_model));
}

TEST_CASE("icq targets never touch pairs missing from the dataset") {
    OfflineDataset ds = collect_mmdp_dataset({3, 100, 0.99}, 32, 4, 13);
    for (Algorithm algo : {Algorithm::icq, Algorithm::icq_ma}) {
        LearnerConfig cfg = default_learner_config(algo);
        cfg.total_steps = 400;
        cfg.seed = 6;
        TargetAudit audit;
        train(ds, cfg, nullptr, &audit);
        CHECK(audit.lookups > 0);
        CHECK(audit.unseen == 0);
    }
}

TEST_CASE("training is deterministic in the seed") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 16, 2, 3);
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 300;
    cfg.seed = 11;
    TrainResult a = train(ds, cfg);
    TrainResult b = train(ds, cfg);
    REQUIRE(a.metrics.records.size() == b.metrics.records.size());
    for (std::size_t i = 0; i < a.metrics.records.size(); ++i) {
        CHECK(a.metrics.records[i].q_init == b.metrics.records[i].q_init);
        CHECK(a.metrics.records[i].eval_return == b.metrics.records[i].eval_return);
    }
    for (std::size_t i = 0; i < a.actors.size(); ++i)
        for (std::size_t l = 0; l < a.actors[i].layers.size(); ++l)
            CHECK(a.actors[i].layers[l].w == b.actors[i].layers[l].w);
}

TEST_CASE("executed policies condition on the private observation only") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 16, 2, 3);
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 200;
    cfg.seed = 11;
    TrainResult r = train(ds, cfg);
    for (const auto& actor : r.actors) {
        // the network input is the agent's own observation, nothing else
        CHECK(actor.input_dim() == ds.num_states);
        std::vector<double> obs{0.0, 1.0};
        auto a = actor.forward(obs);
        auto b = actor.forward(obs);
        CHECK(a == b);
    }
}

TEST_CASE("learner config validation") {
    LearnerConfig cfg = default_learner_config(Algorithm::icq);
    cfg.alpha = 0.0;
    CHECK_THROWS(cfg.validate());
    cfg = default_learner_config(Algorithm::icq);
    cfg.batch_size = 0;
    CHECK_THROWS(cfg.validate());
    cfg = default_learner_config(Algorithm::bcq_ma);
    cfg.zeta = 1.5;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("algorithm and z-mode names round trip") {
    for (Algorithm a : {Algorithm::icq, Algorithm::icq_ma, Algorithm::bcq_ma, Algorithm::cql_ma,
                        Algorithm::bc_ma})
        CHECK(algorithm_from_name(algorithm_name(a)) == a);
    for (ZMode m : {ZMode::behavior_model, ZMode::minibatch_softmax})
        CHECK(z_mode_from_name(z_mode_name(m)) == m);
    CHECK_THROWS(algorithm_from_name("nope"));
}

TEST_CASE("metrics are ordered and evaluation returns stay in range") {
    OfflineDataset ds = collect_mmdp_dataset({2, 100, 0.99}, 16, 4, 3);
    LearnerConfig cfg = default_learner_config(Algorithm::icq_ma);
    cfg.total_steps = 500;
    cfg.seed = 1;
    TrainResult r = train(ds, cfg);
    long prev = -1;
    for (const auto& rec : r.metrics.records) {
        CHECK(rec.step > prev);
        prev = rec.step;
        CHECK(rec.eval_return >= 0.0);
        CHECK(rec.eval_return <= 100.0);
    }
}
