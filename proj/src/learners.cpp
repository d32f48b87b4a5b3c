#include "icq/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "icq/rng.hpp"

namespace icq {

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::icq: return "icq";
        case Algorithm::icq_ma: return "icq-ma";
        case Algorithm::bcq_ma: return "bcq-ma";
        case Algorithm::cql_ma: return "cql-ma";
        case Algorithm::bc_ma: return "bc-ma";
    }
    return "icq";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "icq") return Algorithm::icq;
    if (name == "icq-ma") return Algorithm::icq_ma;
    if (name == "bcq-ma") return Algorithm::bcq_ma;
    if (name == "cql-ma") return Algorithm::cql_ma;
    if (name == "bc-ma") return Algorithm::bc_ma;
    throw std::invalid_argument("unknown algorithm: " + name);
}

std::string z_mode_name(ZMode m) {
    return m == ZMode::behavior_model ? "behavior-model" : "minibatch-softmax";
}

ZMode z_mode_from_name(const std::string& name) {
    if (name == "behavior-model") return ZMode::behavior_model;
    if (name == "minibatch-softmax") return ZMode::minibatch_softmax;
    throw std::invalid_argument("unknown z mode: " + name);
}

void LearnerConfig::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("LearnerConfig: alpha must be positive");
    if (gamma != 0.0 && !(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("LearnerConfig: gamma must be in (0,1)");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("LearnerConfig: lambda outside [0,1]");
    if (zeta < 0.0 || zeta > 1.0) throw std::invalid_argument("LearnerConfig: zeta outside [0,1]");
    if (batch_size < 1) throw std::invalid_argument("LearnerConfig: batch_size must be >= 1");
    if (target_update < 1) throw std::invalid_argument("LearnerConfig: target_update must be >= 1");
    if (total_steps < 0) throw std::invalid_argument("LearnerConfig: negative step budget");
    if (eval_every < 1) throw std::invalid_argument("LearnerConfig: eval_every must be >= 1");
    if (eval_episodes < 1) throw std::invalid_argument("LearnerConfig: eval_episodes must be >= 1");
}

LearnerConfig default_learner_config(Algorithm algo) {
    LearnerConfig cfg;
    cfg.algorithm = algo;
    cfg.z_mode = algo == Algorithm::icq ? ZMode::behavior_model : ZMode::minibatch_softmax;
    return cfg;
}

std::vector<double> compute_z(std::span<const std::pair<int, int>> batch, const QTable& q,
                              const BehaviorEstimate* mu, double alpha, ZMode mode) {
    if (batch.empty()) throw std::invalid_argument("compute_z: empty batch");
    if (!(alpha > 0.0)) throw std::invalid_argument("compute_z: alpha must be positive");
    std::vector<double> log_z(batch.size(), 0.0);
    if (mode == ZMode::minibatch_softmax) {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& [s, a] : batch) m = std::max(m, q.at(s, a) / alpha);
        double sum = 0.0;
        for (const auto& [s, a] : batch) sum += std::exp(q.at(s, a) / alpha - m);
        double lz = m + std::log(sum) - std::log(static_cast<double>(batch.size()));
        std::fill(log_z.begin(), log_z.end(), lz);
        return log_z;
    }
    if (mu == nullptr) throw std::invalid_argument("compute_z: behavior model mode needs mu");
    const int na = q.num_actions;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        int s = batch[i].first;
        if (!mu->state_defined(s))
            throw std::runtime_error("compute_z: behavior row undefined at state " + std::to_string(s));
        double m = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < na; ++a)
            if (mu->joint[static_cast<std::size_t>(s) * na + a] > 0.0)
                m = std::max(m, q.at(s, a) / alpha);
        double sum = 0.0;
        for (int a = 0; a < na; ++a) {
            double w = mu->joint[static_cast<std::size_t>(s) * na + a];
            if (w > 0.0) sum += w * std::exp(q.at(s, a) / alpha - m);
        }
        log_z[i] = m + std::log(sum);
    }
    return log_z;
}

std::vector<double> cql_penalty_q_gradient(std::span<const double> q_row, double w, double b,
                                           std::span<const double> data_marginal) {
    if (q_row.size() != data_marginal.size())
        throw std::invalid_argument("cql_penalty_q_gradient: size mismatch");
    double m = -std::numeric_limits<double>::infinity();
    for (double q : q_row) m = std::max(m, w * q + b);
    std::vector<double> soft(q_row.size());
    double sum = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        soft[a] = std::exp(w * q_row[a] + b - m);
        sum += soft[a];
    }
    std::vector<double> grad(q_row.size());
    for (std::size_t a = 0; a < q_row.size(); ++a) grad[a] = w * (soft[a] / sum - data_marginal[a]);
    return grad;
}

namespace {

constexpr std::uint64_t kStreamInit = 0x11;
constexpr std::uint64_t kStreamCritic = 0x22;
constexpr std::uint64_t kStreamPolicy = 0x33;
constexpr std::uint64_t kStreamEval = 0x44;
constexpr std::uint64_t kStreamTrueValue = 0x55;

// Per-state evaluation of a network on the one-hot basis; traces kept when
// gradients will be accumulated per state.
struct NetTable {
    std::vector<std::vector<double>> out;
    std::vector<ForwardTrace> traces;
};

NetTable eval_table(const DenseNet& net, const std::vector<std::vector<double>>& basis,
                    bool with_trace) {
    NetTable t;
    t.out.resize(basis.size());
    if (with_trace) t.traces.resize(basis.size());
    for (std::size_t s = 0; s < basis.size(); ++s) {
        if (with_trace)
            t.out[s] = forward_cached(net, basis[s], t.traces[s]);
        else
            t.out[s] = net.forward(basis[s]);
    }
    return t;
}

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

class Trainer {
  public:
    Trainer(const OfflineDataset& ds, const LearnerConfig& cfg, const TabularMdp* eval_env,
            TargetAudit* audit)
        : ds_(ds), cfg_(cfg), audit_(audit) {
        cfg_.validate();
        if (ds_.trajectories.empty()) throw std::invalid_argument("train: empty dataset");
        ns_ = ds_.num_states;
        n_ = ds_.num_agents;
        aspace_ = ds_.action_space;
        a_joint_ = ds_.num_joint_actions();
        joint_mode_ = cfg_.algorithm == Algorithm::icq;
        if (joint_mode_) {
            // joint-action treatment: one virtual agent over the joint space
            n_ = 1;
            aspace_ = {a_joint_};
        }

        if (eval_env != nullptr) {
            env_ = *eval_env;
        } else {
            bool mmdp_shaped = ds_.num_states == 2;
            for (int a : ds_.action_space) mmdp_shaped = mmdp_shaped && a == 2;
            if (!mmdp_shaped)
                throw std::invalid_argument("train: pass an evaluation environment for non-MMDP data");
            env_ = build_mmdp({ds_.num_agents, ds_.horizon, ds_.gamma});
        }
        if (env_.num_states != ns_ || env_.num_joint_actions != a_joint_)
            throw std::invalid_argument("train: dataset and environment dimensions differ");
        if (cfg_.gamma != 0.0) env_.gamma = cfg_.gamma;

        basis_.assign(ns_, std::vector<double>(ns_, 0.0));
        for (int s = 0; s < ns_; ++s) basis_[s][s] = 1.0;
        mu_ = estimate_behavior(ds_, cfg_.zeta);
        seen_ = ds_.seen_mask();
        for (std::size_t ti = 0; ti < ds_.trajectories.size(); ++ti)
            for (std::size_t t = 0; t < ds_.trajectories[ti].steps.size(); ++t)
                transitions_.emplace_back(static_cast<int>(ti), static_cast<int>(t));

        use_critic_ = cfg_.algorithm != Algorithm::bc_ma;
        use_actor_ = cfg_.algorithm != Algorithm::bcq_ma;
        use_mixer_ = use_critic_ && !joint_mode_;

        build_nets();
        if (cfg_.algorithm == Algorithm::bcq_ma) build_masks();

        true_value_ = cfg_.true_value;
        if (true_value_ <= 0.0 && ds_.num_states == 2 && a_joint_ == (1 << ds_.num_agents)) {
            auto est = monte_carlo_value(env_, optimal_mmdp_policy(ds_.num_agents), 32,
                                         derive_seed(cfg_.seed, kStreamTrueValue));
            true_value_ = est.mean;
        }
        metrics_.true_value = true_value_;
    }

    TrainResult run() {
        SplitMix64 rng_critic(derive_seed(cfg_.seed, kStreamCritic));
        SplitMix64 rng_policy(derive_seed(cfg_.seed, kStreamPolicy));

        record(0);
        for (long step = 1; step <= cfg_.total_steps; ++step) {
            if (use_actor_) policy_step(rng_policy);
            if (use_critic_) critic_step(rng_critic);
            if (use_critic_ && step % cfg_.target_update == 0) refresh_targets();
            if (step % cfg_.eval_every == 0 || step == cfg_.total_steps) {
                record(step);
                if (metrics_.diverged) break;
            }
        }

        TrainResult res;
        res.policy = extract_policy();
        res.actors = actors_;
        res.critics = critics_;
        res.mixer = mixer_;
        res.metrics = std::move(metrics_);
        return res;
    }

  private:
    void build_nets() {
        std::uint64_t s0 = derive_seed(cfg_.seed, kStreamInit);
        if (use_critic_) {
            for (int i = 0; i < n_; ++i) {
                critics_.push_back(make_net({ns_, cfg_.hidden, aspace_[i]},
                                            {Activation::relu, Activation::identity},
                                            derive_seed(s0, 100 + i), 0.0));
                critic_opt_.push_back(AdamState::init(critics_[i], cfg_.value_lr));
            }
            critics_t_ = critics_;
        }
        if (use_actor_) {
            for (int i = 0; i < n_; ++i) {
                actors_.push_back(make_net({ns_, cfg_.hidden, aspace_[i]},
                                           {Activation::relu, Activation::softmax},
                                           derive_seed(s0, 200 + i), 0.0));
                actor_opt_.push_back(AdamState::init(actors_[i], cfg_.policy_lr));
            }
        }
        if (use_mixer_) {
            mixer_ = make_mixer(ns_, n_, cfg_.hidden, derive_seed(s0, 300));
            // a zero-weight head would never receive gradient through the
            // absolute value, so give it a small nonzero start
            SplitMix64 r(derive_seed(s0, 301));
            auto& head = mixer_.hyper_w.layers.back();
            for (double& w : head.w) w = r.uniform(0.05, 0.15);
            for (double& b : head.b) b = r.uniform(0.05, 0.15);
            mixer_t_ = mixer_;
            mixw_opt_ = AdamState::init(mixer_.hyper_w, cfg_.value_lr);
            mixb_opt_ = AdamState::init(mixer_.hyper_b, cfg_.value_lr);
        }
    }

    void build_masks() {
        allowed_.assign(n_, std::vector<std::uint8_t>());
        for (int i = 0; i < n_; ++i) allowed_[i].assign(static_cast<std::size_t>(ns_) * aspace_[i], 0);
        for (int s = 0; s < ns_; ++s) {
            if (!mu_.state_defined(s)) {
                // no data at all: nothing to constrain
                for (int i = 0; i < n_; ++i)
                    for (int a = 0; a < aspace_[i]; ++a)
                        allowed_[i][static_cast<std::size_t>(s) * aspace_[i] + a] = 1;
                continue;
            }
            for (int i = 0; i < n_; ++i) {
                bool any = false;
                for (int a = 0; a < aspace_[i]; ++a) {
                    if (mu_.count_ratio(i, s, a) > cfg_.zeta) {
                        allowed_[i][static_cast<std::size_t>(s) * aspace_[i] + a] = 1;
                        any = true;
                    }
                }
                if (!any) {
                    allowed_[i][static_cast<std::size_t>(s) * aspace_[i] + mu_.modal_action(i, s)] = 1;
                    metrics_.mask_fallbacks++;
                }
            }
        }
    }

    void refresh_targets() {
        critics_t_ = critics_;
        if (use_mixer_) mixer_t_ = mixer_;
    }

    void note_target_pair(int s, int a) {
        if (audit_ == nullptr) return;
        audit_->lookups++;
        if (!ds_.seen(s, a)) audit_->unseen++;
    }

    int agent_of(int joint, int i) const { return agent_action(joint, i, aspace_); }

    // ---- mixed value helpers -------------------------------------------------

    struct MixTables {
        std::vector<NetTable> q;  // per agent
        NetTable w, b;            // hypernets (raw w)
    };

    MixTables eval_mix(const std::vector<DenseNet>& critics, const Mixer& mixer, bool with_trace) {
        MixTables t;
        for (int i = 0; i < n_; ++i) t.q.push_back(eval_table(critics[i], basis_, with_trace));
        if (use_mixer_) {
            t.w = eval_table(mixer.hyper_w, basis_, with_trace);
            t.b = eval_table(mixer.hyper_b, basis_, with_trace);
        }
        return t;
    }

    double mixed_value(const MixTables& t, int s, int joint) const {
        if (!use_mixer_) return t.q[0].out[s][joint];
        double v = t.b.out[s][0];
        for (int i = 0; i < n_; ++i)
            v += std::abs(t.w.out[s][i]) * t.q[i].out[s][agent_of(joint, i)];
        return v;
    }

    // Accumulated per-state output gradients, flushed with one backward pass
    // per state per network.
    struct GradAccum {
        std::vector<std::vector<std::vector<double>>> q;  // [agent][state][action]
        std::vector<std::vector<double>> w;               // [state][agent]
        std::vector<double> b;                            // [state]
    };

    GradAccum make_accum() const {
        GradAccum g;
        g.q.resize(n_);
        for (int i = 0; i < n_; ++i)
            g.q[i].assign(ns_, std::vector<double>(aspace_[i], 0.0));
        if (use_mixer_) {
            g.w.assign(ns_, std::vector<double>(n_, 0.0));
            g.b.assign(ns_, 0.0);
        }
        return g;
    }

    void add_mixed_grad(GradAccum& acc, const MixTables& online, int s, int joint, double g) {
        if (!use_mixer_) {
            acc.q[0][s][joint] += g;
            return;
        }
        for (int i = 0; i < n_; ++i) {
            int ai = agent_of(joint, i);
            double raw = online.w.out[s][i];
            acc.q[i][s][ai] += g * std::abs(raw);
            acc.w[s][i] += g * sign_of(raw) * online.q[i].out[s][ai];
        }
        acc.b[s] += g;
    }

    void apply_critic_grads(const MixTables& online, const GradAccum& acc) {
        std::vector<NetGradients> gq;
        for (int i = 0; i < n_; ++i) gq.push_back(NetGradients::zeros_like(critics_[i]));
        NetGradients gw, gb;
        if (use_mixer_) {
            gw = NetGradients::zeros_like(mixer_.hyper_w);
            gb = NetGradients::zeros_like(mixer_.hyper_b);
        }
        for (int s = 0; s < ns_; ++s) {
            for (int i = 0; i < n_; ++i) backward(critics_[i], online.q[i].traces[s], acc.q[i][s], gq[i]);
            if (use_mixer_) {
                backward(mixer_.hyper_w, online.w.traces[s], acc.w[s], gw);
                std::vector<double> row{acc.b[s]};
                backward(mixer_.hyper_b, online.b.traces[s], row, gb);
            }
        }
        std::vector<NetGradients*> all;
        for (auto& g : gq) all.push_back(&g);
        if (use_mixer_) {
            all.push_back(&gw);
            all.push_back(&gb);
        }
        clip_global_norm(all, cfg_.grad_clip);
        for (int i = 0; i < n_; ++i) adam_step(critic_opt_[i], critics_[i], gq[i]);
        if (use_mixer_) {
            adam_step(mixw_opt_, mixer_.hyper_w, gw);
            adam_step(mixb_opt_, mixer_.hyper_b, gb);
        }
    }

    // ---- batch sampling ------------------------------------------------------

    std::vector<int> sample_trajectories(SplitMix64& rng) {
        std::vector<int> out(cfg_.batch_size);
        for (int& i : out) i = rng.uniform_int(static_cast<int>(ds_.trajectories.size()));
        return out;
    }

    std::vector<std::pair<int, int>> sample_transitions(SplitMix64& rng) {
        std::vector<std::pair<int, int>> out(cfg_.batch_size);
        for (auto& p : out) p = transitions_[rng.uniform_int(static_cast<int>(transitions_.size()))];
        return out;
    }

    // log Z values for a list of (state, value-of-pair) entries under the
    // configured mode; `value` must already be the mixed target value
    std::vector<double> log_z_for(const std::vector<int>& states, const std::vector<double>& values,
                                  const MixTables& target) {
        std::vector<double> out(states.size(), 0.0);
        if (cfg_.z_mode == ZMode::minibatch_softmax) {
            double m = -std::numeric_limits<double>::infinity();
            for (double v : values) m = std::max(m, v / cfg_.alpha);
            double sum = 0.0;
            for (double v : values) sum += std::exp(v / cfg_.alpha - m);
            double lz = m + std::log(sum) - std::log(static_cast<double>(values.size()));
            std::fill(out.begin(), out.end(), lz);
            return out;
        }
        for (std::size_t j = 0; j < states.size(); ++j) {
            int s = states[j];
            if (!mu_.state_defined(s))
                throw std::runtime_error("train: behavior row undefined at state " + std::to_string(s));
            double m = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < a_joint_; ++a)
                if (mu_.joint[static_cast<std::size_t>(s) * a_joint_ + a] > 0.0)
                    m = std::max(m, mixed_value(target, s, a) / cfg_.alpha);
            double sum = 0.0;
            for (int a = 0; a < a_joint_; ++a) {
                double w = mu_.joint[static_cast<std::size_t>(s) * a_joint_ + a];
                if (w <= 0.0) continue;
                note_target_pair(s, a);
                sum += w * std::exp(mixed_value(target, s, a) / cfg_.alpha - m);
            }
            out[j] = m + std::log(sum);
        }
        return out;
    }

    // ---- per-algorithm updates ----------------------------------------------

    void critic_step(SplitMix64& rng) {
        switch (cfg_.algorithm) {
            case Algorithm::icq: critic_step_icq(rng); break;
            case Algorithm::icq_ma: critic_step_icq_ma(rng); break;
            case Algorithm::bcq_ma: critic_step_bcq_ma(rng); break;
            case Algorithm::cql_ma: critic_step_cql_ma(rng); break;
            case Algorithm::bc_ma: break;
        }
    }

    void policy_step(SplitMix64& rng) {
        switch (cfg_.algorithm) {
            case Algorithm::icq:
            case Algorithm::icq_ma: policy_step_icq(rng); break;
            case Algorithm::cql_ma: policy_step_cql(rng); break;
            case Algorithm::bc_ma: policy_step_bc(rng); break;
            case Algorithm::bcq_ma: break;
        }
    }

    // one-step SARSA regression toward r + gamma rho Q'(s',a')
    void critic_step_icq(SplitMix64& rng) {
        MixTables target = eval_mix(critics_t_, mixer_t_, false);
        MixTables online = eval_mix(critics_, mixer_, true);
        auto batch = sample_transitions(rng);

        std::vector<int> boot_states;
        std::vector<double> boot_values;
        for (auto [ti, t] : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            if (t + 1 >= static_cast<int>(steps.size())) continue;
            const auto& nx = steps[t + 1];
            boot_states.push_back(nx.state);
            boot_values.push_back(mixed_value(target, nx.state, nx.joint_action));
        }
        std::vector<double> lz;
        if (!boot_states.empty()) lz = log_z_for(boot_states, boot_values, target);

        GradAccum acc = make_accum();
        double loss = 0.0;
        std::size_t boot_idx = 0;
        const double inv_b = 1.0 / batch.size();
        for (auto [ti, t] : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            const auto& st = steps[t];
            double y = st.reward;
            if (t + 1 < static_cast<int>(steps.size())) {
                const auto& nx = steps[t + 1];
                note_target_pair(nx.state, nx.joint_action);
                double qv = boot_values[boot_idx];
                double rho = std::exp(qv / cfg_.alpha - lz[boot_idx]);
                y += env_.gamma * rho * qv;
                ++boot_idx;
            }
            double pred = mixed_value(online, st.state, st.joint_action);
            double diff = pred - y;
            loss += diff * diff * inv_b;
            add_mixed_grad(acc, online, st.state, st.joint_action, 2.0 * diff * inv_b);
        }
        last_critic_loss_ = loss;
        apply_critic_grads(online, acc);
    }

    // trajectory-level lambda targets against the mixed joint value
    void critic_step_icq_ma(SplitMix64& rng) {
        MixTables target = eval_mix(critics_t_, mixer_t_, false);
        MixTables online = eval_mix(critics_, mixer_, true);
        auto batch = sample_trajectories(rng);

        long total_steps = 0;
        std::vector<int> boot_states;
        std::vector<double> boot_values;
        for (int ti : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            total_steps += static_cast<long>(steps.size());
            for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
                const auto& nx = steps[t + 1];
                boot_states.push_back(nx.state);
                boot_values.push_back(mixed_value(target, nx.state, nx.joint_action));
            }
        }
        std::vector<double> lz;
        if (!boot_states.empty()) lz = log_z_for(boot_states, boot_values, target);

        GradAccum acc = make_accum();
        double loss = 0.0;
        const double inv_n = 1.0 / static_cast<double>(total_steps);
        std::size_t boot_base = 0;
        for (int ti : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            const int len = static_cast<int>(steps.size());
            // lambda recursion over target-net values, then per-step regression
            double corr = 0.0;
            std::vector<double> targets(len);
            for (int t = len - 1; t >= 0; --t) {
                const auto& st = steps[t];
                double boot = 0.0;
                if (t + 1 < len) {
                    std::size_t bi = boot_base + t;
                    const auto& nx = steps[t + 1];
                    note_target_pair(nx.state, nx.joint_action);
                    double qv = boot_values[bi];
                    boot = std::exp(qv / cfg_.alpha - lz[bi]) * qv;
                }
                note_target_pair(st.state, st.joint_action);
                double qt = mixed_value(target, st.state, st.joint_action);
                double delta = st.reward + env_.gamma * boot - qt;
                corr = delta + env_.gamma * cfg_.lambda * corr;
                targets[t] = qt + corr;
            }
            boot_base += static_cast<std::size_t>(len - 1);
            for (int t = 0; t < len; ++t) {
                const auto& st = steps[t];
                double pred = mixed_value(online, st.state, st.joint_action);
                double diff = pred - targets[t];
                loss += diff * diff * inv_n;
                add_mixed_grad(acc, online, st.state, st.joint_action, 2.0 * diff * inv_n);
            }
        }
        last_critic_loss_ = loss;
        apply_critic_grads(online, acc);
    }

    double masked_max(const MixTables& t, int s, int agent) const {
        double best = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < aspace_[agent]; ++a) {
            if (!allowed_[agent][static_cast<std::size_t>(s) * aspace_[agent] + a]) continue;
            best = std::max(best, t.q[agent].out[s][a]);
        }
        return best;
    }

    // one-step regression toward r + gamma * mixed max over familiar actions
    void critic_step_bcq_ma(SplitMix64& rng) {
        MixTables target = eval_mix(critics_t_, mixer_t_, false);
        MixTables online = eval_mix(critics_, mixer_, true);
        auto batch = sample_transitions(rng);

        GradAccum acc = make_accum();
        double loss = 0.0;
        const double inv_b = 1.0 / batch.size();
        for (auto [ti, t] : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            const auto& st = steps[t];
            double y = st.reward;
            if (!st.done) {
                int s2 = st.next_state;
                double v = target.b.out[s2][0];
                for (int i = 0; i < n_; ++i)
                    v += std::abs(target.w.out[s2][i]) * masked_max(target, s2, i);
                y += env_.gamma * v;
            }
            double pred = mixed_value(online, st.state, st.joint_action);
            double diff = pred - y;
            loss += diff * diff * inv_b;
            add_mixed_grad(acc, online, st.state, st.joint_action, 2.0 * diff * inv_b);
        }
        last_critic_loss_ = loss;
        apply_critic_grads(online, acc);
    }

    // tree-backup regression plus the conservative gap penalty
    void critic_step_cql_ma(SplitMix64& rng) {
        MixTables target = eval_mix(critics_t_, mixer_t_, false);
        MixTables online = eval_mix(critics_, mixer_, true);
        std::vector<NetTable> pi;
        for (int i = 0; i < n_; ++i) pi.push_back(eval_table(actors_[i], basis_, false));
        auto joint_pi = [&](int s, int joint) {
            double p = 1.0;
            for (int i = 0; i < n_; ++i) p *= pi[i].out[s][agent_of(joint, i)];
            return p;
        };
        auto batch = sample_trajectories(rng);

        long total_steps = 0;
        for (int ti : batch) total_steps += static_cast<long>(ds_.trajectories[ti].steps.size());
        const double inv_n = 1.0 / static_cast<double>(total_steps);

        GradAccum acc = make_accum();
        double loss = 0.0;
        for (int ti : batch) {
            const auto& steps = ds_.trajectories[ti].steps;
            const int len = static_cast<int>(steps.size());
            double corr = 0.0;
            std::vector<double> targets(len);
            for (int t = len - 1; t >= 0; --t) {
                const auto& st = steps[t];
                double boot = 0.0;
                double trace = 0.0;
                if (t + 1 < len) {
                    int s2 = steps[t + 1].state;
                    for (int a = 0; a < a_joint_; ++a) {
                        double p = joint_pi(s2, a);
                        if (p > 0.0) boot += p * mixed_value(target, s2, a);
                    }
                    trace = cfg_.lambda * joint_pi(s2, steps[t + 1].joint_action);
                }
                double qt = mixed_value(target, st.state, st.joint_action);
                double delta = st.reward + env_.gamma * boot - qt;
                corr = delta + env_.gamma * trace * corr;
                targets[t] = qt + corr;
            }
            for (int t = 0; t < len; ++t) {
                const auto& st = steps[t];
                int s = st.state;
                double pred = mixed_value(online, s, st.joint_action);
                double diff = pred - targets[t];
                loss += 0.5 * diff * diff * inv_n;
                add_mixed_grad(acc, online, s, st.joint_action, diff * inv_n);

                // conservative penalty: per-agent log-sum-exp minus the data value
                double scale = cfg_.alpha_cql * inv_n;
                for (int i = 0; i < n_; ++i) {
                    double w = std::abs(online.w.out[s][i]);
                    double raw_sign = sign_of(online.w.out[s][i]);
                    double b = online.b.out[s][0];
                    double m = -std::numeric_limits<double>::infinity();
                    for (int a = 0; a < aspace_[i]; ++a)
                        m = std::max(m, w * online.q[i].out[s][a] + b);
                    double sum = 0.0;
                    std::vector<double> soft(aspace_[i]);
                    for (int a = 0; a < aspace_[i]; ++a) {
                        soft[a] = std::exp(w * online.q[i].out[s][a] + b - m);
                        sum += soft[a];
                    }
                    double wgrad = 0.0;
                    for (int a = 0; a < aspace_[i]; ++a) {
                        double p = soft[a] / sum;
                        acc.q[i][s][a] += scale * w * p;
                        wgrad += p * online.q[i].out[s][a];
                    }
                    acc.w[s][i] += scale * raw_sign * wgrad;
                    acc.b[s] += scale;
                    // data term for this agent's coordinate
                    int ai = agent_of(st.joint_action, i);
                    acc.q[i][s][ai] -= scale * w;
                    acc.w[s][i] -= scale * raw_sign * online.q[i].out[s][ai];
                }
                acc.b[s] -= scale;  // single bias in the data value
            }
        }
        last_critic_loss_ = loss;
        apply_critic_grads(online, acc);
    }

    // policy projection with weights exp(w_i q_i / alpha) / Z_i
    void policy_step_icq(SplitMix64& rng) {
        std::vector<NetTable> q;
        NetTable wraw;
        if (use_critic_) {
            for (int i = 0; i < n_; ++i) q.push_back(eval_table(critics_[i], basis_, false));
            if (use_mixer_) wraw = eval_table(mixer_.hyper_w, basis_, false);
        }
        std::vector<NetTable> pi;
        for (int i = 0; i < n_; ++i) pi.push_back(eval_table(actors_[i], basis_, true));

        auto batch = sample_transitions(rng);
        const double inv_b = 1.0 / batch.size();

        std::vector<std::vector<std::vector<double>>> gout(n_);
        for (int i = 0; i < n_; ++i) gout[i].assign(ns_, std::vector<double>(aspace_[i], 0.0));

        double loss = 0.0;
        for (int i = 0; i < n_; ++i) {
            // per-sample weight numerators u = w_i q_i / alpha
            std::vector<double> u(batch.size());
            std::vector<int> st(batch.size()), ai(batch.size());
            for (std::size_t j = 0; j < batch.size(); ++j) {
                const auto& step = ds_.trajectories[batch[j].first].steps[batch[j].second];
                st[j] = step.state;
                ai[j] = agent_of(step.joint_action, i);
                double w = use_mixer_ ? std::abs(wraw.out[st[j]][i]) : 1.0;
                u[j] = w * q[i].out[st[j]][ai[j]] / cfg_.alpha;
            }
            std::vector<double> lz(batch.size(), 0.0);
            if (cfg_.z_mode == ZMode::minibatch_softmax) {
                double m = *std::max_element(u.begin(), u.end());
                double sum = 0.0;
                for (double v : u) sum += std::exp(v - m);
                double z = m + std::log(sum) - std::log(static_cast<double>(u.size()));
                std::fill(lz.begin(), lz.end(), z);
            } else {
                for (std::size_t j = 0; j < batch.size(); ++j) {
                    int s = st[j];
                    double w = use_mixer_ ? std::abs(wraw.out[s][i]) : 1.0;
                    double m = -std::numeric_limits<double>::infinity();
                    for (int a = 0; a < aspace_[i]; ++a) {
                        if (mu_for_agent(i, s, a) <= 0.0) continue;
                        m = std::max(m, w * q[i].out[s][a] / cfg_.alpha);
                    }
                    double sum = 0.0;
                    for (int a = 0; a < aspace_[i]; ++a) {
                        double mw = mu_for_agent(i, s, a);
                        if (mw > 0.0) sum += mw * std::exp(w * q[i].out[s][a] / cfg_.alpha - m);
                    }
                    lz[j] = m + std::log(sum);
                }
            }
            for (std::size_t j = 0; j < batch.size(); ++j) {
                double weight = std::exp(u[j] - lz[j]);
                double p = std::max(pi[i].out[st[j]][ai[j]], 1e-12);
                loss += -weight * std::log(p) * inv_b;
                gout[i][st[j]][ai[j]] += -weight / p * inv_b;
            }
        }
        last_policy_loss_ = loss;
        apply_actor_grads(pi, gout);
    }

    // mu restricted to one agent; the joint learner uses the joint table
    double mu_for_agent(int i, int s, int a) const {
        if (!mu_.state_defined(s)) return 0.0;
        if (joint_mode_) return mu_.joint[static_cast<std::size_t>(s) * a_joint_ + a];
        return mu_.per_agent[i][static_cast<std::size_t>(s) * aspace_[i] + a];
    }

    void policy_step_cql(SplitMix64& rng) {
        std::vector<NetTable> q;
        for (int i = 0; i < n_; ++i) q.push_back(eval_table(critics_[i], basis_, false));
        std::vector<NetTable> pi;
        for (int i = 0; i < n_; ++i) pi.push_back(eval_table(actors_[i], basis_, true));
        auto batch = sample_transitions(rng);
        const double inv_b = 1.0 / batch.size();

        std::vector<std::vector<std::vector<double>>> gout(n_);
        for (int i = 0; i < n_; ++i) gout[i].assign(ns_, std::vector<double>(aspace_[i], 0.0));
        double loss = 0.0;
        for (const auto& [ti, t] : batch) {
            const auto& step = ds_.trajectories[ti].steps[t];
            for (int i = 0; i < n_; ++i) {
                int ai = agent_of(step.joint_action, i);
                double weight = q[i].out[step.state][ai];
                double p = std::max(pi[i].out[step.state][ai], 1e-12);
                loss += -weight * std::log(p) * inv_b;
                gout[i][step.state][ai] += -weight / p * inv_b;
            }
        }
        last_policy_loss_ = loss;
        apply_actor_grads(pi, gout);
    }

    void policy_step_bc(SplitMix64& rng) {
        std::vector<NetTable> pi;
        for (int i = 0; i < n_; ++i) pi.push_back(eval_table(actors_[i], basis_, true));
        auto batch = sample_transitions(rng);
        const double inv_b = 1.0 / batch.size();

        std::vector<std::vector<std::vector<double>>> gout(n_);
        for (int i = 0; i < n_; ++i) gout[i].assign(ns_, std::vector<double>(aspace_[i], 0.0));
        double loss = 0.0;
        for (const auto& [ti, t] : batch) {
            const auto& step = ds_.trajectories[ti].steps[t];
            for (int i = 0; i < n_; ++i) {
                int ai = agent_of(step.joint_action, i);
                double p = std::max(pi[i].out[step.state][ai], 1e-12);
                loss += -std::log(p) * inv_b;
                gout[i][step.state][ai] += -1.0 / p * inv_b;
            }
        }
        last_policy_loss_ = loss;
        apply_actor_grads(pi, gout);
    }

    void apply_actor_grads(const std::vector<NetTable>& pi,
                           const std::vector<std::vector<std::vector<double>>>& gout) {
        std::vector<NetGradients> ga;
        for (int i = 0; i < n_; ++i) ga.push_back(NetGradients::zeros_like(actors_[i]));
        for (int i = 0; i < n_; ++i)
            for (int s = 0; s < ns_; ++s) backward(actors_[i], pi[i].traces[s], gout[i][s], ga[i]);
        std::vector<NetGradients*> all;
        for (auto& g : ga) all.push_back(&g);
        clip_global_norm(all, cfg_.grad_clip);
        for (int i = 0; i < n_; ++i) adam_step(actor_opt_[i], actors_[i], ga[i]);
    }

    // ---- evaluation ----------------------------------------------------------

    JointPolicy extract_policy() {
        JointPolicy pol;
        pol.num_states = ns_;
        pol.actions_per_agent = aspace_;
        pol.per_agent.resize(n_);
        if (cfg_.algorithm == Algorithm::bcq_ma) {
            std::vector<NetTable> q;
            for (int i = 0; i < n_; ++i) q.push_back(eval_table(critics_[i], basis_, false));
            for (int i = 0; i < n_; ++i) {
                pol.per_agent[i].assign(static_cast<std::size_t>(ns_) * aspace_[i], 0.0);
                for (int s = 0; s < ns_; ++s) {
                    int best = -1;
                    for (int a = 0; a < aspace_[i]; ++a) {
                        if (!allowed_[i][static_cast<std::size_t>(s) * aspace_[i] + a]) continue;
                        if (best < 0 || q[i].out[s][a] > q[i].out[s][best]) best = a;
                    }
                    pol.per_agent[i][static_cast<std::size_t>(s) * aspace_[i] + best] = 1.0;
                }
            }
            return pol;
        }
        for (int i = 0; i < n_; ++i) {
            NetTable t = eval_table(actors_[i], basis_, false);
            pol.per_agent[i].resize(static_cast<std::size_t>(ns_) * aspace_[i]);
            for (int s = 0; s < ns_; ++s)
                for (int a = 0; a < aspace_[i]; ++a)
                    pol.per_agent[i][static_cast<std::size_t>(s) * aspace_[i] + a] = t.out[s][a];
        }
        return pol;
    }

    double initial_estimate() {
        if (!use_critic_) return 0.0;
        const int s0 = env_.initial_state;
        MixTables online = eval_mix(critics_, mixer_, false);
        if (cfg_.algorithm == Algorithm::bcq_ma) {
            double v = online.b.out[s0][0];
            for (int i = 0; i < n_; ++i)
                v += std::abs(online.w.out[s0][i]) * masked_max(online, s0, i);
            return v;
        }
        // policy-weighted value at the initial state
        std::vector<NetTable> pi;
        for (int i = 0; i < n_; ++i) pi.push_back(eval_table(actors_[i], basis_, false));
        double v = 0.0;
        for (int a = 0; a < a_joint_; ++a) {
            double p = 1.0;
            for (int i = 0; i < n_; ++i) p *= pi[i].out[s0][agent_of(a, i)];
            v += p * mixed_value(online, s0, a);
        }
        return v;
    }

    void record(long step) {
        MetricsRecord rec;
        rec.step = step;
        rec.q_init = initial_estimate();
        rec.critic_loss = last_critic_loss_;
        rec.policy_loss = last_policy_loss_;
        JointPolicy pol = extract_policy();
        auto trajs = rollout(env_, pol, derive_seed(cfg_.seed, kStreamEval + 31 * step),
                             cfg_.eval_episodes);
        double ret = 0.0;
        for (const auto& tr : trajs) ret += tr.total_reward();
        rec.eval_return = ret / cfg_.eval_episodes;
        bool blown = !std::isfinite(rec.q_init) ||
                     (true_value_ > 0.0 && rec.q_init > cfg_.divergence_factor * true_value_);
        if (blown && !metrics_.diverged) {
            metrics_.diverged = true;
            metrics_.diverged_step = step;
        }
        rec.diverged = metrics_.diverged;
        metrics_.records.push_back(rec);
    }

    const OfflineDataset& ds_;
    LearnerConfig cfg_;
    TargetAudit* audit_;
    TabularMdp env_;
    int ns_ = 0, n_ = 0, a_joint_ = 0;
    std::vector<int> aspace_;
    bool joint_mode_ = false;
    bool use_critic_ = true, use_actor_ = true, use_mixer_ = false;

    std::vector<std::vector<double>> basis_;
    BehaviorEstimate mu_;
    std::vector<std::uint8_t> seen_;
    std::vector<std::pair<int, int>> transitions_;
    std::vector<std::vector<std::uint8_t>> allowed_;  // bcq familiarity mask

    std::vector<DenseNet> critics_, critics_t_, actors_;
    Mixer mixer_, mixer_t_;
    std::vector<AdamState> critic_opt_, actor_opt_;
    AdamState mixw_opt_, mixb_opt_;

    double true_value_ = 0.0;
    double last_critic_loss_ = 0.0, last_policy_loss_ = 0.0;
    TrainMetrics metrics_;
};

}  // namespace

TrainResult train(const OfflineDataset& ds, const LearnerConfig& cfg, const TabularMdp* eval_env,
                  TargetAudit* audit) {
    Trainer trainer(ds, cfg, eval_env, audit);
    return trainer.run();
}

TrainResult train_icq(const OfflineDataset& ds, LearnerConfig cfg, const TabularMdp* eval_env,
                      TargetAudit* audit) {
    cfg.algorithm = Algorithm::icq;
    return train(ds, cfg, eval_env, audit);
}

TrainResult train_icq_ma(const OfflineDataset& ds, LearnerConfig cfg, const TabularMdp* eval_env,
                         TargetAudit* audit) {
    cfg.algorithm = Algorithm::icq_ma;
    return train(ds, cfg, eval_env, audit);
}

TrainResult train_bcq_ma(const OfflineDataset& ds, LearnerConfig cfg, const TabularMdp* eval_env,
                         TargetAudit* audit) {
    cfg.algorithm = Algorithm::bcq_ma;
    return train(ds, cfg, eval_env, audit);
}

TrainResult train_cql_ma(const OfflineDataset& ds, LearnerConfig cfg, const TabularMdp* eval_env,
                         TargetAudit* audit) {
    cfg.algorithm = Algorithm::cql_ma;
    return train(ds, cfg, eval_env, audit);
}

TrainResult train_bc_ma(const OfflineDataset& ds, LearnerConfig cfg, const TabularMdp* eval_env,
                        TargetAudit* audit) {
    cfg.algorithm = Algorithm::bc_ma;
    return train(ds, cfg, eval_env, audit);
}

std::string checkpoint_to_json(const TrainResult& result) {
    using nlohmann::json;
    json out;
    json actors = json::array();
    for (const auto& net : result.actors) actors.push_back(json::parse(net_to_json(net)));
    json critics = json::array();
    for (const auto& net : result.critics) critics.push_back(json::parse(net_to_json(net)));
    out["actors"] = actors;
    out["critics"] = critics;
    if (result.mixer.num_agents > 0) {
        out["mixer"] = {{"hyper_w", json::parse(net_to_json(result.mixer.hyper_w))},
                        {"hyper_b", json::parse(net_to_json(result.mixer.hyper_b))},
                        {"num_agents", result.mixer.num_agents}};
    }
    return out.dump();
}

}  // namespace icq
