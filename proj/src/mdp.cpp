#include "icq/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "icq/rng.hpp"

namespace icq {

namespace {
constexpr double kRowTol = 1e-12;
}

bool TabularMdp::deterministic() const {
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_joint_actions; ++a) {
            int ones = 0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                double v = p(s, a, s2);
                if (v == 1.0) ++ones;
                else if (v != 0.0) return false;
            }
            if (ones != 1) return false;
        }
    }
    return true;
}

double TabularMdp::max_abs_reward() const {
    double best = 0.0;
    for (double v : reward) best = std::max(best, std::abs(v));
    return best;
}

void TabularMdp::validate() const {
    if (num_states <= 0 || num_joint_actions <= 0)
        throw std::invalid_argument("TabularMdp: empty state or action space");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("TabularMdp: gamma must be in (0,1)");
    if (horizon < 1) throw std::invalid_argument("TabularMdp: horizon must be >= 1");
    if (initial_state < 0 || initial_state >= num_states)
        throw std::invalid_argument("TabularMdp: initial_state out of range");
    std::size_t want_t = static_cast<std::size_t>(num_states) * num_joint_actions * num_states;
    std::size_t want_r = static_cast<std::size_t>(num_states) * num_joint_actions;
    if (transition.size() != want_t || reward.size() != want_r)
        throw std::invalid_argument("TabularMdp: table sizes inconsistent with dimensions");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_joint_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                double v = p(s, a, s2);
                if (v < 0.0 || v > 1.0)
                    throw std::invalid_argument("TabularMdp: transition entry outside [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowTol)
                throw std::invalid_argument("TabularMdp: transition row for state " + std::to_string(s) +
                                            " action " + std::to_string(a) + " does not sum to 1");
        }
    }
}

int JointPolicy::num_joint_actions() const {
    int n = 1;
    for (int a : actions_per_agent) n *= a;
    return n;
}

double JointPolicy::joint_prob(int state, int joint_action) const {
    double p = 1.0;
    int rem = joint_action;
    for (int i = 0; i < num_agents(); ++i) {
        int ai = rem % actions_per_agent[i];
        rem /= actions_per_agent[i];
        p *= agent_prob(i, state, ai);
    }
    return p;
}

std::vector<double> JointPolicy::joint_row(int state) const {
    int na = num_joint_actions();
    std::vector<double> row(na);
    for (int a = 0; a < na; ++a) row[a] = joint_prob(state, a);
    return row;
}

void JointPolicy::validate() const {
    if (num_states <= 0 || actions_per_agent.empty())
        throw std::invalid_argument("JointPolicy: empty");
    if (per_agent.size() != actions_per_agent.size())
        throw std::invalid_argument("JointPolicy: table count mismatch");
    for (int i = 0; i < num_agents(); ++i) {
        int na = actions_per_agent[i];
        if (static_cast<int>(per_agent[i].size()) != num_states * na)
            throw std::invalid_argument("JointPolicy: table size mismatch for agent " + std::to_string(i));
        for (int s = 0; s < num_states; ++s) {
            double sum = 0.0;
            for (int a = 0; a < na; ++a) {
                double v = agent_prob(i, s, a);
                if (v < 0.0) throw std::invalid_argument("JointPolicy: negative probability");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kRowTol)
                throw std::invalid_argument("JointPolicy: row does not sum to 1");
        }
    }
}

int agent_action(int joint_action, int agent, const std::vector<int>& actions_per_agent) {
    int rem = joint_action;
    for (int i = 0; i < agent; ++i) rem /= actions_per_agent[i];
    return rem % actions_per_agent[agent];
}

int encode_joint_action(const std::vector<int>& actions, const std::vector<int>& actions_per_agent) {
    int idx = 0;
    int mult = 1;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        idx += actions[i] * mult;
        mult *= actions_per_agent[i];
    }
    return idx;
}

double Trajectory::total_reward() const {
    double s = 0.0;
    for (const auto& st : steps) s += st.reward;
    return s;
}

TabularMdp build_mmdp(const MmdpSpec& spec) {
    if (spec.num_agents < 1) throw std::invalid_argument("build_mmdp: need at least one agent");
    if (spec.horizon < 1) throw std::invalid_argument("build_mmdp: horizon must be >= 1");
    if (!(spec.gamma > 0.0 && spec.gamma < 1.0))
        throw std::invalid_argument("build_mmdp: gamma must be in (0,1)");

    const int n = spec.num_agents;
    const int num_actions = 1 << n;
    TabularMdp mdp;
    mdp.num_states = 2;
    mdp.num_joint_actions = num_actions;
    mdp.gamma = spec.gamma;
    mdp.horizon = spec.horizon;
    mdp.initial_state = kMmdpTau2;
    mdp.transition.assign(static_cast<std::size_t>(2) * num_actions * 2, 0.0);
    mdp.reward.assign(static_cast<std::size_t>(2) * num_actions, 0.0);

    for (int a = 0; a < num_actions; ++a) {
        int ones = 0;
        for (int b = 0; b < n; ++b) ones += (a >> b) & 1;
        // tau1 is absorbing
        mdp.p_ref(kMmdpTau1, a, kMmdpTau1) = 1.0;
        // tau2 drops to tau1 when at most half the agents pick 1
        bool to_tau1 = 2 * ones <= n;
        mdp.p_ref(kMmdpTau2, a, to_tau1 ? kMmdpTau1 : kMmdpTau2) = 1.0;
        // reward depends on the joint action only: all agents select action 0
        double r = (a == 0) ? 1.0 : 0.0;
        mdp.r_ref(kMmdpTau1, a) = r;
        mdp.r_ref(kMmdpTau2, a) = r;
    }
    mdp.validate();
    return mdp;
}

JointPolicy uniform_joint_policy(int num_agents, int num_states, int actions_per_agent) {
    JointPolicy pol;
    pol.num_states = num_states;
    pol.actions_per_agent.assign(num_agents, actions_per_agent);
    pol.per_agent.assign(num_agents,
                         std::vector<double>(static_cast<std::size_t>(num_states) * actions_per_agent,
                                             1.0 / actions_per_agent));
    return pol;
}

JointPolicy optimal_mmdp_policy(int num_agents) {
    JointPolicy pol;
    pol.num_states = 2;
    pol.actions_per_agent.assign(num_agents, 2);
    pol.per_agent.assign(num_agents, std::vector<double>(4, 0.0));
    for (int i = 0; i < num_agents; ++i) {
        pol.per_agent[i][0 * 2 + 0] = 1.0;  // tau1: action 0
        pol.per_agent[i][1 * 2 + 0] = 1.0;  // tau2: action 0
    }
    return pol;
}

JointPolicy mmdp_mixture_policy(int num_agents, double expert_fraction) {
    if (expert_fraction < 0.0 || expert_fraction > 1.0)
        throw std::invalid_argument("mmdp_mixture_policy: fraction outside [0,1]");
    JointPolicy pol = optimal_mmdp_policy(num_agents);
    for (int i = 0; i < num_agents; ++i) {
        for (int s = 0; s < 2; ++s) {
            double p0 = expert_fraction * 1.0 + (1.0 - expert_fraction) * 0.5;
            pol.per_agent[i][s * 2 + 0] = p0;
            pol.per_agent[i][s * 2 + 1] = 1.0 - p0;
        }
    }
    return pol;
}

std::vector<Trajectory> rollout(const TabularMdp& mdp, const JointPolicy& policy,
                                std::uint64_t seed, int episodes) {
    if (policy.num_states != mdp.num_states || policy.num_joint_actions() != mdp.num_joint_actions)
        throw std::invalid_argument("rollout: policy dimensions do not match the MDP");
    if (episodes < 0) throw std::invalid_argument("rollout: negative episode count");

    std::vector<Trajectory> out;
    out.reserve(episodes);
    for (int e = 0; e < episodes; ++e) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(e)));
        Trajectory traj;
        traj.steps.reserve(mdp.horizon);
        traj.behavior_probs.reserve(mdp.horizon);
        int s = mdp.initial_state;
        for (int t = 0; t < mdp.horizon; ++t) {
            std::vector<int> acts(policy.num_agents());
            double prob = 1.0;
            for (int i = 0; i < policy.num_agents(); ++i) {
                int na = policy.actions_per_agent[i];
                std::span<const double> row(&policy.per_agent[i][static_cast<std::size_t>(s) * na],
                                            static_cast<std::size_t>(na));
                acts[i] = rng.categorical(row);
                prob *= row[acts[i]];
            }
            int a = encode_joint_action(acts, policy.actions_per_agent);
            std::span<const double> trow(
                &mdp.transition[(static_cast<std::size_t>(s) * mdp.num_joint_actions + a) * mdp.num_states],
                static_cast<std::size_t>(mdp.num_states));
            int s2 = rng.categorical(trow);
            TrajectoryStep step;
            step.state = s;
            step.joint_action = a;
            step.reward = mdp.r(s, a);
            step.next_state = s2;
            step.done = (t == mdp.horizon - 1);
            traj.steps.push_back(step);
            traj.behavior_probs.push_back(prob);
            s = s2;
        }
        out.push_back(std::move(traj));
    }
    return out;
}

ValueEstimate monte_carlo_value(const TabularMdp& mdp, const JointPolicy& policy,
                                int episodes, std::uint64_t seed) {
    if (episodes < 1) throw std::invalid_argument("monte_carlo_value: need at least one episode");
    auto trajs = rollout(mdp, policy, seed, episodes);
    std::vector<double> returns;
    returns.reserve(trajs.size());
    for (const auto& traj : trajs) {
        double g = 0.0, disc = 1.0;
        for (const auto& st : traj.steps) {
            g += disc * st.reward;
            disc *= mdp.gamma;
        }
        returns.push_back(g);
    }
    ValueEstimate est;
    for (double g : returns) est.mean += g;
    est.mean /= episodes;
    double var = 0.0;
    for (double g : returns) var += (g - est.mean) * (g - est.mean);
    est.std_error = episodes > 1 ? std::sqrt(var / (episodes - 1) / episodes) : 0.0;
    return est;
}

}  // namespace icq
