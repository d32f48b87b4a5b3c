#pragma once

#include <cstdint>
#include <vector>

namespace icq {

// Tabular MDP over a joint action space. Transition rows are full
// distributions; a deterministic MDP is one where every row is one-hot.
struct TabularMdp {
    int num_states = 0;
    int num_joint_actions = 0;
    std::vector<double> transition;  // [state][joint_action][next_state]
    std::vector<double> reward;      // [state][joint_action]
    double gamma = 0.99;
    int initial_state = 0;
    int horizon = 1;

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * num_joint_actions + a) * num_states + s2];
    }
    double& p_ref(int s, int a, int s2) {
        return transition[(static_cast<std::size_t>(s) * num_joint_actions + a) * num_states + s2];
    }
    double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * num_joint_actions + a]; }
    double& r_ref(int s, int a) { return reward[static_cast<std::size_t>(s) * num_joint_actions + a]; }

    /// True iff every transition row has exactly one entry equal to 1.
    bool deterministic() const;
    double max_abs_reward() const;

    /// Checks row normalization (1e-12), entry ranges, gamma and horizon.
    /// Throws std::invalid_argument on violation.
    void validate() const;
};

// The two-state cooperative environment used throughout: states {tau1, tau2},
// n agents each choosing action 0 or 1 per step. Agents start at tau2; the
// joint action moves tau2 to tau1 when at most half the agents pick 1, and
// tau1 is absorbing. Reward is 1 exactly when every agent picks action 0,
// in either state.
struct MmdpSpec {
    int num_agents = 2;
    int horizon = 100;
    double gamma = 0.99;
};

inline constexpr int kMmdpTau1 = 0;
inline constexpr int kMmdpTau2 = 1;

// Factored stochastic policy: one table per agent, rows indexed by the state
// each agent observes (the global state here). The joint probability of a
// joint action is the product of the per-agent probabilities. A single-agent
// policy over the full joint action space is the degenerate n=1 case.
struct JointPolicy {
    int num_states = 0;
    std::vector<int> actions_per_agent;           // action count per agent
    std::vector<std::vector<double>> per_agent;   // [agent][state*actions + a]

    int num_agents() const { return static_cast<int>(actions_per_agent.size()); }
    int num_joint_actions() const;

    double agent_prob(int agent, int state, int action) const {
        return per_agent[agent][static_cast<std::size_t>(state) * actions_per_agent[agent] + action];
    }
    double joint_prob(int state, int joint_action) const;

    /// Full product distribution over joint actions at a state.
    std::vector<double> joint_row(int state) const;

    /// Row normalization within 1e-12 and nonnegativity. Throws on violation.
    void validate() const;
};

/// Decode one agent's action from a joint action index (agent 0 = least
/// significant digit in the mixed-radix encoding).
int agent_action(int joint_action, int agent, const std::vector<int>& actions_per_agent);

/// Joint action index from per-agent actions.
int encode_joint_action(const std::vector<int>& actions, const std::vector<int>& actions_per_agent);

struct TrajectoryStep {
    int state = 0;
    int joint_action = 0;
    double reward = 0.0;
    int next_state = 0;
    bool done = false;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    std::vector<double> behavior_probs;  // probability the behavior policy gave the taken action

    double total_reward() const;
};

TabularMdp build_mmdp(const MmdpSpec& spec);

JointPolicy uniform_joint_policy(int num_agents, int num_states, int actions_per_agent);
JointPolicy optimal_mmdp_policy(int num_agents);
/// Convex mixture of the optimal and the uniform MMDP policies per agent row.
JointPolicy mmdp_mixture_policy(int num_agents, double expert_fraction);

std::vector<Trajectory> rollout(const TabularMdp& mdp, const JointPolicy& policy,
                                std::uint64_t seed, int episodes);

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean discounted return from the initial state under the policy.
ValueEstimate monte_carlo_value(const TabularMdp& mdp, const JointPolicy& policy,
                                int episodes, std::uint64_t seed);

}  // namespace icq
