#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icq/mdp.hpp"

namespace icq {

// Offline buffer plus the count statistics every learner and analyzer needs.
// Immutable after construction; counts are derived once from the trajectories.
struct OfflineDataset {
    std::vector<Trajectory> trajectories;
    int num_agents = 0;
    std::vector<int> action_space;  // per-agent action count
    int num_states = 0;
    int initial_state = 0;
    double gamma = 0.99;
    int horizon = 1;

    std::vector<long long> pair_counts;        // [state][joint_action]
    std::vector<long long> transition_counts;  // [state][joint_action][next_state]
    long long total_transitions = 0;

    int num_joint_actions() const {
        int n = 1;
        for (int a : action_space) n *= a;
        return n;
    }
    long long pair_count(int s, int a) const {
        return pair_counts[static_cast<std::size_t>(s) * num_joint_actions() + a];
    }
    bool seen(int s, int a) const { return pair_count(s, a) > 0; }
    int seen_pair_total() const;
    std::vector<std::uint8_t> seen_mask() const;

    static OfflineDataset from_trajectories(std::vector<Trajectory> trajs, int num_agents,
                                            std::vector<int> action_space, int num_states,
                                            int initial_state, double gamma, int horizon);
};

// Count-normalized transition model of the batch. Rows for pairs that never
// occur point at the initial state with probability 1.
struct EmpiricalMdp {
    int num_states = 0;
    int num_joint_actions = 0;
    std::vector<double> transition;       // [state][joint_action][next_state]
    std::vector<std::uint8_t> seen_mask;  // [state][joint_action]

    double p(int s, int a, int s2) const {
        return transition[(static_cast<std::size_t>(s) * num_joint_actions + a) * num_states + s2];
    }
    bool seen(int s, int a) const {
        return seen_mask[static_cast<std::size_t>(s) * num_joint_actions + a] != 0;
    }
};

// Count-based behavior policy estimate. Conditional rows exist only for
// visited states; querying an unvisited state throws. The joint table is
// positive exactly on seen pairs.
struct BehaviorEstimate {
    int num_agents = 0;
    std::vector<int> action_space;
    int num_states = 0;
    double support_threshold = 0.3;

    std::vector<double> joint;                         // [state][joint_action]
    std::vector<std::vector<double>> per_agent;        // [agent][state*actions + a]
    std::vector<std::vector<long long>> agent_counts;  // same layout as per_agent
    std::vector<long long> state_visits;

    int num_joint_actions() const {
        int n = 1;
        for (int a : action_space) n *= a;
        return n;
    }
    bool state_defined(int s) const { return state_visits[s] > 0; }
    double joint_prob(int s, int a) const;
    double agent_prob(int agent, int s, int a) const;
    /// Per-agent count ratio G(a|s)/max_a' G(a'|s), the familiarity measure
    /// compared against support_threshold.
    double count_ratio(int agent, int s, int a) const;
    /// Most frequent action for an agent at a state (lowest index on ties).
    int modal_action(int agent, int s) const;
};

/// Generates exactly `expert_count` trajectories with the optimal policy and
/// the remainder with a uniform-random joint policy, shuffled, all derived
/// deterministically from the seed.
OfflineDataset collect_mmdp_dataset(const MmdpSpec& spec, int num_trajectories,
                                    int expert_count, std::uint64_t seed);

EmpiricalMdp empirical_mdp(const OfflineDataset& ds);
BehaviorEstimate estimate_behavior(const OfflineDataset& ds, double support_threshold = 0.3);

/// JSON Lines on disk: a header object on line 1, one trajectory object per
/// following line. Counts are rebuilt on load.
void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

}  // namespace icq
