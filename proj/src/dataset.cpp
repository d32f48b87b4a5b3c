#include "icq/dataset.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "icq/rng.hpp"

namespace icq {

using nlohmann::json;

int OfflineDataset::seen_pair_total() const {
    int n = 0;
    for (long long c : pair_counts) n += (c > 0) ? 1 : 0;
    return n;
}

std::vector<std::uint8_t> OfflineDataset::seen_mask() const {
    std::vector<std::uint8_t> mask(pair_counts.size(), 0);
    for (std::size_t i = 0; i < pair_counts.size(); ++i) mask[i] = pair_counts[i] > 0 ? 1 : 0;
    return mask;
}

OfflineDataset OfflineDataset::from_trajectories(std::vector<Trajectory> trajs, int num_agents,
                                                 std::vector<int> action_space, int num_states,
                                                 int initial_state, double gamma, int horizon) {
    OfflineDataset ds;
    ds.trajectories = std::move(trajs);
    ds.num_agents = num_agents;
    ds.action_space = std::move(action_space);
    ds.num_states = num_states;
    ds.initial_state = initial_state;
    ds.gamma = gamma;
    ds.horizon = horizon;

    const int na = ds.num_joint_actions();
    ds.pair_counts.assign(static_cast<std::size_t>(num_states) * na, 0);
    ds.transition_counts.assign(static_cast<std::size_t>(num_states) * na * num_states, 0);
    ds.total_transitions = 0;
    for (const auto& traj : ds.trajectories) {
        if (static_cast<int>(traj.steps.size()) > horizon)
            throw std::invalid_argument("OfflineDataset: trajectory longer than horizon");
        for (std::size_t t = 0; t < traj.steps.size(); ++t) {
            const auto& st = traj.steps[t];
            if (t + 1 < traj.steps.size() && traj.steps[t + 1].state != st.next_state)
                throw std::invalid_argument("OfflineDataset: trajectory steps do not chain");
            if (st.state < 0 || st.state >= num_states || st.next_state < 0 ||
                st.next_state >= num_states || st.joint_action < 0 || st.joint_action >= na)
                throw std::invalid_argument("OfflineDataset: step indices out of range");
            ds.pair_counts[static_cast<std::size_t>(st.state) * na + st.joint_action]++;
            ds.transition_counts[(static_cast<std::size_t>(st.state) * na + st.joint_action) *
                                     num_states +
                                 st.next_state]++;
            ds.total_transitions++;
        }
    }
    return ds;
}

OfflineDataset collect_mmdp_dataset(const MmdpSpec& spec, int num_trajectories,
                                    int expert_count, std::uint64_t seed) {
    if (expert_count > num_trajectories)
        throw std::invalid_argument("collect_mmdp_dataset: expert_count exceeds num_trajectories");
    if (expert_count < 0 || num_trajectories < 0)
        throw std::invalid_argument("collect_mmdp_dataset: negative counts");

    TabularMdp mdp = build_mmdp(spec);
    JointPolicy expert = optimal_mmdp_policy(spec.num_agents);
    JointPolicy uniform = uniform_joint_policy(spec.num_agents, 2, 2);

    std::vector<Trajectory> trajs;
    trajs.reserve(num_trajectories);
    for (int i = 0; i < expert_count; ++i) {
        auto t = rollout(mdp, expert, derive_seed(seed, static_cast<std::uint64_t>(i)), 1);
        trajs.push_back(std::move(t[0]));
    }
    for (int i = expert_count; i < num_trajectories; ++i) {
        auto t = rollout(mdp, uniform, derive_seed(seed, static_cast<std::uint64_t>(i)), 1);
        trajs.push_back(std::move(t[0]));
    }
    SplitMix64 rng(derive_seed(seed, 0x5A3FFull));
    rng.shuffle(trajs);

    return OfflineDataset::from_trajectories(std::move(trajs), spec.num_agents,
                                             std::vector<int>(spec.num_agents, 2), 2, kMmdpTau2,
                                             spec.gamma, spec.horizon);
}

EmpiricalMdp empirical_mdp(const OfflineDataset& ds) {
    if (ds.trajectories.empty()) throw std::invalid_argument("empirical_mdp: empty dataset");
    const int ns = ds.num_states;
    const int na = ds.num_joint_actions();
    EmpiricalMdp emp;
    emp.num_states = ns;
    emp.num_joint_actions = na;
    emp.transition.assign(static_cast<std::size_t>(ns) * na * ns, 0.0);
    emp.seen_mask.assign(static_cast<std::size_t>(ns) * na, 0);
    for (int s = 0; s < ns; ++s) {
        for (int a = 0; a < na; ++a) {
            long long total = ds.pair_counts[static_cast<std::size_t>(s) * na + a];
            std::size_t base = (static_cast<std::size_t>(s) * na + a) * ns;
            if (total > 0) {
                emp.seen_mask[static_cast<std::size_t>(s) * na + a] = 1;
                for (int s2 = 0; s2 < ns; ++s2)
                    emp.transition[base + s2] =
                        static_cast<double>(ds.transition_counts[base + s2]) / total;
            } else {
                emp.transition[base + ds.initial_state] = 1.0;
            }
        }
    }
    return emp;
}

BehaviorEstimate estimate_behavior(const OfflineDataset& ds, double support_threshold) {
    if (ds.trajectories.empty()) throw std::invalid_argument("estimate_behavior: empty dataset");
    const int ns = ds.num_states;
    const int na = ds.num_joint_actions();
    BehaviorEstimate mu;
    mu.num_agents = ds.num_agents;
    mu.action_space = ds.action_space;
    mu.num_states = ns;
    mu.support_threshold = support_threshold;
    mu.joint.assign(static_cast<std::size_t>(ns) * na, 0.0);
    mu.state_visits.assign(ns, 0);
    mu.per_agent.resize(ds.num_agents);
    mu.agent_counts.resize(ds.num_agents);
    for (int i = 0; i < ds.num_agents; ++i) {
        mu.per_agent[i].assign(static_cast<std::size_t>(ns) * ds.action_space[i], 0.0);
        mu.agent_counts[i].assign(static_cast<std::size_t>(ns) * ds.action_space[i], 0);
    }

    for (int s = 0; s < ns; ++s) {
        long long visits = 0;
        for (int a = 0; a < na; ++a) visits += ds.pair_counts[static_cast<std::size_t>(s) * na + a];
        mu.state_visits[s] = visits;
        if (visits == 0) continue;
        for (int a = 0; a < na; ++a) {
            long long c = ds.pair_counts[static_cast<std::size_t>(s) * na + a];
            mu.joint[static_cast<std::size_t>(s) * na + a] = static_cast<double>(c) / visits;
            if (c == 0) continue;
            for (int i = 0; i < ds.num_agents; ++i) {
                int ai = agent_action(a, i, ds.action_space);
                mu.agent_counts[i][static_cast<std::size_t>(s) * ds.action_space[i] + ai] += c;
            }
        }
        for (int i = 0; i < ds.num_agents; ++i) {
            for (int ai = 0; ai < ds.action_space[i]; ++ai) {
                std::size_t idx = static_cast<std::size_t>(s) * ds.action_space[i] + ai;
                mu.per_agent[i][idx] = static_cast<double>(mu.agent_counts[i][idx]) / visits;
            }
        }
    }
    return mu;
}

double BehaviorEstimate::joint_prob(int s, int a) const {
    if (!state_defined(s))
        throw std::runtime_error("BehaviorEstimate: state " + std::to_string(s) + " never visited");
    return joint[static_cast<std::size_t>(s) * num_joint_actions() + a];
}

double BehaviorEstimate::agent_prob(int agent, int s, int a) const {
    if (!state_defined(s))
        throw std::runtime_error("BehaviorEstimate: state " + std::to_string(s) + " never visited");
    return per_agent[agent][static_cast<std::size_t>(s) * action_space[agent] + a];
}

double BehaviorEstimate::count_ratio(int agent, int s, int a) const {
    if (!state_defined(s))
        throw std::runtime_error("BehaviorEstimate: state " + std::to_string(s) + " never visited");
    long long best = 0;
    for (int ai = 0; ai < action_space[agent]; ++ai)
        best = std::max(best, agent_counts[agent][static_cast<std::size_t>(s) * action_space[agent] + ai]);
    if (best == 0) return 0.0;
    return static_cast<double>(agent_counts[agent][static_cast<std::size_t>(s) * action_space[agent] + a]) /
           static_cast<double>(best);
}

int BehaviorEstimate::modal_action(int agent, int s) const {
    if (!state_defined(s))
        throw std::runtime_error("BehaviorEstimate: state " + std::to_string(s) + " never visited");
    long long best = -1;
    int arg = 0;
    for (int ai = 0; ai < action_space[agent]; ++ai) {
        long long c = agent_counts[agent][static_cast<std::size_t>(s) * action_space[agent] + ai];
        if (c > best) {
            best = c;
            arg = ai;
        }
    }
    return arg;
}

void save_dataset(const OfflineDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
    json header = {{"num_agents", ds.num_agents}, {"action_space", ds.action_space},
                   {"num_states", ds.num_states}, {"initial_state", ds.initial_state},
                   {"gamma", ds.gamma},           {"horizon", ds.horizon}};
    out << header.dump() << "\n";
    for (const auto& traj : ds.trajectories) {
        json steps = json::array();
        for (const auto& st : traj.steps)
            steps.push_back({st.state, st.joint_action, st.reward, st.next_state, st.done ? 1 : 0});
        json line = {{"steps", steps}, {"behavior_probs", traj.behavior_probs}};
        out << line.dump() << "\n";
    }
    if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

OfflineDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("load_dataset: missing header in " + path);

    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw std::runtime_error("load_dataset: line 1: " + std::string(e.what()));
    }
    int num_agents, num_states, initial_state, horizon;
    double gamma;
    std::vector<int> action_space;
    try {
        num_agents = header.at("num_agents").get<int>();
        action_space = header.at("action_space").get<std::vector<int>>();
        num_states = header.at("num_states").get<int>();
        initial_state = header.at("initial_state").get<int>();
        gamma = header.at("gamma").get<double>();
        horizon = header.at("horizon").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error("load_dataset: bad header: " + std::string(e.what()));
    }
    if (num_agents < 1 || static_cast<int>(action_space.size()) != num_agents || num_states < 1 ||
        horizon < 1 || !(gamma > 0.0 && gamma < 1.0))
        throw std::runtime_error("load_dataset: header fields inconsistent");

    std::vector<Trajectory> trajs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
            Trajectory traj;
            for (const auto& st : obj.at("steps")) {
                TrajectoryStep step;
                step.state = st.at(0).get<int>();
                step.joint_action = st.at(1).get<int>();
                step.reward = st.at(2).get<double>();
                step.next_state = st.at(3).get<int>();
                step.done = st.at(4).get<int>() != 0;
                traj.steps.push_back(step);
            }
            traj.behavior_probs = obj.at("behavior_probs").get<std::vector<double>>();
            trajs.push_back(std::move(traj));
        } catch (const json::exception& e) {
            throw std::runtime_error("load_dataset: line " + std::to_string(line_no) + ": " +
                                     std::string(e.what()));
        }
    }
    return OfflineDataset::from_trajectories(std::move(trajs), num_agents, std::move(action_space),
                                             num_states, initial_state, gamma, horizon);
}

}  // namespace icq
