#pragma once

#include <cstdint>
#include <vector>

#include "icq/dataset.hpp"
#include "icq/linalg.hpp"
#include "icq/mdp.hpp"

namespace icq {

// Pair-level error propagation system. The policy transition matrix over
// (state, joint-action) pairs, P(s,a -> s',a') = P(s'|s,a) pi(a'|s'), is
// partitioned by the seen mask with seen pairs first; pairs are ordered
// state-major, action-minor within each part.
struct ErrorSystem {
    Matrix p_ss, p_su, p_us, p_uu;
    std::vector<double> eps_b;  // one entry per unseen pair, in unseen order
    double gamma = 0.99;
    std::vector<int> seen_pairs;    // pair ids s*num_actions + a
    std::vector<int> unseen_pairs;
    int num_actions = 0;
    bool deterministic_mdp = true;  // warning flag: Theorem 1 assumes determinism
};

/// Assembles and partitions the pair transition matrix. eps_b_full is indexed
/// over the full [state][joint_action] grid; entries at seen pairs are ignored.
ErrorSystem build_error_system(const TabularMdp& mdp, const JointPolicy& policy,
                               const std::vector<std::uint8_t>& seen_mask,
                               const std::vector<double>& eps_b_full);

struct ErrorSolution {
    std::vector<double> eps_s;
    std::vector<double> eps_u;
};

/// Exact solution of eps = gamma P eps + [0, eps_b]^T by dense linear solve.
ErrorSolution solve_error_system(const ErrorSystem& sys);

/// gamma ||P_su||_inf / ((1-gamma)(1 - gamma ||P_ss||_inf)) * ||eps_b||_inf.
/// Throws if the system was built from a stochastic MDP; returns +inf when
/// gamma ||P_ss||_inf >= 1.
double theorem1_bound(const ErrorSystem& sys);

struct ConcentrabilityResult {
    std::vector<double> c;    // c(1..k_max)
    double coefficient = 0.0; // (1-gamma)^2 sum k gamma^(k-1) c(k), truncated
    double tail_bound = 0.0;  // geometric bound on the dropped tail
    bool infinite = false;    // some reachable state has zero dataset mass
};

/// Concentrability coefficients for a policy sequence against the dataset
/// marginal. The marginal is measured as a density over the pair space
/// (state visitation divided by the joint action count), matching the
/// fixed-budget comparison across agent counts. Policies cycle if fewer than
/// k_max are given.
ConcentrabilityResult concentrability(const TabularMdp& mdp, const OfflineDataset& ds,
                                      const std::vector<JointPolicy>& policies, int k_max);

}  // namespace icq
