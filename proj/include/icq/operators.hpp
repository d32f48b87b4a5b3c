#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icq/dataset.hpp"
#include "icq/mdp.hpp"

namespace icq {

struct QTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> values;

    QTable() = default;
    QTable(int s, int a, double fill = 0.0)
        : num_states(s), num_actions(a), values(static_cast<std::size_t>(s) * a, fill) {}

    double& at(int s, int a) { return values[static_cast<std::size_t>(s) * num_actions + a]; }
    double at(int s, int a) const { return values[static_cast<std::size_t>(s) * num_actions + a]; }
    bool finite() const;
};

enum class OperatorKind {
    standard,            // expectation under an explicit policy
    importance_sampled,  // behavior expectation reweighted by pi/mu, seen actions only
    icq,                 // softmax-of-Q reweighted behavior expectation
    bcq,                 // max over seen actions
    tree_backup,         // trajectory targets, corrections weighted by pi
    q_lambda,            // trajectory targets, corrections weighted by lambda
    icq_lambda,          // trajectory targets with the icq importance ratio
};

struct OperatorSpec {
    OperatorKind kind = OperatorKind::icq;
    double alpha = 1.0;   // Lagrangian coefficient, > 0 for icq kinds
    double lambda = 0.0;  // trace decay in [0,1] for trajectory kinds

    void validate() const;
};

// Normalized behavior-softmax weights over the seen actions at one state:
// w_a = mu(a) exp(Q(a)/alpha) / Z. Computed with max subtraction so alpha
// down to 1e-9 cannot overflow; the shift cancels in the ratio.
struct SoftmaxTarget {
    std::vector<int> actions;
    std::vector<double> weights;
};

SoftmaxTarget icq_weights(std::span<const double> q_row, std::span<const double> mu_row,
                          double alpha);

/// Expected next-state value under the implicit-constraint policy:
/// sum over seen a of mu(a|s) exp(Q(s,a)/alpha) Q(s,a) / Z(s).
double icq_target(const QTable& q, const BehaviorEstimate& mu, int state, double alpha);

/// Max over seen actions, ties resolved toward the lowest action index.
double bcq_target(const QTable& q, const std::vector<std::uint8_t>& seen_mask, int state);

/// Numeric form of the softmax-gap bound (|A|-1) * max{ 1/((1/alpha+1)C+1),
/// 2 q_max / (1 + C exp(1/alpha)) } for one state; C is the ratio of the
/// top-Q action's behavior probability to each other action's, minimized.
double softmax_gap_bound(std::span<const double> q_row, std::span<const double> mu_row,
                         double alpha, double q_max);

// Inputs for a synchronous sweep. Which fields are required depends on the
// operator kind: seen_mask for icq/bcq/importance_sampled, mu for
// icq/importance_sampled, policy for standard/importance_sampled.
struct SweepStats {
    const std::vector<std::uint8_t>* seen_mask = nullptr;
    const BehaviorEstimate* mu = nullptr;
    const JointPolicy* policy = nullptr;
};

/// One synchronous (Jacobi) application of the selected operator.
QTable apply_operator(const OperatorSpec& spec, const QTable& q, const TabularMdp& mdp,
                      const SweepStats& stats);

// Optional per-sweep treatment of unseen pairs during fixed-point iteration.
// relative=false adds eps_b to each unseen pair's backup every sweep (the
// fixed-error setting; the iteration stays bounded). relative=true instead
// overwrites each unseen pair with (1+eps_b) times the best seen value at its
// state before the sweep, modeling optimistic generalization that compounds
// through bootstrapping and can genuinely diverge.
struct UnseenInjection {
    std::vector<double> eps_b;  // [state][joint_action]; entries at seen pairs ignored
    bool relative = false;
};

struct FixpointResult {
    QTable q;
    int iterations = 0;
    std::vector<double> residuals;
    bool converged = false;
    bool diverged = false;
};

/// Iterate the operator until the sup-norm residual drops below tol or
/// max_iters is hit. Divergence (residual or value norm beyond the ceiling,
/// default 1e6 * r_max/(1-gamma)) is reported, never silently truncated.
FixpointResult iterate_to_fixpoint(const OperatorSpec& spec, const QTable& q0,
                                   const TabularMdp& mdp, const SweepStats& stats, double tol,
                                   int max_iters, const UnseenInjection* injection = nullptr,
                                   double divergence_ceiling = 0.0);

struct Theorem2Result {
    double gap = 0.0;    // sup-norm distance between the k-step bcq and icq iterates
    double bound = 0.0;  // gamma (|A|-1)/(1-gamma) * softmax-gap bound with the tracked C
    double c_constant = 0.0;
    int max_seen_actions = 0;
};

/// Iterates both operators k times from Q0 = 0 and evaluates the exponential
/// closeness bound, with C tracked over the icq iterates (actions sorted by
/// current Q, descending).
Theorem2Result theorem2_gap(const TabularMdp& mdp, const SweepStats& stats, double alpha, int k);

/// Per-step lambda-return targets with the implicit-constraint ratio
/// rho = exp(Q/alpha)/Z; the terminal step bootstraps 0.
std::vector<double> lambda_icq_targets(const Trajectory& traj, const QTable& q,
                                       const BehaviorEstimate& mu, double alpha, double lambda,
                                       double gamma);

/// Trace-weighted returns with corrections weighted by pi(a_t|s_t) and
/// expected-SARSA TD errors.
std::vector<double> tree_backup_targets(const Trajectory& traj, const QTable& q,
                                        const JointPolicy& policy, double lambda, double gamma);

/// Trace-weighted returns with plain lambda corrections and max TD errors.
std::vector<double> q_lambda_targets(const Trajectory& traj, const QTable& q, double lambda,
                                     double gamma);

}  // namespace icq
