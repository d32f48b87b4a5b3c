#include "icq/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "icq/linalg.hpp"

namespace icq {

bool QTable::finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void OperatorSpec::validate() const {
    bool needs_alpha = kind == OperatorKind::icq || kind == OperatorKind::icq_lambda;
    if (needs_alpha && !(alpha > 0.0))
        throw std::invalid_argument("OperatorSpec: alpha must be positive");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("OperatorSpec: lambda must be in [0,1]");
}

SoftmaxTarget icq_weights(std::span<const double> q_row, std::span<const double> mu_row,
                          double alpha) {
    if (q_row.size() != mu_row.size()) throw std::invalid_argument("icq_weights: size mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("icq_weights: alpha must be positive");
    SoftmaxTarget out;
    double qmax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q_row.size(); ++a)
        if (mu_row[a] > 0.0) qmax = std::max(qmax, q_row[a]);
    if (qmax == -std::numeric_limits<double>::infinity())
        throw std::invalid_argument("icq_weights: no seen actions");
    double z = 0.0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (mu_row[a] <= 0.0) continue;
        double w = mu_row[a] * std::exp((q_row[a] - qmax) / alpha);
        out.actions.push_back(static_cast<int>(a));
        out.weights.push_back(w);
        z += w;
    }
    for (double& w : out.weights) w /= z;
    return out;
}

double icq_target(const QTable& q, const BehaviorEstimate& mu, int state, double alpha) {
    const int na = q.num_actions;
    std::span<const double> q_row(&q.values[static_cast<std::size_t>(state) * na],
                                  static_cast<std::size_t>(na));
    std::span<const double> mu_row(&mu.joint[static_cast<std::size_t>(state) * na],
                                   static_cast<std::size_t>(na));
    if (!mu.state_defined(state))
        throw std::runtime_error("icq_target: no seen actions at state " + std::to_string(state));
    SoftmaxTarget w = icq_weights(q_row, mu_row, alpha);
    double v = 0.0;
    for (std::size_t i = 0; i < w.actions.size(); ++i) v += w.weights[i] * q_row[w.actions[i]];
    return v;
}

double bcq_target(const QTable& q, const std::vector<std::uint8_t>& seen_mask, int state) {
    const int na = q.num_actions;
    double best = 0.0;
    bool any = false;
    for (int a = 0; a < na; ++a) {
        if (!seen_mask[static_cast<std::size_t>(state) * na + a]) continue;
        double v = q.at(state, a);
        if (!any || v > best) {
            best = v;
            any = true;
        }
    }
    if (!any) throw std::runtime_error("bcq_target: no seen actions at state " + std::to_string(state));
    return best;
}

double softmax_gap_bound(std::span<const double> q_row, std::span<const double> mu_row,
                         double alpha, double q_max) {
    if (q_row.size() != mu_row.size()) throw std::invalid_argument("softmax_gap_bound: size mismatch");
    std::vector<int> seen;
    for (std::size_t a = 0; a < q_row.size(); ++a)
        if (mu_row[a] > 0.0) seen.push_back(static_cast<int>(a));
    if (seen.size() <= 1) return 0.0;
    std::sort(seen.begin(), seen.end(), [&](int a, int b) {
        if (q_row[a] != q_row[b]) return q_row[a] > q_row[b];
        return a < b;
    });
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < seen.size(); ++i)
        c = std::min(c, mu_row[seen[0]] / mu_row[seen[i]]);
    double inv_alpha = 1.0 / alpha;
    double term1 = 1.0 / ((inv_alpha + 1.0) * c + 1.0);
    double term2 = 2.0 * q_max / (1.0 + c * std::exp(std::min(inv_alpha, 700.0)));
    return (static_cast<double>(seen.size()) - 1.0) * std::max(term1, term2);
}

namespace {

double next_state_value(const OperatorSpec& spec, const QTable& q, const SweepStats& stats,
                        int s2) {
    switch (spec.kind) {
        case OperatorKind::standard: {
            std::vector<double> row = stats.policy->joint_row(s2);
            double v = 0.0;
            for (int a = 0; a < q.num_actions; ++a) v += row[a] * q.at(s2, a);
            return v;
        }
        case OperatorKind::importance_sampled: {
            // mu * (pi/mu) over seen actions: policy mass on unseen actions is dropped
            std::vector<double> row = stats.policy->joint_row(s2);
            double v = 0.0;
            for (int a = 0; a < q.num_actions; ++a) {
                if (!(*stats.seen_mask)[static_cast<std::size_t>(s2) * q.num_actions + a]) continue;
                v += row[a] * q.at(s2, a);
            }
            return v;
        }
        case OperatorKind::icq:
            return icq_target(q, *stats.mu, s2, spec.alpha);
        case OperatorKind::bcq:
            return bcq_target(q, *stats.seen_mask, s2);
        default:
            throw std::invalid_argument("apply_operator: trajectory operators need a trajectory");
    }
}

void check_sweep_inputs(const OperatorSpec& spec, const QTable& q, const TabularMdp& mdp,
                        const SweepStats& stats) {
    spec.validate();
    if (q.num_states != mdp.num_states || q.num_actions != mdp.num_joint_actions)
        throw std::invalid_argument("apply_operator: Q table does not match the MDP");
    bool needs_seen = spec.kind == OperatorKind::icq || spec.kind == OperatorKind::bcq ||
                      spec.kind == OperatorKind::importance_sampled;
    bool needs_mu = spec.kind == OperatorKind::icq;
    bool needs_policy =
        spec.kind == OperatorKind::standard || spec.kind == OperatorKind::importance_sampled;
    if (needs_mu && stats.mu == nullptr)
        throw std::invalid_argument("apply_operator: this kind needs a behavior estimate");
    if (needs_seen && spec.kind != OperatorKind::icq && stats.seen_mask == nullptr)
        throw std::invalid_argument("apply_operator: this kind needs a seen mask");
    if (needs_policy && stats.policy == nullptr)
        throw std::invalid_argument("apply_operator: this kind needs a policy");
    if (stats.policy != nullptr &&
        (stats.policy->num_states != mdp.num_states ||
         stats.policy->num_joint_actions() != mdp.num_joint_actions))
        throw std::invalid_argument("apply_operator: policy dimensions do not match the MDP");
}

}  // namespace

QTable apply_operator(const OperatorSpec& spec, const QTable& q, const TabularMdp& mdp,
                      const SweepStats& stats) {
    check_sweep_inputs(spec, q, mdp, stats);
    QTable out(q.num_states, q.num_actions);
    // cache the next-state value once per state
    std::vector<double> v(q.num_states);
    for (int s2 = 0; s2 < q.num_states; ++s2) v[s2] = next_state_value(spec, q, stats, s2);
    for (int s = 0; s < q.num_states; ++s) {
        for (int a = 0; a < q.num_actions; ++a) {
            double acc = mdp.r(s, a);
            for (int s2 = 0; s2 < q.num_states; ++s2) {
                double p = mdp.p(s, a, s2);
                if (p > 0.0) acc += mdp.gamma * p * v[s2];
            }
            out.at(s, a) = acc;
        }
    }
    return out;
}

FixpointResult iterate_to_fixpoint(const OperatorSpec& spec, const QTable& q0,
                                   const TabularMdp& mdp, const SweepStats& stats, double tol,
                                   int max_iters, const UnseenInjection* injection,
                                   double divergence_ceiling) {
    if (!(tol > 0.0)) throw std::invalid_argument("iterate_to_fixpoint: tol must be positive");
    if (injection != nullptr && stats.seen_mask == nullptr)
        throw std::invalid_argument("iterate_to_fixpoint: injection needs a seen mask");
    double q_max = mdp.max_abs_reward() / (1.0 - mdp.gamma);
    double ceiling = divergence_ceiling > 0.0 ? divergence_ceiling : 1e6 * std::max(q_max, 1.0);

    FixpointResult res;
    res.q = q0;
    const int na = mdp.num_joint_actions;
    for (int it = 0; it < max_iters; ++it) {
        QTable cur = res.q;
        if (injection != nullptr) {
            for (int s = 0; s < mdp.num_states; ++s) {
                double best_seen = 0.0;
                bool any = false;
                if (injection->relative) {
                    for (int a = 0; a < na; ++a) {
                        if (!(*stats.seen_mask)[static_cast<std::size_t>(s) * na + a]) continue;
                        double v = cur.at(s, a);
                        if (!any || v > best_seen) best_seen = v, any = true;
                    }
                }
                for (int a = 0; a < na; ++a) {
                    if ((*stats.seen_mask)[static_cast<std::size_t>(s) * na + a]) continue;
                    double eps = injection->eps_b[static_cast<std::size_t>(s) * na + a];
                    if (injection->relative)
                        cur.at(s, a) = any ? (1.0 + eps) * best_seen : eps;
                    else
                        cur.at(s, a) += eps;
                }
            }
        }
        QTable next = apply_operator(spec, cur, mdp, stats);
        if (injection != nullptr && !injection->relative) {
            for (int s = 0; s < mdp.num_states; ++s)
                for (int a = 0; a < na; ++a)
                    if (!(*stats.seen_mask)[static_cast<std::size_t>(s) * na + a])
                        next.at(s, a) += injection->eps_b[static_cast<std::size_t>(s) * na + a];
        }
        double resid = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i)
            resid = std::max(resid, std::abs(next.values[i] - res.q.values[i]));
        res.q = std::move(next);
        res.iterations = it + 1;
        res.residuals.push_back(resid);
        double vnorm = sup_norm(res.q.values);
        if (resid > ceiling || vnorm > ceiling || !res.q.finite()) {
            res.diverged = true;
            return res;
        }
        if (resid < tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

Theorem2Result theorem2_gap(const TabularMdp& mdp, const SweepStats& stats, double alpha, int k) {
    if (k < 1) throw std::invalid_argument("theorem2_gap: k must be >= 1");
    if (stats.mu == nullptr || stats.seen_mask == nullptr)
        throw std::invalid_argument("theorem2_gap: behavior estimate and seen mask required");
    const int ns = mdp.num_states;
    const int na = mdp.num_joint_actions;

    Theorem2Result res;
    std::vector<int> seen_count(ns, 0);
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a)
            if ((*stats.seen_mask)[static_cast<std::size_t>(s) * na + a]) ++seen_count[s];
    res.max_seen_actions = *std::max_element(seen_count.begin(), seen_count.end());
    if (res.max_seen_actions <= 1) return res;  // operators coincide, gap and bound are 0

    OperatorSpec icq_spec{OperatorKind::icq, alpha, 0.0};
    OperatorSpec bcq_spec{OperatorKind::bcq, alpha, 0.0};
    QTable q_icq(ns, na), q_bcq(ns, na);

    auto track_c = [&](const QTable& q) {
        double c = std::numeric_limits<double>::infinity();
        for (int s = 0; s < ns; ++s) {
            if (seen_count[s] <= 1) continue;
            std::vector<int> acts;
            for (int a = 0; a < na; ++a)
                if ((*stats.seen_mask)[static_cast<std::size_t>(s) * na + a]) acts.push_back(a);
            std::sort(acts.begin(), acts.end(), [&](int a, int b) {
                if (q.at(s, a) != q.at(s, b)) return q.at(s, a) > q.at(s, b);
                return a < b;
            });
            for (std::size_t i = 1; i < acts.size(); ++i)
                c = std::min(c, stats.mu->joint_prob(s, acts[0]) / stats.mu->joint_prob(s, acts[i]));
        }
        return c;
    };

    double c = track_c(q_icq);
    for (int it = 0; it < k; ++it) {
        q_icq = apply_operator(icq_spec, q_icq, mdp, stats);
        q_bcq = apply_operator(bcq_spec, q_bcq, mdp, stats);
        c = std::min(c, track_c(q_icq));
    }
    res.c_constant = c;
    double gap = 0.0;
    for (std::size_t i = 0; i < q_icq.values.size(); ++i)
        gap = std::max(gap, std::abs(q_bcq.values[i] - q_icq.values[i]));
    res.gap = gap;

    double q_max = mdp.max_abs_reward() / (1.0 - mdp.gamma);
    double inv_alpha = 1.0 / alpha;
    double term1 = 1.0 / ((inv_alpha + 1.0) * c + 1.0);
    double term2 = 2.0 * q_max / (1.0 + c * std::exp(std::min(inv_alpha, 700.0)));
    res.bound = mdp.gamma * (res.max_seen_actions - 1) / (1.0 - mdp.gamma) * std::max(term1, term2);
    return res;
}

namespace {

// rho(s,a) = exp(Q(s,a)/alpha) / Z(s) with Z summed over seen actions,
// evaluated in log space.
double icq_rho(const QTable& q, const BehaviorEstimate& mu, int s, int a, double alpha) {
    const int na = q.num_actions;
    double qmax = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < na; ++b)
        if (mu.joint[static_cast<std::size_t>(s) * na + b] > 0.0) qmax = std::max(qmax, q.at(s, b));
    double z = 0.0;
    for (int b = 0; b < na; ++b) {
        double m = mu.joint[static_cast<std::size_t>(s) * na + b];
        if (m > 0.0) z += m * std::exp((q.at(s, b) - qmax) / alpha);
    }
    return std::exp((q.at(s, a) - qmax) / alpha) / z;
}

}  // namespace

std::vector<double> lambda_icq_targets(const Trajectory& traj, const QTable& q,
                                       const BehaviorEstimate& mu, double alpha, double lambda,
                                       double gamma) {
    if (traj.steps.empty()) throw std::invalid_argument("lambda_icq_targets: empty trajectory");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("lambda_icq_targets: bad lambda");
    const int len = static_cast<int>(traj.steps.size());
    std::vector<double> targets(len);
    double correction = 0.0;  // sum_{s>=t} (gamma lambda)^{s-t} delta_s, built backward
    for (int t = len - 1; t >= 0; --t) {
        const auto& st = traj.steps[t];
        double boot = 0.0;
        if (t + 1 < len) {
            const auto& nx = traj.steps[t + 1];
            boot = icq_rho(q, mu, nx.state, nx.joint_action, alpha) * q.at(nx.state, nx.joint_action);
        }
        double delta = st.reward + gamma * boot - q.at(st.state, st.joint_action);
        correction = delta + gamma * lambda * correction;
        targets[t] = q.at(st.state, st.joint_action) + correction;
    }
    return targets;
}

std::vector<double> tree_backup_targets(const Trajectory& traj, const QTable& q,
                                        const JointPolicy& policy, double lambda, double gamma) {
    if (traj.steps.empty()) throw std::invalid_argument("tree_backup_targets: empty trajectory");
    const int len = static_cast<int>(traj.steps.size());
    std::vector<double> targets(len);
    double correction = 0.0;
    for (int t = len - 1; t >= 0; --t) {
        const auto& st = traj.steps[t];
        double boot = 0.0;
        if (t + 1 < len) {
            std::vector<double> row = policy.joint_row(traj.steps[t + 1].state);
            for (int a = 0; a < q.num_actions; ++a) boot += row[a] * q.at(traj.steps[t + 1].state, a);
        }
        double delta = st.reward + gamma * boot - q.at(st.state, st.joint_action);
        double trace = (t + 1 < len)
                           ? lambda * policy.joint_prob(traj.steps[t + 1].state,
                                                        traj.steps[t + 1].joint_action)
                           : 0.0;
        correction = delta + gamma * trace * correction;
        targets[t] = q.at(st.state, st.joint_action) + correction;
    }
    return targets;
}

std::vector<double> q_lambda_targets(const Trajectory& traj, const QTable& q, double lambda,
                                     double gamma) {
    if (traj.steps.empty()) throw std::invalid_argument("q_lambda_targets: empty trajectory");
    const int len = static_cast<int>(traj.steps.size());
    std::vector<double> targets(len);
    double correction = 0.0;
    for (int t = len - 1; t >= 0; --t) {
        const auto& st = traj.steps[t];
        double boot = 0.0;
        if (t + 1 < len) {
            int s2 = traj.steps[t + 1].state;
            boot = q.at(s2, 0);
            for (int a = 1; a < q.num_actions; ++a) boot = std::max(boot, q.at(s2, a));
        }
        double delta = st.reward + gamma * boot - q.at(st.state, st.joint_action);
        correction = delta + gamma * lambda * correction;
        targets[t] = q.at(st.state, st.joint_action) + correction;
    }
    return targets;
}

}  // namespace icq
