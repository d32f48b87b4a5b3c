#include "icq/error_analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace icq {

ErrorSystem build_error_system(const TabularMdp& mdp, const JointPolicy& policy,
                               const std::vector<std::uint8_t>& seen_mask,
                               const std::vector<double>& eps_b_full) {
    mdp.validate();
    policy.validate();
    const int ns = mdp.num_states;
    const int na = mdp.num_joint_actions;
    if (policy.num_states != ns || policy.num_joint_actions() != na)
        throw std::invalid_argument("build_error_system: policy does not match the MDP");
    if (static_cast<int>(seen_mask.size()) != ns * na || static_cast<int>(eps_b_full.size()) != ns * na)
        throw std::invalid_argument("build_error_system: mask or eps_b size mismatch");

    ErrorSystem sys;
    sys.gamma = mdp.gamma;
    sys.num_actions = na;
    sys.deterministic_mdp = mdp.deterministic();
    for (int s = 0; s < ns; ++s)
        for (int a = 0; a < na; ++a)
            (seen_mask[static_cast<std::size_t>(s) * na + a] ? sys.seen_pairs : sys.unseen_pairs)
                .push_back(s * na + a);
    for (int u : sys.unseen_pairs) sys.eps_b.push_back(eps_b_full[u]);

    // policy rows cached per state
    std::vector<std::vector<double>> pi_rows(ns);
    for (int s = 0; s < ns; ++s) pi_rows[s] = policy.joint_row(s);

    auto fill = [&](Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
        m = Matrix(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
        for (int r = 0; r < m.rows; ++r) {
            int s = rows[r] / na, a = rows[r] % na;
            for (int c = 0; c < m.cols; ++c) {
                int s2 = cols[c] / na, a2 = cols[c] % na;
                m.at(r, c) = mdp.p(s, a, s2) * pi_rows[s2][a2];
            }
        }
    };
    fill(sys.p_ss, sys.seen_pairs, sys.seen_pairs);
    fill(sys.p_su, sys.seen_pairs, sys.unseen_pairs);
    fill(sys.p_us, sys.unseen_pairs, sys.seen_pairs);
    fill(sys.p_uu, sys.unseen_pairs, sys.unseen_pairs);
    return sys;
}

ErrorSolution solve_error_system(const ErrorSystem& sys) {
    const int ks = static_cast<int>(sys.seen_pairs.size());
    const int ku = static_cast<int>(sys.unseen_pairs.size());
    const int n = ks + ku;
    Matrix a(n, n);
    std::vector<double> b(n, 0.0);
    auto put = [&](const Matrix& blk, int r0, int c0) {
        for (int r = 0; r < blk.rows; ++r)
            for (int c = 0; c < blk.cols; ++c) a.at(r0 + r, c0 + c) = -sys.gamma * blk.at(r, c);
    };
    put(sys.p_ss, 0, 0);
    put(sys.p_su, 0, ks);
    put(sys.p_us, ks, 0);
    put(sys.p_uu, ks, ks);
    for (int i = 0; i < n; ++i) a.at(i, i) += 1.0;
    for (int i = 0; i < ku; ++i) b[ks + i] = sys.eps_b[i];

    std::vector<double> x = n > 0 ? solve_dense(a, b) : std::vector<double>{};
    ErrorSolution sol;
    sol.eps_s.assign(x.begin(), x.begin() + ks);
    sol.eps_u.assign(x.begin() + ks, x.end());
    return sol;
}

double theorem1_bound(const ErrorSystem& sys) {
    if (!sys.deterministic_mdp)
        throw std::invalid_argument("theorem1_bound: system built from a stochastic MDP");
    double g = sys.gamma;
    double pss = inf_norm(sys.p_ss);
    double psu = inf_norm(sys.p_su);
    double eb = sup_norm(sys.eps_b);
    if (g * pss >= 1.0) return std::numeric_limits<double>::infinity();
    return g * psu / ((1.0 - g) * (1.0 - g * pss)) * eb;
}

ConcentrabilityResult concentrability(const TabularMdp& mdp, const OfflineDataset& ds,
                                      const std::vector<JointPolicy>& policies, int k_max) {
    if (policies.empty()) throw std::invalid_argument("concentrability: no policies given");
    if (k_max < 1) throw std::invalid_argument("concentrability: k_max must be >= 1");
    const int ns = mdp.num_states;
    const int na = mdp.num_joint_actions;

    // dataset state visitation as a density over the pair space
    std::vector<double> rho(ns, 0.0);
    for (int s = 0; s < ns; ++s) {
        long long c = 0;
        for (int a = 0; a < na; ++a) c += ds.pair_counts[static_cast<std::size_t>(s) * na + a];
        rho[s] = static_cast<double>(c) / static_cast<double>(ds.total_transitions) / na;
    }

    ConcentrabilityResult res;
    std::vector<double> visit(ns, 0.0);
    visit[mdp.initial_state] = 1.0;
    double c_max = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const JointPolicy& pol = policies[(k - 1) % policies.size()];
        std::vector<double> next(ns, 0.0);
        for (int s = 0; s < ns; ++s) {
            if (visit[s] == 0.0) continue;
            std::vector<double> row = pol.joint_row(s);
            for (int a = 0; a < na; ++a) {
                if (row[a] == 0.0) continue;
                for (int s2 = 0; s2 < ns; ++s2) next[s2] += visit[s] * row[a] * mdp.p(s, a, s2);
            }
        }
        visit = std::move(next);
        double ck = 0.0;
        for (int s = 0; s < ns; ++s) {
            if (visit[s] <= 0.0) continue;
            if (rho[s] <= 0.0) {
                res.infinite = true;
                ck = std::numeric_limits<double>::infinity();
                break;
            }
            ck = std::max(ck, visit[s] / rho[s]);
        }
        res.c.push_back(ck);
        if (std::isfinite(ck)) c_max = std::max(c_max, ck);
    }

    double g = mdp.gamma;
    double sum = 0.0;
    for (int k = 1; k <= k_max; ++k) sum += k * std::pow(g, k - 1) * res.c[k - 1];
    res.coefficient = (1.0 - g) * (1.0 - g) * sum;
    // sum_{k>K} k g^(k-1) = ((K+1) g^K (1-g) + g^(K+1)) / (1-g)^2
    double tail_series = ((k_max + 1) * std::pow(g, k_max) * (1.0 - g) + std::pow(g, k_max + 1)) /
                         ((1.0 - g) * (1.0 - g));
    res.tail_bound = (1.0 - g) * (1.0 - g) * tail_series * c_max;
    return res;
}

}  // namespace icq
