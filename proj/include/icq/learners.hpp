#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "icq/dataset.hpp"
#include "icq/mdp.hpp"
#include "icq/net.hpp"
#include "icq/operators.hpp"

namespace icq {

enum class Algorithm { icq, icq_ma, bcq_ma, cql_ma, bc_ma };
enum class ZMode { behavior_model, minibatch_softmax };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);
std::string z_mode_name(ZMode m);
ZMode z_mode_from_name(const std::string& name);

struct LearnerConfig {
    Algorithm algorithm = Algorithm::icq_ma;
    double alpha = 100.0;      // Lagrangian coefficient
    double lambda = 0.8;       // trace decay for trajectory losses
    double zeta = 0.3;         // familiarity threshold for count-based masking
    double alpha_cql = 2.0;    // conservative penalty weight
    int batch_size = 16;
    double gamma = 0.0;        // 0 = use the dataset's discount
    int target_update = 200;   // hard target refresh period d
    long total_steps = 2000;
    double policy_lr = 5e-4;
    double value_lr = 1e-4;
    double grad_clip = 20.0;   // global-norm clip
    int eval_every = 50;
    int eval_episodes = 10;
    int hidden = 32;
    ZMode z_mode = ZMode::minibatch_softmax;
    double divergence_factor = 10.0;
    double true_value = 0.0;   // reference for the divergence flag; 0 = derive
                               // from the optimal policy when the dataset is an
                               // MMDP one
    std::uint64_t seed = 1;

    void validate() const;
};

/// Per-algorithm defaults: behavior-model normalizers for the single-agent
/// learner, minibatch softmax for the multi-agent ones.
LearnerConfig default_learner_config(Algorithm algo);

struct MetricsRecord {
    long step = 0;
    double q_init = 0.0;       // estimated initial-state value
    double critic_loss = 0.0;
    double policy_loss = 0.0;
    double eval_return = 0.0;  // undiscounted Monte-Carlo return
    bool diverged = false;
};

struct TrainMetrics {
    std::vector<MetricsRecord> records;
    bool diverged = false;
    long diverged_step = -1;
    double true_value = 0.0;
    long mask_fallbacks = 0;  // states where every action was masked
};

// Counts every (state, joint-action) value lookup made while forming critic
// targets, and how many of those pairs have zero dataset count.
struct TargetAudit {
    long long lookups = 0;
    long long unseen = 0;
};

struct TrainResult {
    JointPolicy policy;             // executable policy (factored; joint for icq)
    std::vector<DenseNet> actors;   // empty for bcq_ma
    std::vector<DenseNet> critics;  // empty for bc_ma
    Mixer mixer;                    // populated for the mixer-based algorithms
    TrainMetrics metrics;
};

/// Trains cfg.algorithm on the dataset. eval_env may be null when the dataset
/// came from the two-state MMDP (the environment is rebuilt from the header).
TrainResult train(const OfflineDataset& ds, const LearnerConfig& cfg,
                  const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);

TrainResult train_icq(const OfflineDataset& ds, LearnerConfig cfg,
                      const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);
TrainResult train_icq_ma(const OfflineDataset& ds, LearnerConfig cfg,
                         const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);
TrainResult train_bcq_ma(const OfflineDataset& ds, LearnerConfig cfg,
                         const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);
TrainResult train_cql_ma(const OfflineDataset& ds, LearnerConfig cfg,
                         const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);
TrainResult train_bc_ma(const OfflineDataset& ds, LearnerConfig cfg,
                        const TabularMdp* eval_env = nullptr, TargetAudit* audit = nullptr);

/// Log-space partition values, one per batch sample. behavior_model sums
/// mu(a|s) exp(Q(s,a)/alpha) over the seen actions of each sample's state;
/// minibatch_softmax returns log of the mean of exp(Q/alpha) over the batch
/// pairs (so a singleton batch gives rho = exp(Q/alpha - log_z) = 1 exactly).
std::vector<double> compute_z(std::span<const std::pair<int, int>> batch, const QTable& q,
                              const BehaviorEstimate* mu, double alpha, ZMode mode);

/// Gradient of the conservative penalty for one agent at one state w.r.t.
/// that agent's Q row: w * (softmax_a(w q + b) - data_marginal). Zero when the
/// data marginal matches the induced softmax, e.g. constant q with uniform
/// data.
std::vector<double> cql_penalty_q_gradient(std::span<const double> q_row, double w, double b,
                                           std::span<const double> data_marginal);

/// Serialize actors, critics and mixer as one JSON document.
std::string checkpoint_to_json(const TrainResult& result);

}  // namespace icq
