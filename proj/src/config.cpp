#include "icq/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "icq/csv.hpp"
#include "icq/dataset.hpp"

namespace icq {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// accept either a scalar or an array for sweep-style fields
template <typename T>
std::vector<T> scalar_or_list(const json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
    throw std::runtime_error("config field '" + field + "': " + what);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.name = doc.value("name", cfg.name);
        if (doc.contains("env")) {
            const json& env = doc["env"];
            if (env.contains("agents")) cfg.agent_counts = scalar_or_list<int>(env["agents"]);
            cfg.horizon = env.value("horizon", cfg.horizon);
            cfg.gamma = env.value("gamma", cfg.gamma);
            cfg.mdp_path = env.value("mdp_path", cfg.mdp_path);
        }
        if (doc.contains("dataset")) {
            const json& ds = doc["dataset"];
            cfg.num_trajectories = ds.value("trajectories", cfg.num_trajectories);
            cfg.expert_count = ds.value("expert", cfg.expert_count);
            cfg.dataset_seed = ds.value("seed", cfg.dataset_seed);
            cfg.dataset_path = ds.value("path", cfg.dataset_path);
        }
        if (doc.contains("learner")) {
            const json& ln = doc["learner"];
            if (ln.contains("algorithm")) {
                cfg.algorithms.clear();
                for (const auto& name : scalar_or_list<std::string>(ln["algorithm"]))
                    cfg.algorithms.push_back(algorithm_from_name(name));
            }
            LearnerConfig& lc = cfg.learner;
            lc.alpha = ln.value("alpha", lc.alpha);
            lc.lambda = ln.value("lambda", lc.lambda);
            lc.zeta = ln.value("zeta", lc.zeta);
            lc.alpha_cql = ln.value("alpha_cql", lc.alpha_cql);
            lc.batch_size = ln.value("batch_size", lc.batch_size);
            lc.target_update = ln.value("target_update", lc.target_update);
            lc.total_steps = ln.value("total_steps", lc.total_steps);
            lc.policy_lr = ln.value("policy_lr", lc.policy_lr);
            lc.value_lr = ln.value("value_lr", lc.value_lr);
            lc.grad_clip = ln.value("grad_clip", lc.grad_clip);
            lc.eval_every = ln.value("eval_every", lc.eval_every);
            lc.eval_episodes = ln.value("eval_episodes", lc.eval_episodes);
            lc.hidden = ln.value("hidden", lc.hidden);
            lc.divergence_factor = ln.value("divergence_factor", lc.divergence_factor);
            lc.true_value = ln.value("true_value", lc.true_value);
            if (ln.contains("z_mode")) {
                lc.z_mode = z_mode_from_name(ln["z_mode"].get<std::string>());
                cfg.z_mode_set = true;
            }
        }
        if (doc.contains("seeds")) cfg.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
        cfg.out_dir = doc.value("out_dir", cfg.out_dir);
    } catch (const json::exception& e) {
        throw std::runtime_error("config error in " + path + ": " + e.what());
    }
    cfg.validate();
    return cfg;
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) config_error("seeds", "must be nonempty");
    std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
    if (uniq.size() != seeds.size()) config_error("seeds", "must be distinct");
    if (algorithms.empty()) config_error("learner.algorithm", "must name at least one algorithm");
    if (mdp_path.empty()) {
        for (int n : agent_counts)
            if (n < 1) config_error("env.agents", "agent counts must be positive");
        if (agent_counts.empty()) config_error("env.agents", "must be nonempty");
    } else if (!fs::exists(mdp_path)) {
        config_error("env.mdp_path", "file does not exist: " + mdp_path);
    }
    if (!dataset_path.empty() && !fs::exists(dataset_path))
        config_error("dataset.path", "file does not exist: " + dataset_path);
    if (dataset_path.empty()) {
        if (num_trajectories < 1) config_error("dataset.trajectories", "must be >= 1");
        if (expert_count < 0 || expert_count > num_trajectories)
            config_error("dataset.expert", "must be between 0 and dataset.trajectories");
    }
    learner.validate();
}

TabularMdp mdp_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file " + path);
    json doc = json::parse(in);
    TabularMdp mdp;
    mdp.num_states = doc.at("num_states").get<int>();
    mdp.num_joint_actions = doc.at("num_joint_actions").get<int>();
    mdp.transition = doc.at("transition").get<std::vector<double>>();
    mdp.reward = doc.at("reward").get<std::vector<double>>();
    mdp.gamma = doc.at("gamma").get<double>();
    mdp.initial_state = doc.at("initial_state").get<int>();
    mdp.horizon = doc.at("horizon").get<int>();
    mdp.validate();
    return mdp;
}

void mdp_to_json_file(const TabularMdp& mdp, const std::string& path) {
    json doc = {{"num_states", mdp.num_states},
                {"num_joint_actions", mdp.num_joint_actions},
                {"transition", mdp.transition},
                {"reward", mdp.reward},
                {"gamma", mdp.gamma},
                {"initial_state", mdp.initial_state},
                {"horizon", mdp.horizon}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file " + path);
    out << doc.dump(2) << "\n";
}

const std::vector<std::string>& metrics_csv_header() {
    static const std::vector<std::string> header{"step",        "q_init",      "critic_loss",
                                                 "policy_loss", "eval_return", "diverged"};
    return header;
}

void write_metrics_csv(const TrainMetrics& metrics, const std::string& path) {
    CsvWriter w(path, metrics_csv_header());
    for (const auto& r : metrics.records) {
        w.row(std::vector<std::string>{std::to_string(r.step), csv_number(r.q_init),
                                       csv_number(r.critic_loss), csv_number(r.policy_loss),
                                       csv_number(r.eval_return), r.diverged ? "1" : "0"});
    }
}

namespace {

std::string cell_file(const std::string& dir, const std::string& name, const std::string& algo,
                      int agents, std::uint64_t seed) {
    return dir + "/" + name + "__" + algo + "__n" + std::to_string(agents) + "__seed" +
           std::to_string(seed) + ".csv";
}

void write_aggregate(const std::string& dir, const std::string& name, const std::string& algo,
                     int agents, const std::vector<std::string>& run_files,
                     std::vector<std::string>& out_paths) {
    // collect metric values per step across seeds
    std::map<long, std::vector<std::vector<double>>> by_step;  // step -> per metric -> values
    const int metric_cols = 4;                                 // q_init..eval_return
    for (const auto& file : run_files) {
        CsvTable t = read_csv(file);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            long step = static_cast<long>(t.number(r, 0));
            auto& slot = by_step[step];
            if (slot.empty()) slot.resize(metric_cols);
            for (int c = 0; c < metric_cols; ++c) slot[c].push_back(t.number(r, c + 1));
        }
    }
    std::string path = dir + "/" + name + "__" + algo + "__n" + std::to_string(agents) +
                       "__aggregate.csv";
    CsvWriter w(path, {"step", "runs", "q_init_mean", "q_init_std", "critic_loss_mean",
                       "critic_loss_std", "policy_loss_mean", "policy_loss_std",
                       "eval_return_mean", "eval_return_std"});
    for (const auto& [step, metrics] : by_step) {
        std::vector<std::string> cells{std::to_string(step),
                                       std::to_string(metrics[0].size())};
        for (int c = 0; c < metric_cols; ++c) {
            const auto& vals = metrics[c];
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= static_cast<double>(vals.size());
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            double std_dev = vals.size() > 1 ? std::sqrt(var / (vals.size() - 1)) : 0.0;
            cells.push_back(csv_number(mean));
            cells.push_back(csv_number(std_dev));
        }
        w.row(cells);
    }
    out_paths.push_back(path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::string out_dir = cfg.out_dir;
    if (const char* env_root = std::getenv("ICQ_LAB_OUT"); env_root != nullptr && *env_root)
        out_dir = env_root;
    fs::create_directories(out_dir);

    ExperimentResult result;
    for (int agents : (cfg.mdp_path.empty() ? cfg.agent_counts : std::vector<int>{0})) {
        // environment + dataset for this cell column
        TabularMdp env;
        OfflineDataset ds;
        if (!cfg.mdp_path.empty()) {
            env = mdp_from_json_file(cfg.mdp_path);
            if (cfg.dataset_path.empty())
                throw std::runtime_error("custom MDP runs need dataset.path");
            ds = load_dataset(cfg.dataset_path);
        } else if (!cfg.dataset_path.empty()) {
            ds = load_dataset(cfg.dataset_path);
            env = build_mmdp({ds.num_agents, ds.horizon, ds.gamma});
            agents = ds.num_agents;
        } else {
            MmdpSpec spec{agents, cfg.horizon, cfg.gamma};
            env = build_mmdp(spec);
            ds = collect_mmdp_dataset(spec, cfg.num_trajectories, cfg.expert_count,
                                      cfg.dataset_seed);
        }

        for (Algorithm algo : cfg.algorithms) {
            std::vector<std::string> run_files;
            for (std::uint64_t seed : cfg.seeds) {
                LearnerConfig lc = cfg.learner;
                lc.algorithm = algo;
                lc.seed = seed;
                if (!cfg.z_mode_set) lc.z_mode = default_learner_config(algo).z_mode;
                TrainResult tr = train(ds, lc, &env);

                CellResult cell;
                cell.algorithm = algorithm_name(algo);
                cell.agents = agents;
                cell.seed = seed;
                cell.metrics_path = cell_file(out_dir, cfg.name, cell.algorithm, agents, seed);
                cell.diverged = tr.metrics.diverged;
                cell.final_return =
                    tr.metrics.records.empty() ? 0.0 : tr.metrics.records.back().eval_return;
                write_metrics_csv(tr.metrics, cell.metrics_path);
                {
                    std::ofstream ck(cell.metrics_path.substr(0, cell.metrics_path.size() - 4) +
                                     ".ckpt.json");
                    ck << checkpoint_to_json(tr) << "\n";
                }
                run_files.push_back(cell.metrics_path);
                log << cell.algorithm << " n=" << agents << " seed=" << seed
                    << ": final return = " << cell.final_return
                    << (cell.diverged ? "  [diverged]" : "") << "\n";
                result.cells.push_back(std::move(cell));
            }
            write_aggregate(out_dir, cfg.name, algorithm_name(algo), agents, run_files,
                            result.aggregate_paths);
        }
        if (!cfg.mdp_path.empty() || !cfg.dataset_path.empty()) break;
    }
    return result;
}

}  // namespace icq
