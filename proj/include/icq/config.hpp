#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "icq/learners.hpp"
#include "icq/mdp.hpp"

namespace icq {

// Full description of one experiment: environment grid, dataset source,
// learner settings, seeds, and where results go. One JSON document per
// experiment.
struct ExperimentConfig {
    std::string name = "experiment";

    // environment: either an MMDP agent-count sweep or a custom MDP file
    std::vector<int> agent_counts{2};
    int horizon = 100;
    double gamma = 0.99;
    std::string mdp_path;  // when set, overrides the MMDP sweep

    // dataset: generated per environment cell unless a path is given
    int num_trajectories = 32;
    int expert_count = 4;
    std::uint64_t dataset_seed = 7;
    std::string dataset_path;

    std::vector<Algorithm> algorithms{Algorithm::icq_ma};
    LearnerConfig learner;      // shared knobs; algorithm and seed filled per cell
    bool z_mode_set = false;    // explicit z_mode overrides the per-algorithm default
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string out_dir = "results";

    static ExperimentConfig from_json_file(const std::string& path);
    /// Structural checks plus existence of referenced paths.
    void validate() const;
};

struct CellResult {
    std::string algorithm;
    int agents = 0;
    std::uint64_t seed = 0;
    std::string metrics_path;
    bool diverged = false;
    double final_return = 0.0;
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<std::string> aggregate_paths;
};

/// Runs every (algorithm x environment x seed) cell, writes one metrics CSV
/// per cell plus a per-(algorithm, environment) aggregate with mean and std
/// across seeds. The ICQ_LAB_OUT environment variable overrides out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

TabularMdp mdp_from_json_file(const std::string& path);
void mdp_to_json_file(const TabularMdp& mdp, const std::string& path);

/// Metric CSV column names shared by the runner and the plotting tool.
const std::vector<std::string>& metrics_csv_header();

void write_metrics_csv(const TrainMetrics& metrics, const std::string& path);

}  // namespace icq
