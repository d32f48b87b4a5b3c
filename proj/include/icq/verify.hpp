#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icq {

// One theorem-level property suite run: per-instance report lines plus an
// optional tabular export for plotting.
struct SuiteResult {
    std::string name;
    int total = 0;
    int passed = 0;
    std::vector<std::string> lines;
    std::vector<std::string> csv_header;
    std::vector<std::vector<double>> csv_rows;

    bool ok() const { return total > 0 && passed == total; }
};

/// Random deterministic MDP instances; checks the solved seen-pair error
/// against the propagation bound.
SuiteResult run_theorem1_suite(int instances, std::uint64_t seed);

/// Fixed full-coverage MDP, alpha grid {0.1, 0.5, 1, 5, 20}, k = 200: gap
/// against bound, monotonicity in alpha, and domination by the batch optimum.
SuiteResult run_theorem2_suite(std::uint64_t seed);

/// Random (Q, mu, alpha) draws; softmax gap against the closed-form bound.
SuiteResult run_lemma1_suite(int instances, std::uint64_t seed);

/// Random decompositions; joint policy loss by joint-action enumeration
/// against the per-agent decomposed sum, 1e-10 tolerance.
SuiteResult run_theorem3_suite(int instances, std::uint64_t seed);

/// Fixed seen-pair budget across agent counts 1..4; the concentrability
/// coefficient must strictly increase with the number of agents.
SuiteResult run_remark1_suite(std::uint64_t seed);

/// Dispatch by suite name: theorem1, theorem2, lemma1, theorem3, remark1.
SuiteResult run_suite(const std::string& name, int instances, std::uint64_t seed);

}  // namespace icq
