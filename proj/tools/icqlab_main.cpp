#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icq/config.hpp"
#include "icq/csv.hpp"
#include "icq/dataset.hpp"
#include "icq/svg_plot.hpp"
#include "icq/verify.hpp"

namespace {

int cmd_collect(const std::string& env_name, int agents, int trajectories, int expert,
                std::uint64_t seed, const std::string& out) {
    if (env_name != "mmdp") {
        std::cerr << "collect: unknown environment '" << env_name << "' (expected: mmdp)\n";
        return 2;
    }
    icq::MmdpSpec spec{agents, 100, 0.99};
    icq::OfflineDataset ds = icq::collect_mmdp_dataset(spec, trajectories, expert, seed);
    icq::save_dataset(ds, out);
    int joint_actions = ds.num_joint_actions();
    int total_pairs = ds.num_states * joint_actions;
    std::cout << "wrote " << ds.trajectories.size() << " trajectories ("
              << ds.total_transitions << " transitions) to " << out << "\n";
    std::cout << "seen pairs: " << ds.seen_pair_total() << "/" << total_pairs;
    for (int s = 0; s < ds.num_states; ++s) {
        int seen = 0;
        for (int a = 0; a < joint_actions; ++a) seen += ds.seen(s, a) ? 1 : 0;
        std::cout << "  state " << s << ": " << seen << "/" << joint_actions;
    }
    std::cout << "\n";
    return 0;
}

int cmd_train(const std::string& config_path) {
    icq::ExperimentConfig cfg = icq::ExperimentConfig::from_json_file(config_path);
    icq::ExperimentResult res = icq::run_experiment(cfg, std::cout);
    std::cout << res.cells.size() << " runs, " << res.aggregate_paths.size()
              << " aggregate files\n";
    return 0;
}

int cmd_verify(const std::string& suite, int instances, std::uint64_t seed,
               const std::string& out_csv) {
    icq::SuiteResult res = icq::run_suite(suite, instances, seed);
    for (const auto& line : res.lines) std::cout << line << "\n";
    std::cout << res.name << ": " << res.passed << "/" << res.total << " checks passed\n";
    if (!out_csv.empty() && !res.csv_rows.empty()) {
        icq::CsvWriter w(out_csv, res.csv_header);
        for (const auto& row : res.csv_rows) w.row(row);
        std::cout << "wrote " << out_csv << "\n";
    }
    return res.ok() ? 0 : 1;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out,
             const std::string& kind, double ref_value, const std::string& ref_label) {
    std::vector<icq::Series> series;
    std::string x_col = "step", y_col;
    if (kind == "qcurve") y_col = "q_init";
    else if (kind == "return") y_col = "eval_return";
    else if (kind == "alpha-sweep") { x_col = "alpha"; y_col = "gap"; }
    else if (kind == "error-bound") { x_col = "instance"; y_col = "eps_s_norm"; }
    else {
        std::cerr << "plot: unknown kind '" << kind << "'\n";
        return 2;
    }

    for (const auto& path : inputs) {
        icq::CsvTable table = icq::read_csv(path);
        if (table.rows.empty()) throw std::runtime_error("plot: empty input series in " + path);
        int xc = table.column(x_col);
        if (xc < 0) xc = 0;
        // plot the named column plus, for suite exports, the companion bound
        std::vector<std::string> wanted{y_col};
        if (kind == "alpha-sweep" || kind == "error-bound") wanted.push_back("bound");
        std::string base = path;
        if (auto pos = base.find_last_of('/'); pos != std::string::npos) base = base.substr(pos + 1);
        if (auto pos = base.rfind(".csv"); pos != std::string::npos) base = base.substr(0, pos);
        for (const auto& col : wanted) {
            int yc = table.column(col);
            if (yc < 0) continue;
            icq::Series s;
            s.label = inputs.size() > 1 ? base + ":" + col : col;
            for (std::size_t r = 0; r < table.rows.size(); ++r) {
                s.x.push_back(table.number(r, xc));
                s.y.push_back(table.number(r, yc));
            }
            series.push_back(std::move(s));
        }
    }
    if (series.empty()) throw std::runtime_error("plot: no plottable columns found");

    icq::PlotOptions opts;
    opts.title = kind;
    opts.x_label = x_col;
    opts.y_label = y_col;
    if (ref_value != 0.0)
        opts.ref_lines.emplace_back(ref_label.empty() ? "reference" : ref_label, ref_value);

    std::string svg = icq::render_line_chart(series, opts);
    std::ofstream svg_out(out);
    if (!svg_out) throw std::runtime_error("plot: cannot write " + out);
    svg_out << svg;

    // the plotted values also go out as CSV next to the figure
    std::string csv_path = out;
    if (auto pos = csv_path.rfind(".svg"); pos != std::string::npos) csv_path.resize(pos);
    csv_path += ".csv";
    for (const auto& in_path : inputs)
        if (csv_path == in_path) csv_path = out + ".series.csv";
    std::vector<std::string> header{"x"};
    for (const auto& s : series) header.push_back(s.label);
    icq::CsvWriter w(csv_path, header);
    std::size_t longest = 0;
    for (const auto& s : series) longest = std::max(longest, s.x.size());
    for (std::size_t r = 0; r < longest; ++r) {
        std::vector<std::string> row;
        row.push_back(r < series[0].x.size() ? icq::csv_number(series[0].x[r]) : "");
        for (const auto& s : series) row.push_back(r < s.y.size() ? icq::csv_number(s.y[r]) : "");
        w.row(row);
    }
    std::cout << "wrote " << out << " and " << csv_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Offline multi-agent Q-learning laboratory"};
    app.require_subcommand(1);

    // collect
    auto* collect = app.add_subcommand("collect", "generate an offline dataset");
    std::string env_name = "mmdp", collect_out = "dataset.jsonl";
    int agents = 2, trajectories = 32, expert = 4;
    std::uint64_t seed = 1;
    collect->add_option("--env", env_name, "environment name (mmdp)");
    collect->add_option("--agents", agents, "number of agents")->check(CLI::PositiveNumber);
    collect->add_option("--trajectories", trajectories, "trajectory count")
        ->check(CLI::PositiveNumber);
    collect->add_option("--expert", expert, "expert trajectory count")
        ->check(CLI::NonNegativeNumber);
    collect->add_option("--seed", seed, "generator seed");
    collect->add_option("--out", collect_out, "output JSONL path");

    // train
    auto* train = app.add_subcommand("train", "run an experiment config");
    std::string config_path;
    train->add_option("--config", config_path, "experiment JSON")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "run a theorem property suite");
    std::string suite;
    int instances = 100;
    std::uint64_t verify_seed = 7;
    std::string verify_csv;
    verify->add_option("--suite", suite, "theorem1|theorem2|lemma1|theorem3|remark1")
        ->required()
        ->check(CLI::IsMember({"theorem1", "theorem2", "lemma1", "theorem3", "remark1"}));
    verify->add_option("--instances", instances, "instance count")->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_seed, "generator seed");
    verify->add_option("--out", verify_csv, "optional CSV export");

    // plot
    auto* plot = app.add_subcommand("plot", "render metrics as SVG");
    std::vector<std::string> plot_inputs;
    std::string plot_out = "figure.svg", plot_kind = "qcurve", ref_label;
    double ref_value = 0.0;
    plot->add_option("--in", plot_inputs, "input CSV files")->required()->expected(-1);
    plot->add_option("--out", plot_out, "output SVG path");
    plot->add_option("--kind", plot_kind, "qcurve|return|alpha-sweep|error-bound")
        ->check(CLI::IsMember({"qcurve", "return", "alpha-sweep", "error-bound"}));
    plot->add_option("--ref", ref_value, "horizontal reference line value");
    plot->add_option("--ref-label", ref_label, "reference line label");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (collect->parsed())
            return cmd_collect(env_name, agents, trajectories, expert, seed, collect_out);
        if (train->parsed()) return cmd_train(config_path);
        if (verify->parsed()) return cmd_verify(suite, instances, verify_seed, verify_csv);
        if (plot->parsed()) return cmd_plot(plot_inputs, plot_out, plot_kind, ref_value, ref_label);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
