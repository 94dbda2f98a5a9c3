// treetangent: experiment driver around the soft-tree NTK library.
//
// Subcommands mirror the library's experiment drivers; every run is
// deterministic given (config, seed) and emits CSV tables plus standalone SVG
// line plots into --out. Exit codes: 0 success, 2 configuration error,
// 3 numeric failure, 4 resource cap exceeded.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "treetangent/dataset.hpp"
#include "treetangent/experiments.hpp"
#include "treetangent/svg.hpp"

namespace fs = std::filesystem;
using namespace treetangent;
namespace ex = treetangent::experiments;

namespace {

struct Config {
    std::string arch = "pb";
    std::vector<int> depths = {5};
    std::vector<double> alphas = {2.0};
    std::vector<long> trees = {16, 64, 256, 1024, 4096};
    std::uint64_t seed = 1;
    long steps = 100;
    double eta = 0.1;
    int grid = 64;
    int seeds = 10;
    std::string data_path;
    std::string label_column = "label";
    std::string task = "auto";
    bool add_bias = false;
    bool no_normalize = false;
    int folds = 4;
    double lambda = 1e-8;
    std::string out = "out";
    std::string topo_a, topo_b;
    long max_params = 100000000;  // refuse runs above this many scalar parameters
    int n_train = 10, n_probe = 10, features = 5;
};

template <class T>
void overlay(const nlohmann::json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

// Config file values sit between built-in defaults and CLI flags.
void apply_config_file(Config& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config '" + path + "': " + e.what());
    }
    overlay(j, "arch", c.arch);
    overlay(j, "depths", c.depths);
    overlay(j, "alphas", c.alphas);
    overlay(j, "trees", c.trees);
    overlay(j, "seed", c.seed);
    overlay(j, "steps", c.steps);
    overlay(j, "eta", c.eta);
    overlay(j, "grid", c.grid);
    overlay(j, "seeds", c.seeds);
    overlay(j, "data", c.data_path);
    overlay(j, "label", c.label_column);
    overlay(j, "task", c.task);
    overlay(j, "bias", c.add_bias);
    overlay(j, "no_normalize", c.no_normalize);
    overlay(j, "folds", c.folds);
    overlay(j, "lambda", c.lambda);
    overlay(j, "out", c.out);
    overlay(j, "topo_a", c.topo_a);
    overlay(j, "topo_b", c.topo_b);
    overlay(j, "max_params", c.max_params);
    overlay(j, "n_train", c.n_train);
    overlay(j, "n_probe", c.n_probe);
    overlay(j, "features", c.features);
}

void ensure_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw config_error("output directory '" + dir + "' is not writable");
}

std::string out_path(const Config& c, const std::string& file) {
    return (fs::path(c.out) / file).string();
}

void run_kernel_curve(const Config& c) {
    ensure_out(c.out);
    const ScaledErf f(c.alphas.at(0));
    const auto arch = ex::resolve_analytic_arch(c.arch, c.depths.at(0));
    const auto r = ex::kernel_curve(f, arch, c.grid);
    ex::write_table(ex::kernel_curve_table(r), c.out);
    write_line_plot(out_path(c, "kernel_curve.svg"),
                    {"limiting NTK, " + r.label, "beta", "kernel value", false, false},
                    {{r.label, r.beta, r.value}});
    std::cout << "kernel-curve: wrote " << out_path(c, "kernel_curve.csv") << "\n";
}

void run_convergence(const Config& c) {
    ensure_out(c.out);
    const ScaledErf f(c.alphas.at(0));
    const auto sa = ex::resolve_arch(c.arch, c.depths.at(0));
    if (!std::is_sorted(c.trees.begin(), c.trees.end()))
        throw config_error("--trees must be ascending");
    ex::enforce_parameter_cap(sa.topology(), c.trees.back(), 2, c.max_params);
    const auto r = ex::convergence(f, sa, c.trees, c.seeds, c.grid, c.seed);
    ex::write_table(ex::convergence_table(r), c.out);
    ex::write_table(ex::convergence_summary_table(r), c.out);
    std::vector<double> m(r.trees.begin(), r.trees.end());
    write_line_plot(out_path(c, "convergence.svg"),
                    {"empirical NTK deviation, " + r.label, "trees", "median RMS deviation", true, true},
                    {{"rms", m, r.median_rms}, {"sup", m, r.median_sup}});
    std::cout << "convergence: slope " << r.slope << ", wrote "
              << out_path(c, "convergence_summary.csv") << "\n";
}

void run_depth_sweep(const Config& c) {
    ensure_out(c.out);
    const ScaledErf f(c.alphas.at(0));
    std::vector<int> depths = c.depths;
    if (depths.size() == 1 && depths[0] == 5) depths = {2, 4, 8, 16, 32, 64, 128};
    const auto r = ex::depth_sweep(f, depths, c.grid);
    ex::write_table(ex::depth_sweep_table(r), c.out);
    auto plot = [&](const char* file, const char* title,
                    const std::vector<std::vector<double>>& curves, bool with_inf) {
        std::vector<PlotSeries> series;
        for (std::size_t d = 0; d < r.depths.size(); ++d)
            series.push_back({"D=" + std::to_string(r.depths[d]), r.beta, curves[d]});
        if (with_inf) series.push_back({"D=inf", r.beta, r.dl_inf_norm});
        write_line_plot(out_path(c, file), {title, "beta", "normalized kernel", false, false},
                        series);
    };
    plot("depth_sweep_pb.svg", "perfect binary tree", r.pb_norm, false);
    plot("depth_sweep_dl.svg", "decision list", r.dl_norm, true);
    std::cout << "depth-sweep: wrote " << out_path(c, "depth_sweep.csv") << "\n";
}

void run_train_compare(const Config& c) {
    ensure_out(c.out);
    const ScaledErf f(c.alphas.at(0));
    auto pair = TreeTopology::equal_profile_pair();
    TreeTopology topo_a = c.topo_a.empty() ? pair.first : TreeTopology::from_file(c.topo_a);
    TreeTopology topo_b = c.topo_b.empty() ? pair.second : TreeTopology::from_file(c.topo_b);
    if (!(profile_of(topo_a) == profile_of(topo_b)))
        std::cout << "note: topologies have different leaf profiles; analytic trajectories will differ\n";
    const long max_m = *std::max_element(c.trees.begin(), c.trees.end());
    ex::enforce_parameter_cap(topo_a, max_m, c.features, c.max_params);
    ex::enforce_parameter_cap(topo_b, max_m, c.features, c.max_params);
    const auto r = ex::train_compare(f, topo_a, topo_b, c.trees, c.eta, c.steps, c.seeds, c.seed,
                                     c.n_train, c.n_probe, c.features);
    ex::write_table(ex::train_compare_table(r), c.out);
    ex::write_table(ex::train_compare_summary_table(r), c.out);
    // Trajectories at the largest ensemble, first seed: simulator A vs analytic.
    std::vector<double> steps_axis(r.steps.begin(), r.steps.end());
    std::vector<PlotSeries> series;
    const auto& sim = r.out_a.back().front();
    for (Eigen::Index q = 0; q < r.analytic.cols(); ++q) {
        std::vector<double> sim_y(sim.rows()), ana_y(sim.rows());
        for (Eigen::Index s = 0; s < sim.rows(); ++s) {
            sim_y[s] = sim(s, q);
            ana_y[s] = r.analytic(s, q);
        }
        series.push_back({"probe" + std::to_string(q), steps_axis, sim_y});
        series.push_back({"probe" + std::to_string(q) + "-analytic", steps_axis, ana_y});
    }
    write_line_plot(out_path(c, "train_compare.svg"),
                    {"probe trajectories, M=" + std::to_string(r.trees.back()), "step",
                     "shifted output", false, false},
                    series);
    std::cout << "train-compare: median A/B gap";
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        std::cout << " M=" << r.trees[mi] << ":" << r.median_ab_gap[mi];
    std::cout << "\n";
}

void run_regress(const Config& c) {
    ensure_out(c.out);
    if (c.data_path.empty()) throw config_error("regress needs --data <csv>");
    LabelKind kind = LabelKind::auto_detect;
    if (c.task == "class")
        kind = LabelKind::categorical;
    else if (c.task == "reg")
        kind = LabelKind::numeric;
    else if (c.task != "auto")
        throw config_error("--task must be auto, class or reg");
    Dataset d = load_csv(c.data_path, c.label_column, true, kind);
    if (d.dropped_rows > 0)
        std::cout << "note: dropped " << d.dropped_rows << " rows with non-finite values\n";
    d = preprocess(d, c.add_bias, !c.no_normalize);
    if (int dups = duplicate_rows(d.features); dups > 0)
        std::cout << "note: " << dups << " duplicate rows; kernel may be singular up to lambda\n";

    std::vector<Architecture> archs;
    std::stringstream ss(c.arch);
    std::string selector;
    while (std::getline(ss, selector, ',')) {
        if (selector == "dlinf") {
            archs.push_back(Architecture::dl_inf());
            continue;
        }
        for (int depth : c.depths) archs.push_back(ex::resolve_analytic_arch(selector, depth));
    }
    const auto r = ex::regress(d, archs, c.alphas, c.folds, c.lambda, c.seed);
    ex::write_table(ex::regress_table(r), c.out);
    std::cout << "regress: lambda=" << r.lambda << ", wrote " << out_path(c, "regress.csv") << "\n";
}

void run_drift(const Config& c) {
    ensure_out(c.out);
    const ScaledErf f(c.alphas.at(0));
    const auto sa = ex::resolve_arch(c.arch, std::min(c.depths.at(0), 5));
    ex::enforce_parameter_cap(sa.topology(), *std::max_element(c.trees.begin(), c.trees.end()),
                              c.features, c.max_params);
    const auto r = ex::drift(f, sa, c.trees, c.eta, c.steps, c.seeds, c.seed, c.n_train,
                             c.features);
    ex::write_table(ex::drift_table(r), c.out);
    std::vector<double> m(r.trees.begin(), r.trees.end());
    write_line_plot(out_path(c, "drift.svg"),
                    {"kernel drift, " + r.label, "trees", "median sup drift", true, true},
                    {{"drift", m, r.median_drift}});
    std::cout << "drift: fitted exponent " << r.exponent << "\n";
}

void add_common(CLI::App* cmd, Config& c) {
    cmd->add_option("--arch", c.arch, "pb|dl|dlinf|rule|profile:<file>|topo:<file>")
        ->capture_default_str();
    cmd->add_option("--depth", c.depths, "depth list")->delimiter(',')->capture_default_str();
    cmd->add_option("--alpha", c.alphas, "scaling factor list")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--trees", c.trees, "ensemble sizes M")->delimiter(',')->capture_default_str();
    cmd->add_option("--seed", c.seed, "base seed")->capture_default_str();
    cmd->add_option("--seeds", c.seeds, "number of re-initialization seeds")->capture_default_str();
    cmd->add_option("--steps", c.steps, "gradient-descent steps")->capture_default_str();
    cmd->add_option("--eta", c.eta, "learning rate")->capture_default_str();
    cmd->add_option("--grid", c.grid, "beta grid points")->capture_default_str();
    cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--max-params", c.max_params, "scalar parameter cap")->capture_default_str();
    static std::string config_path;  // consumed by the pre-scan in main
    cmd->add_option("--config", config_path, "JSON config file (flags override it)");
}

}  // namespace

int main(int argc, char** argv) {
    Config cfg;
    // The config file seeds the defaults; flags parsed afterwards override it.
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            try {
                apply_config_file(cfg, argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return 2;
            }
        }

    CLI::App app{"limiting NTK of soft tree ensembles: closed forms, finite-ensemble "
                 "simulation, and kernel regression experiments"};
    app.require_subcommand(1);

    auto* curve = app.add_subcommand("kernel-curve", "analytic kernel along the beta grid");
    auto* conv = app.add_subcommand("convergence", "empirical NTK vs the limiting kernel");
    auto* sweep = app.add_subcommand("depth-sweep", "normalized kernels across depths");
    auto* train = app.add_subcommand("train-compare",
                                     "GD trajectories of two equal-profile topologies vs analytic");
    auto* regress = app.add_subcommand("regress", "k-fold kernel regression on a CSV dataset");
    auto* drift = app.add_subcommand("drift", "empirical NTK drift over training");

    for (auto* cmd : {curve, conv, sweep, train, regress, drift}) add_common(cmd, cfg);
    train->add_option("--topo-a", cfg.topo_a, "topology JSON for side A");
    train->add_option("--topo-b", cfg.topo_b, "topology JSON for side B");
    for (auto* cmd : {train, drift}) {
        cmd->add_option("--n-train", cfg.n_train, "training points")->capture_default_str();
        cmd->add_option("--features", cfg.features, "input dimensionality")->capture_default_str();
    }
    train->add_option("--n-probe", cfg.n_probe, "probe points")->capture_default_str();
    regress->add_option("--data", cfg.data_path, "CSV dataset path");
    regress->add_option("--label", cfg.label_column, "label column name or index")
        ->capture_default_str();
    regress->add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
    regress->add_option("--lambda", cfg.lambda, "ridge strength")->capture_default_str();
    regress->add_option("--task", cfg.task, "auto|class|reg")->capture_default_str();
    regress->add_flag("--bias", cfg.add_bias, "append a constant-1 feature");
    regress->add_flag("--no-normalize", cfg.no_normalize, "skip unit-norm row scaling");

    // Defaults that differ per subcommand.
    bool steps_given = false, seeds_given = false;
    for (int i = 1; i < argc; ++i) {
        if (std::string(argv[i]) == "--steps") steps_given = true;
        if (std::string(argv[i]) == "--seeds") seeds_given = true;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (curve->parsed()) run_kernel_curve(cfg);
        if (conv->parsed()) run_convergence(cfg);
        if (sweep->parsed()) run_depth_sweep(cfg);
        if (train->parsed()) {
            if (!steps_given) cfg.steps = 200;
            if (!seeds_given) cfg.seeds = 5;
            run_train_compare(cfg);
        }
        if (regress->parsed()) run_regress(cfg);
        if (drift->parsed()) {
            if (!seeds_given) cfg.seeds = 5;
            run_drift(cfg);
        }
    } catch (const resource_limit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
