#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "treetangent/dataset.hpp"
#include "treetangent/ensemble.hpp"
#include "treetangent/errors.hpp"
#include "treetangent/format.hpp"
#include "treetangent/gram.hpp"
#include "treetangent/kernel.hpp"
#include "treetangent/linearized.hpp"
#include "treetangent/rng.hpp"
#include "treetangent/topology.hpp"
#include "treetangent/training.hpp"

namespace treetangent::experiments {

// ---------------------------------------------------------------------------
// CSV plumbing

struct Table {
    std::string name;                    // file stem
    std::vector<std::string> comments;   // emitted as leading "# ..." lines
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

    std::string to_csv() const {
        std::string out;
        for (const auto& c : comments) out += "# " + c + "\n";
        for (std::size_t j = 0; j < columns.size(); ++j)
            out += columns[j] + (j + 1 < columns.size() ? "," : "");
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t j = 0; j < row.size(); ++j)
                out += row[j] + (j + 1 < row.size() ? "," : "");
            out += "\n";
        }
        return out;
    }
};

inline std::string fmt(double v) { return format_double(v); }

inline void write_table(const Table& t, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string path = (fs::path(dir) / (t.name + ".csv")).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write '" + path + "'");
    out << t.to_csv();
}

// ---------------------------------------------------------------------------
// Shared setup helpers

// xi = (1, 0), xj(beta) = (cos beta, sin beta), beta on [0, pi].
inline std::vector<double> beta_grid(int points) {
    if (points < 2) throw config_error("beta grid needs at least 2 points");
    std::vector<double> beta(points);
    for (int g = 0; g < points; ++g) beta[g] = M_PI * g / (points - 1);
    return beta;
}

inline Eigen::MatrixXd beta_inputs(const std::vector<double>& beta) {
    Eigen::MatrixXd xs(beta.size(), 2);
    for (std::size_t g = 0; g < beta.size(); ++g) {
        xs(g, 0) = std::cos(beta[g]);
        xs(g, 1) = std::sin(beta[g]);
    }
    return xs;
}

// Training setup used by the dynamics experiments: unit-norm random inputs,
// standard-normal targets.
struct FigSetup {
    Eigen::MatrixXd x_train;  // n_train x features
    Eigen::VectorXd y;
    Eigen::MatrixXd x_probe;  // n_probe x features
};

inline FigSetup make_fig_setup(std::uint64_t seed, int n_train = 10, int n_probe = 10,
                               int features = 5) {
    const CounterRng rng(seed);
    FigSetup s;
    s.x_train = random_unit_rows(rng.stream(rng_stream::train_data), n_train, features);
    s.x_probe = random_unit_rows(rng.stream(rng_stream::probe_data), n_probe, features);
    s.y = rng.stream(rng_stream::targets).normal_vector(0, n_train);
    return s;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope: need matching lists of >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(x.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Architecture selector resolved for both the analytic kernel and (when it
// names a finite topology) the simulator.
struct SimArch {
    Architecture arch;
    std::optional<TreeTopology> topo;
    std::string label;

    const TreeTopology& topology() const {
        if (!topo) throw config_error("architecture '" + label + "' has no finite topology");
        return *topo;
    }
};

inline LeafProfile load_profile_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open profile file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("profile '" + path + "': " + e.what());
    }
    std::map<int, long> counts;
    for (const auto& [key, value] : j.at("counts").items())
        counts[std::stoi(key)] = value.get<long>();
    return LeafProfile(std::move(counts));
}

// Parses the CLI selector: pb | dl | dlinf | rule | profile:<file> | topo:<file>.
// Analytic-only resolution; never materializes a topology, so selectors like
// pb with depth 128 stay usable for closed-form sweeps.
inline Architecture resolve_analytic_arch(const std::string& selector, int depth) {
    if (selector == "pb") return Architecture::pb(depth);
    if (selector == "dl") return Architecture::dl(depth);
    if (selector == "rule") return Architecture::rule(depth);
    if (selector == "dlinf") return Architecture::dl_inf();
    if (selector.rfind("profile:", 0) == 0)
        return Architecture::from_profile(load_profile_file(selector.substr(8)));
    if (selector.rfind("topo:", 0) == 0)
        return Architecture::from_profile(profile_of(TreeTopology::from_file(selector.substr(5))));
    throw config_error("unknown architecture selector '" + selector + "'");
}

// Resolution for subcommands that also simulate finite ensembles.
inline SimArch resolve_arch(const std::string& selector, int depth) {
    if (selector == "pb")
        return {Architecture::pb(depth), TreeTopology::perfect_binary(depth),
                "pb-d" + std::to_string(depth)};
    if (selector == "dl")
        return {Architecture::dl(depth), TreeTopology::decision_list(depth),
                "dl-d" + std::to_string(depth)};
    if (selector == "rule")
        return {Architecture::rule(depth), TreeTopology::rule_chain(depth),
                "rule-d" + std::to_string(depth)};
    if (selector == "dlinf") return {Architecture::dl_inf(), std::nullopt, "dl-inf"};
    if (selector.rfind("topo:", 0) == 0) {
        TreeTopology topo = TreeTopology::from_file(selector.substr(5));
        auto arch = Architecture::from_profile(profile_of(topo));
        return {std::move(arch), std::move(topo), "topo"};
    }
    if (selector.rfind("profile:", 0) == 0) {
        auto arch = Architecture::from_profile(load_profile_file(selector.substr(8)));
        return {arch, std::nullopt, arch.label()};
    }
    throw config_error("unknown architecture selector '" + selector + "'");
}

inline void enforce_parameter_cap(const TreeTopology& topo, long trees, long features, long cap) {
    const long p = parameter_count(topo, trees, features);
    if (p > cap)
        throw resource_limit_error("run needs " + std::to_string(p) +
                                   " scalar parameters, above the cap of " + std::to_string(cap) +
                                   "; lower --trees/--depth or raise the cap");
}

// ---------------------------------------------------------------------------
// kernel-curve: analytic kernel value along the beta grid.

struct KernelCurveResult {
    std::string label;
    std::vector<double> beta, value, normalized;
};

inline KernelCurveResult kernel_curve(const ScaledErf& f, const Architecture& arch,
                                      int grid_points) {
    KernelCurveResult r;
    r.label = arch.label();
    r.beta = beta_grid(grid_points);
    const Eigen::MatrixXd xs = beta_inputs(r.beta);
    const Eigen::Vector2d base(1.0, 0.0);
    const double diag = ntk_value(f, arch, base, base);
    for (std::size_t g = 0; g < r.beta.size(); ++g) {
        const double v = ntk_value(f, arch, base, xs.row(g).transpose());
        r.value.push_back(v);
        r.normalized.push_back(v / diag);
    }
    return r;
}

inline Table kernel_curve_table(const KernelCurveResult& r) {
    Table t;
    t.name = "kernel_curve";
    t.comments = {"arch=" + r.label};
    t.columns = {"beta", "value", "normalized"};
    for (std::size_t g = 0; g < r.beta.size(); ++g)
        t.add_row({fmt(r.beta[g]), fmt(r.value[g]), fmt(r.normalized[g])});
    return t;
}

// ---------------------------------------------------------------------------
// convergence: empirical NTK along the beta grid against the analytic curve,
// across ensemble sizes and re-initialization seeds.

struct ConvergenceResult {
    std::string label;
    std::vector<long> trees;
    std::vector<double> beta;
    std::vector<double> analytic;                       // per beta
    std::vector<std::vector<Eigen::VectorXd>> curves;   // [m][seed] -> per-beta values
    std::vector<std::vector<double>> rms, sup;          // [m][seed]
    std::vector<double> median_rms, median_sup;         // per m
    double slope = 0.0;
};

inline ConvergenceResult convergence(const ScaledErf& f, const SimArch& sa,
                                     const std::vector<long>& trees, int seeds, int grid_points,
                                     std::uint64_t seed0) {
    if (trees.empty() || seeds < 1) throw config_error("convergence: empty run matrix");
    const TreeTopology& topo = sa.topology();
    ConvergenceResult r;
    r.label = sa.label;
    r.trees = trees;
    r.beta = beta_grid(grid_points);
    const Eigen::MatrixXd grid = beta_inputs(r.beta);
    Eigen::MatrixXd base(1, 2);
    base << 1.0, 0.0;
    for (std::size_t g = 0; g < r.beta.size(); ++g)
        r.analytic.push_back(ntk_value(f, sa.arch, base.row(0).transpose(), grid.row(g).transpose()));

    r.curves.resize(trees.size());
    r.rms.resize(trees.size());
    r.sup.resize(trees.size());
    for (std::size_t mi = 0; mi < trees.size(); ++mi) {
        for (int s = 0; s < seeds; ++s) {
            const auto params = EnsembleParams::ntk_init(
                topo, static_cast<int>(trees[mi]), 2, seed0 + static_cast<std::uint64_t>(s));
            const Eigen::MatrixXd row = empirical_ntk_cross(topo, f, params, base, grid);
            Eigen::VectorXd curve = row.row(0).transpose();
            double sq = 0.0, mx = 0.0;
            for (std::size_t g = 0; g < r.beta.size(); ++g) {
                const double d = curve[g] - r.analytic[g];
                sq += d * d;
                mx = std::max(mx, std::abs(d));
            }
            r.rms[mi].push_back(std::sqrt(sq / static_cast<double>(r.beta.size())));
            r.sup[mi].push_back(mx);
            r.curves[mi].push_back(std::move(curve));
        }
        r.median_rms.push_back(median(r.rms[mi]));
        r.median_sup.push_back(median(r.sup[mi]));
    }
    std::vector<double> m_as_double(trees.begin(), trees.end());
    r.slope = loglog_slope(m_as_double, r.median_rms);
    return r;
}

inline Table convergence_table(const ConvergenceResult& r) {
    Table t;
    t.name = "convergence";
    t.comments = {"arch=" + r.label};
    t.columns = {"trees", "seed", "beta", "empirical", "analytic"};
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        for (std::size_t s = 0; s < r.curves[mi].size(); ++s)
            for (std::size_t g = 0; g < r.beta.size(); ++g)
                t.add_row({std::to_string(r.trees[mi]), std::to_string(s), fmt(r.beta[g]),
                           fmt(r.curves[mi][s][g]), fmt(r.analytic[g])});
    return t;
}

inline Table convergence_summary_table(const ConvergenceResult& r) {
    Table t;
    t.name = "convergence_summary";
    t.comments = {"arch=" + r.label, "loglog_slope=" + fmt(r.slope)};
    t.columns = {"trees", "median_rms", "median_sup"};
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        t.add_row({std::to_string(r.trees[mi]), fmt(r.median_rms[mi]), fmt(r.median_sup[mi])});
    return t;
}

// ---------------------------------------------------------------------------
// depth-sweep: normalized kernel value against beta for PB and DL across
// depths, with the infinite-depth decision list as reference.

struct DepthSweepResult {
    std::vector<int> depths;
    std::vector<double> beta;
    std::vector<std::vector<double>> pb_norm, dl_norm;  // [depth][beta]
    std::vector<double> dl_inf_norm;                    // [beta]
};

inline DepthSweepResult depth_sweep(const ScaledErf& f, const std::vector<int>& depths,
                                    int grid_points) {
    if (depths.empty()) throw config_error("depth_sweep: empty depth list");
    DepthSweepResult r;
    r.depths = depths;
    r.beta = beta_grid(grid_points);
    for (int d : depths) {
        r.pb_norm.push_back(kernel_curve(f, Architecture::pb(d), grid_points).normalized);
        r.dl_norm.push_back(kernel_curve(f, Architecture::dl(d), grid_points).normalized);
    }
    r.dl_inf_norm = kernel_curve(f, Architecture::dl_inf(), grid_points).normalized;
    return r;
}

inline Table depth_sweep_table(const DepthSweepResult& r) {
    Table t;
    t.name = "depth_sweep";
    t.columns = {"arch", "depth", "beta", "normalized"};
    for (std::size_t di = 0; di < r.depths.size(); ++di)
        for (std::size_t g = 0; g < r.beta.size(); ++g)
            t.add_row({"pb", std::to_string(r.depths[di]), fmt(r.beta[g]), fmt(r.pb_norm[di][g])});
    for (std::size_t di = 0; di < r.depths.size(); ++di)
        for (std::size_t g = 0; g < r.beta.size(); ++g)
            t.add_row({"dl", std::to_string(r.depths[di]), fmt(r.beta[g]), fmt(r.dl_norm[di][g])});
    for (std::size_t g = 0; g < r.beta.size(); ++g)
        t.add_row({"dl-inf", "-1", fmt(r.beta[g]), fmt(r.dl_inf_norm[g])});
    return t;
}

// ---------------------------------------------------------------------------
// train-compare: two finite-tree ensembles with the same leaf profile against
// the analytic trajectory.

struct TrainCompareResult {
    std::vector<long> trees;
    std::vector<long> steps;                        // logged step numbers 0..steps
    Eigen::MatrixXd analytic;                       // (steps+1) x probes, shared by A and B
    // [m][seed] trajectories for topologies A and B
    std::vector<std::vector<Eigen::MatrixXd>> out_a, out_b;
    std::vector<std::vector<double>> ab_gap;        // [m][seed] max |A - B|
    std::vector<double> median_ab_gap;              // per m
    std::vector<std::vector<double>> a_vs_analytic; // [m][seed] max |A - analytic|
    bool analytic_identical_for_both = false;
};

inline TrainCompareResult train_compare(const ScaledErf& f, const TreeTopology& topo_a,
                                        const TreeTopology& topo_b, const std::vector<long>& trees,
                                        double eta, long steps, int seeds, std::uint64_t seed0,
                                        int n_train = 10, int n_probe = 10, int features = 5) {
    if (trees.empty() || seeds < 1 || steps < 0) throw config_error("train_compare: bad run matrix");
    TrainCompareResult r;
    r.trees = trees;
    const FigSetup setup = make_fig_setup(seed0, n_train, n_probe, features);

    // Analytic trajectory from the leaf profile; equal profiles make the A and
    // B kernels the same object, so the two "analytic" trajectories can only
    // differ if the profiles do.
    const auto arch_a = Architecture::from_profile(profile_of(topo_a));
    const auto arch_b = Architecture::from_profile(profile_of(topo_b));
    const KernelMatrix h_a = gram(f, arch_a, setup.x_train);
    const KernelMatrix h_b = gram(f, arch_b, setup.x_train);
    const Eigen::MatrixXd cross_a = gram_cross(f, arch_a, setup.x_probe, setup.x_train);
    const Eigen::MatrixXd cross_b = gram_cross(f, arch_b, setup.x_probe, setup.x_train);
    std::vector<double> taus(steps + 1);
    for (long s = 0; s <= steps; ++s) taus[s] = static_cast<double>(s);
    const Eigen::MatrixXd traj_a = analytic_dynamics(h_a, cross_a, setup.y, eta, taus);
    const Eigen::MatrixXd traj_b = analytic_dynamics(h_b, cross_b, setup.y, eta, taus);
    r.analytic = traj_a;
    r.analytic_identical_for_both = traj_a == traj_b;
    for (long s = 0; s <= steps; ++s) r.steps.push_back(s);

    r.out_a.resize(trees.size());
    r.out_b.resize(trees.size());
    r.ab_gap.resize(trees.size());
    r.a_vs_analytic.resize(trees.size());
    for (std::size_t mi = 0; mi < trees.size(); ++mi) {
        const int m = static_cast<int>(trees[mi]);
        for (int s = 0; s < seeds; ++s) {
            const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(s);
            auto run = [&](const TreeTopology& topo) {
                auto st = make_train_state(topo, f, EnsembleParams::ntk_init(topo, m, features, seed),
                                           eta, setup.x_train, setup.x_probe);
                return train_gd(topo, f, st, setup.x_train, setup.y, setup.x_probe, steps);
            };
            TrajectoryLog la = run(topo_a);
            TrajectoryLog lb = run(topo_b);
            r.ab_gap[mi].push_back((la.probe_outputs - lb.probe_outputs).cwiseAbs().maxCoeff());
            r.a_vs_analytic[mi].push_back((la.probe_outputs - r.analytic).cwiseAbs().maxCoeff());
            r.out_a[mi].push_back(std::move(la.probe_outputs));
            r.out_b[mi].push_back(std::move(lb.probe_outputs));
        }
        r.median_ab_gap.push_back(median(r.ab_gap[mi]));
    }
    return r;
}

inline Table train_compare_table(const TrainCompareResult& r) {
    Table t;
    t.name = "train_compare";
    t.columns = {"trees", "seed", "step", "probe_id", "output_a", "output_b", "analytic"};
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        for (std::size_t s = 0; s < r.out_a[mi].size(); ++s)
            for (std::size_t row = 0; row < r.steps.size(); ++row)
                for (Eigen::Index q = 0; q < r.analytic.cols(); ++q)
                    t.add_row({std::to_string(r.trees[mi]), std::to_string(s),
                               std::to_string(r.steps[row]), std::to_string(q),
                               fmt(r.out_a[mi][s](row, q)), fmt(r.out_b[mi][s](row, q)),
                               fmt(r.analytic(row, q))});
    return t;
}

inline Table train_compare_summary_table(const TrainCompareResult& r) {
    Table t;
    t.name = "train_compare_summary";
    t.comments = {std::string("analytic_identical_for_both=") +
                  (r.analytic_identical_for_both ? "true" : "false")};
    t.columns = {"trees", "median_ab_gap"};
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        t.add_row({std::to_string(r.trees[mi]), fmt(r.median_ab_gap[mi])});
    return t;
}

// ---------------------------------------------------------------------------
// drift: sup-norm change of the empirical NTK over training, per ensemble size.

struct DriftResult {
    std::string label;
    std::vector<long> trees;
    std::vector<std::vector<double>> drift;  // [m][seed]
    std::vector<double> median_drift;        // per m
    double exponent = 0.0;                   // fitted d(M) ~ M^exponent
    double eta_used = 0.0;
    double eta_max = 0.0;
};

inline DriftResult drift(const ScaledErf& f, const SimArch& sa, const std::vector<long>& trees,
                         double eta, long steps, int seeds, std::uint64_t seed0, int n_train = 10,
                         int features = 5) {
    if (trees.empty() || seeds < 1) throw config_error("drift: empty run matrix");
    const TreeTopology& topo = sa.topology();
    DriftResult r;
    r.label = sa.label;
    r.trees = trees;
    const FigSetup setup = make_fig_setup(seed0, n_train, 1, features);

    const KernelMatrix h = gram(f, sa.arch, setup.x_train);
    r.eta_max = eig_sym(h).summary().eta_max;
    if (!(eta < r.eta_max))
        throw numeric_error("drift: eta=" + std::to_string(eta) + " is not below eta_max=" +
                            std::to_string(r.eta_max) + " of the analytic Gram");
    r.eta_used = eta;

    r.drift.resize(trees.size());
    for (std::size_t mi = 0; mi < trees.size(); ++mi) {
        const int m = static_cast<int>(trees[mi]);
        for (int s = 0; s < seeds; ++s) {
            const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(s);
            auto st = make_train_state(topo, f, EnsembleParams::ntk_init(topo, m, features, seed),
                                       eta, setup.x_train, setup.x_probe);
            const KernelMatrix before = empirical_ntk(topo, f, st.params, setup.x_train);
            train_gd(topo, f, st, setup.x_train, setup.y, setup.x_probe, steps);
            const KernelMatrix after = empirical_ntk(topo, f, st.params, setup.x_train);
            r.drift[mi].push_back(kernel_drift(before, after));
        }
        r.median_drift.push_back(median(r.drift[mi]));
    }
    if (trees.size() >= 2) {
        std::vector<double> m_as_double(trees.begin(), trees.end());
        r.exponent = loglog_slope(m_as_double, r.median_drift);
    }
    return r;
}

inline Table drift_table(const DriftResult& r) {
    Table t;
    t.name = "drift";
    t.comments = {"arch=" + r.label, "eta=" + fmt(r.eta_used), "eta_max=" + fmt(r.eta_max),
                  "fitted_exponent=" + fmt(r.exponent)};
    t.columns = {"trees", "seed", "drift"};
    for (std::size_t mi = 0; mi < r.trees.size(); ++mi)
        for (std::size_t s = 0; s < r.drift[mi].size(); ++s)
            t.add_row({std::to_string(r.trees[mi]), std::to_string(s), fmt(r.drift[mi][s])});
    return t;
}

// ---------------------------------------------------------------------------
// regress: k-fold kernel regression over an (architecture, depth, alpha) grid.

struct RegressRow {
    std::string arch_label;
    double alpha = 0.0;
    std::string metric;  // "accuracy" or "rmse"
    double value = 0.0;
};

struct RegressResult {
    double lambda = 0.0;
    int folds = 0;
    std::uint64_t seed = 0;
    std::vector<RegressRow> rows;

    double value_for(const std::string& label, double alpha) const {
        for (const auto& row : rows)
            if (row.arch_label == label && row.alpha == alpha) return row.value;
        throw std::invalid_argument("regress: no row for " + label);
    }
};

// Runs every architecture at every alpha. Classification accuracy for
// categorical labels, RMSE otherwise; one Gram per cell, sliced per fold.
inline RegressResult regress(const Dataset& data, const std::vector<Architecture>& archs,
                             const std::vector<double>& alphas, int folds, double lambda,
                             std::uint64_t seed) {
    if (archs.empty() || alphas.empty()) throw config_error("regress: empty grid");
    RegressResult result;
    result.lambda = lambda;
    result.folds = folds;
    result.seed = seed;
    const SplitPlan plan = make_folds(data, folds, seed);

    for (const auto& arch : archs) {
        for (double alpha : alphas) {
            const ScaledErf f(alpha);
            const KernelMatrix full = gram(f, arch, data.features);
            double correct = 0.0, sq_err = 0.0;
            for (int fold = 0; fold < folds; ++fold) {
                std::vector<int> test_ids = plan.fold_members(fold);
                std::vector<int> train_ids;
                for (int i = 0; i < data.n(); ++i)
                    if (plan.fold_of[i] != fold) train_ids.push_back(i);
                const Eigen::Index nt = static_cast<Eigen::Index>(train_ids.size());
                KernelMatrix h;
                h.values.resize(nt, nt);
                h.provenance = Provenance::analytic;
                h.input_ids = train_ids;
                for (Eigen::Index a = 0; a < nt; ++a)
                    for (Eigen::Index b = 0; b < nt; ++b)
                        h.values(a, b) = full.values(train_ids[a], train_ids[b]);
                Eigen::MatrixXd cross(test_ids.size(), nt);
                for (std::size_t a = 0; a < test_ids.size(); ++a)
                    for (Eigen::Index b = 0; b < nt; ++b)
                        cross(a, b) = full.values(test_ids[a], train_ids[b]);
                if (data.categorical()) {
                    std::vector<int> train_classes;
                    for (int id : train_ids) train_classes.push_back(data.class_ids[id]);
                    const auto pred =
                        classify(h, cross, train_classes, data.n_classes(), lambda);
                    for (std::size_t a = 0; a < test_ids.size(); ++a)
                        if (pred[a] == data.class_ids[test_ids[a]]) correct += 1.0;
                } else {
                    Eigen::VectorXd y(nt);
                    for (Eigen::Index b = 0; b < nt; ++b) y[b] = data.targets[train_ids[b]];
                    const Eigen::VectorXd pred = krr_predict(krr_fit(h, y, lambda), cross);
                    for (std::size_t a = 0; a < test_ids.size(); ++a) {
                        const double d = pred[a] - data.targets[test_ids[a]];
                        sq_err += d * d;
                    }
                }
            }
            RegressRow row;
            row.arch_label = arch.label();
            row.alpha = alpha;
            if (data.categorical()) {
                row.metric = "accuracy";
                row.value = correct / data.n();
            } else {
                row.metric = "rmse";
                row.value = std::sqrt(sq_err / data.n());
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

inline Table regress_table(const RegressResult& r) {
    Table t;
    t.name = "regress";
    t.comments = {"lambda=" + fmt(r.lambda), "folds=" + std::to_string(r.folds),
                  "seed=" + std::to_string(r.seed)};
    t.columns = {"arch", "alpha", "metric", "value"};
    for (const auto& row : r.rows)
        t.add_row({row.arch_label, fmt(row.alpha), row.metric, fmt(row.value)});
    return t;
}

}  // namespace treetangent::experiments
