#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "treetangent/ensemble.hpp"
#include "treetangent/errors.hpp"
#include "treetangent/format.hpp"

namespace treetangent {

// Mutable training state. shift_* hold the step-0 outputs on the training and
// probe inputs; they are recorded once and never touched again, and every
// reported output is the raw forward value minus its shift ("outputs shifted
// to zero" at initialization).
struct TrainState {
    EnsembleParams params;
    long step = 0;
    double eta = 0.1;
    Eigen::VectorXd train_shift;
    Eigen::VectorXd probe_shift;
};

inline TrainState make_train_state(const TreeTopology& topo, const ScaledErf& f,
                                   EnsembleParams params, double eta,
                                   const Eigen::MatrixXd& xs_train,
                                   const Eigen::MatrixXd& xs_probe) {
    if (!(eta > 0.0)) throw std::invalid_argument("make_train_state: eta must be positive");
    TrainState st;
    st.eta = eta;
    st.train_shift.resize(xs_train.rows());
    for (Eigen::Index i = 0; i < xs_train.rows(); ++i)
        st.train_shift[i] = forward(topo, f, params, xs_train.row(i).transpose());
    st.probe_shift.resize(xs_probe.rows());
    for (Eigen::Index i = 0; i < xs_probe.rows(); ++i)
        st.probe_shift[i] = forward(topo, f, params, xs_probe.row(i).transpose());
    st.params = std::move(params);
    return st;
}

// Shifted probe outputs per step; row s is the state after s gradient steps
// (row 0 is all zeros by construction of the shift).
struct TrajectoryLog {
    std::vector<long> steps;
    Eigen::MatrixXd probe_outputs;  // (steps+1) x n_probes
    Eigen::VectorXd loss;           // (steps+1), 0.5 * sum of squared shifted residuals
};

// Full-batch gradient descent on the squared loss
//   L = 0.5 * sum_i (f(x_i) - shift_i - y_i)^2.
// Per-sample coefficient computation runs in parallel; the gradient is
// accumulated over samples in ascending index order, so the result does not
// depend on the thread count. Aborts when the loss exceeds 1e6x its initial
// value.
inline TrajectoryLog train_gd(const TreeTopology& topo, const ScaledErf& f, TrainState& st,
                              const Eigen::MatrixXd& xs, const Eigen::VectorXd& ys,
                              const Eigen::MatrixXd& xs_probe, long steps) {
    const int n = static_cast<int>(xs.rows());
    if (ys.size() != n) throw std::invalid_argument("train_gd: targets do not match samples");
    if (st.train_shift.size() != n || st.probe_shift.size() != xs_probe.rows())
        throw std::invalid_argument("train_gd: state shifts do not match inputs");

    TrajectoryLog log;
    log.steps.reserve(steps + 1);
    log.probe_outputs.resize(steps + 1, xs_probe.rows());
    log.loss.resize(steps + 1);

    std::vector<JacobianCoeffs> coeffs(n);
    Eigen::VectorXd residual(n);
    const int n_nodes = topo.n_nodes();

    auto record = [&](long row) {
        log.steps.push_back(st.step);
        for (Eigen::Index q = 0; q < xs_probe.rows(); ++q)
            log.probe_outputs(row, q) =
                forward(topo, f, st.params, xs_probe.row(q).transpose()) - st.probe_shift[q];
    };

    double initial_loss = -1.0;
    for (long s = 0; s <= steps; ++s) {
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
            coeffs[i] = jacobian_coeffs(topo, f, st.params, xs.row(i).transpose());
        });
        for (int i = 0; i < n; ++i)
            residual[i] = forward_from_coeffs(st.params, coeffs[i]) - st.train_shift[i] - ys[i];
        const double loss = 0.5 * residual.squaredNorm();
        log.loss[s] = loss;
        if (s == 0) initial_loss = loss;
        if (initial_loss > 0.0 && loss > 1e6 * initial_loss)
            throw numeric_error("train_gd: diverged at step " + std::to_string(st.step) +
                                " (loss " + std::to_string(loss) + ")");
        record(s);
        if (s == steps) break;

        for (int i = 0; i < n; ++i) {
            const double r = st.eta * residual[i];
            const auto x = xs.row(i).transpose();
            for (int m = 0; m < st.params.trees; ++m) {
                for (int node = 0; node < n_nodes; ++node) {
                    const double g = r * coeffs[i].node(m, node);
                    if (g != 0.0) st.params.w[m].col(node) -= g * x;
                }
                st.params.pi[m] -= r * coeffs[i].leaf.row(m).transpose();
            }
        }
        ++st.step;
    }
    return log;
}

// sup_{i,j} |after - before| between two empirical kernels of the same run.
inline double kernel_drift(const KernelMatrix& before, const KernelMatrix& after) {
    if (before.values.rows() != after.values.rows() ||
        before.values.cols() != after.values.cols())
        throw std::invalid_argument("kernel_drift: shape mismatch");
    if (before.provenance != after.provenance || before.trees != after.trees)
        throw std::invalid_argument("kernel_drift: kernels come from different ensembles");
    return (after.values - before.values).cwiseAbs().maxCoeff();
}

// CSV schema: step,probe_id,output
inline void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("write_trajectory_csv: cannot write '" + path + "'");
    out << "step,probe_id,output\n";
    for (std::size_t s = 0; s < log.steps.size(); ++s)
        for (Eigen::Index q = 0; q < log.probe_outputs.cols(); ++q)
            out << log.steps[s] << "," << q << "," << format_double(log.probe_outputs(s, q))
                << "\n";
}

}  // namespace treetangent
