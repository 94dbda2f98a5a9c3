#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treetangent/errors.hpp"
#include "treetangent/gram.hpp"

namespace treetangent {

struct SpectralSummary {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double eta_max = 0.0;  // 2 / (lambda_min + lambda_max), the stable-step bound
};

struct EigSym {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns match eigenvalues

    SpectralSummary summary() const {
        SpectralSummary s;
        s.lambda_min = eigenvalues[0];
        s.lambda_max = eigenvalues[eigenvalues.size() - 1];
        s.eta_max = 2.0 / (s.lambda_min + s.lambda_max);
        return s;
    }
};

// Symmetric eigendecomposition (Eigen's self-adjoint solver).
inline EigSym eig_sym(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("eig_sym: matrix must be square");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (((h - h.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale)
        throw std::invalid_argument("eig_sym: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) throw numeric_error("eig_sym: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

inline EigSym eig_sym(const KernelMatrix& h) { return eig_sym(h.values); }

// Q exp(scale * Lambda) Q^T for a symmetric matrix.
inline Eigen::MatrixXd exp_sym(const Eigen::MatrixXd& h, double scale) {
    const EigSym e = eig_sym(h);
    return e.eigenvectors * (scale * e.eigenvalues.array()).exp().matrix().asDiagonal() *
           e.eigenvectors.transpose();
}

// Dual weights of kernel ridge regression: (H + lambda I) c = y.
struct RegressionFit {
    Eigen::VectorXd coefficients;
    double lambda = 0.0;
    std::vector<int> train_ids;
};

// Solves (H + lambda I) c = y by LDLT with one step of iterative refinement;
// falls back to an eigendecomposition solve when factorization fails. The
// ridge-less protocol (lambda = 1e-8) makes near-singular systems routine, so
// a residual above 1e-6 * ||y|| fails loudly with a condition estimate.
inline RegressionFit krr_fit(const KernelMatrix& h, const Eigen::VectorXd& y, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("krr_fit: lambda must be >= 0");
    const Eigen::Index n = h.values.rows();
    if (y.size() != n) throw std::invalid_argument("krr_fit: target size mismatch");
    Eigen::MatrixXd a = h.values;
    a.diagonal().array() += lambda;

    const double ynorm = y.norm();
    const double tol = 1e-6 * std::max(ynorm, 1e-300);
    Eigen::VectorXd c;
    bool need_fallback = true;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() == Eigen::Success) {
        c = ldlt.solve(y);
        c += ldlt.solve(y - a * c);  // one refinement pass
        need_fallback = !(a * c - y).allFinite() || (a * c - y).norm() > tol;
    }
    if (need_fallback) {
        const EigSym e = eig_sym(a);
        const double lmax = std::abs(e.eigenvalues.cwiseAbs().maxCoeff());
        Eigen::VectorXd inv = e.eigenvalues;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(inv[i]) <= 1e-300)
                throw numeric_error("krr_fit: singular system (|lambda_min| ~ 0, condition > 1e300)");
            inv[i] = 1.0 / inv[i];
        }
        c = e.eigenvectors * inv.asDiagonal() * (e.eigenvectors.transpose() * y);
        const double resid = (a * c - y).norm();
        if (resid > tol) {
            const double cond = lmax / std::abs(e.eigenvalues[0]);
            throw numeric_error("krr_fit: residual " + std::to_string(resid) +
                                " exceeds tolerance; condition estimate " + std::to_string(cond));
        }
    }
    RegressionFit fit;
    fit.coefficients = std::move(c);
    fit.lambda = lambda;
    fit.train_ids = h.input_ids;
    return fit;
}

// Predictions k(test, train) * c.
inline Eigen::VectorXd krr_predict(const RegressionFit& fit, const Eigen::MatrixXd& k_cross) {
    if (k_cross.cols() != fit.coefficients.size())
        throw std::invalid_argument("krr_predict: cross-kernel width mismatch");
    return k_cross * fit.coefficients;
}

// Exact linearized training dynamics under a fixed kernel:
//   f(tau) = H_cross H^{-1} (I - exp(-eta H tau)) y,
// evaluated through the eigendecomposition as H_cross Q g(Lambda) Q^T y with
// g(lambda) = (1 - exp(-eta lambda tau)) / lambda and the lambda -> 0 limit
// eta * tau, so singular directions stay finite. Returns one row per tau.
inline Eigen::MatrixXd analytic_dynamics(const KernelMatrix& h_train,
                                         const Eigen::MatrixXd& h_cross, const Eigen::VectorXd& y,
                                         double eta, const std::vector<double>& taus) {
    const Eigen::Index n = h_train.values.rows();
    if (h_cross.cols() != n) throw std::invalid_argument("analytic_dynamics: cross block mismatch");
    if (y.size() != n) throw std::invalid_argument("analytic_dynamics: target size mismatch");
    const EigSym e = eig_sym(h_train);
    const double lmax = e.eigenvalues[n - 1];
    if (!(eta > 0.0) || eta * lmax >= 2.0)
        throw numeric_error("analytic_dynamics: unstable learning rate eta=" + std::to_string(eta) +
                            " (eta*lambda_max = " + std::to_string(eta * lmax) + " >= 2)");
    const Eigen::VectorXd qty = e.eigenvectors.transpose() * y;
    Eigen::MatrixXd out(taus.size(), h_cross.rows());
    Eigen::VectorXd g(n);
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const double tau = taus[t];
        if (tau < 0.0) throw std::invalid_argument("analytic_dynamics: tau must be >= 0");
        for (Eigen::Index i = 0; i < n; ++i) {
            const double lam = e.eigenvalues[i];
            g[i] = lam == 0.0 ? eta * tau : -std::expm1(-eta * lam * tau) / lam;
        }
        out.row(t) = (h_cross * (e.eigenvectors * g.cwiseProduct(qty))).transpose();
    }
    return out;
}

inline Eigen::VectorXd analytic_dynamics(const KernelMatrix& h_train,
                                         const Eigen::MatrixXd& h_cross, const Eigen::VectorXd& y,
                                         double eta, double tau) {
    return analytic_dynamics(h_train, h_cross, y, eta, std::vector<double>{tau}).row(0);
}

// One-hot kernel regression per class, argmax decoding (ties break to the
// lowest class index). scores, when given, receives the per-class values.
inline std::vector<int> classify(const KernelMatrix& h_train, const Eigen::MatrixXd& h_cross,
                                 const std::vector<int>& train_classes, int n_classes,
                                 double lambda, Eigen::MatrixXd* scores = nullptr) {
    const Eigen::Index n = h_train.values.rows();
    if (static_cast<Eigen::Index>(train_classes.size()) != n)
        throw std::invalid_argument("classify: class list does not match kernel");
    for (int c : train_classes)
        if (c < 0 || c >= n_classes)
            throw std::invalid_argument("classify: class id " + std::to_string(c) +
                                        " outside [0, " + std::to_string(n_classes) + ")");
    Eigen::MatrixXd s(h_cross.rows(), n_classes);
    for (int c = 0; c < n_classes; ++c) {
        Eigen::VectorXd onehot = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (train_classes[i] == c) onehot[i] = 1.0;
        s.col(c) = krr_predict(krr_fit(h_train, onehot, lambda), h_cross);
    }
    std::vector<int> pred(h_cross.rows());
    for (Eigen::Index i = 0; i < h_cross.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < n_classes; ++c)
            if (s(i, c) > s(i, best)) best = c;
        pred[i] = best;
    }
    if (scores) *scores = std::move(s);
    return pred;
}

}  // namespace treetangent
