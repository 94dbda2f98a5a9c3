#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "treetangent/gram.hpp"
#include "treetangent/kernel.hpp"
#include "treetangent/parallel.hpp"
#include "treetangent/rng.hpp"
#include "treetangent/scaled_erf.hpp"
#include "treetangent/topology.hpp"

namespace treetangent {

// Parameters of an M-tree ensemble sharing one topology: per tree a node
// weight matrix w (F x N_nodes, one column per internal node) and a leaf
// value vector pi (N_leaves).
//
// Flat parameter order, used by ntk_init, jacobian() and the training update:
// trees ascending; within a tree all node weights (node-major, features
// within a column contiguous), then all leaf values.
struct EnsembleParams {
    int trees = 0;
    int features = 0;
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> pi;

    // NTK initialization: every scalar i.i.d. standard normal, drawn from the
    // counter-based stream in flat parameter order.
    static EnsembleParams ntk_init(const TreeTopology& topo, int trees, int features,
                                   std::uint64_t seed) {
        if (trees < 1 || features < 1)
            throw std::invalid_argument("ntk_init: trees and features must be >= 1");
        const CounterRng rng = CounterRng(seed).stream(rng_stream::params);
        EnsembleParams p;
        p.trees = trees;
        p.features = features;
        p.w.reserve(trees);
        p.pi.reserve(trees);
        const int n = topo.n_nodes(), l = topo.n_leaves();
        std::uint64_t c = 0;
        for (int m = 0; m < trees; ++m) {
            Eigen::MatrixXd wm(features, n);
            for (int j = 0; j < n; ++j)
                for (int f = 0; f < features; ++f) wm(f, j) = rng.normal(c++);
            Eigen::VectorXd pim(l);
            for (int j = 0; j < l; ++j) pim(j) = rng.normal(c++);
            p.w.push_back(std::move(wm));
            p.pi.push_back(std::move(pim));
        }
        return p;
    }

    long parameter_count(const TreeTopology& topo) const {
        return static_cast<long>(trees) *
               (static_cast<long>(features) * topo.n_nodes() + topo.n_leaves());
    }
};

inline long parameter_count(const TreeTopology& topo, long trees, long features) {
    return trees * (features * topo.n_nodes() + topo.n_leaves());
}

namespace detail {

inline void check_shapes(const TreeTopology& topo, const EnsembleParams& p, VecRef x) {
    if (p.trees < 1 || static_cast<int>(p.w.size()) != p.trees ||
        static_cast<int>(p.pi.size()) != p.trees)
        throw std::invalid_argument("ensemble: inconsistent tree count");
    if (x.size() != p.features) throw std::invalid_argument("ensemble: feature size mismatch");
    if (p.w[0].rows() != p.features || p.w[0].cols() != topo.n_nodes() ||
        p.pi[0].size() != topo.n_leaves())
        throw std::invalid_argument("ensemble: parameter shapes do not match topology");
}

// sigma and sigma' at every internal node of one tree.
inline void node_activations(const TreeTopology& topo, const ScaledErf& f,
                             const Eigen::MatrixXd& wm, VecRef x, Eigen::VectorXd& sig,
                             Eigen::VectorXd& sigdot) {
    const int n = topo.n_nodes();
    sig.resize(n);
    sigdot.resize(n);
    for (int j = 0; j < n; ++j) {
        const double p = wm.col(j).dot(x);
        sig[j] = f.value(p);
        sigdot[j] = f.deriv(p);
    }
}

inline double routing_factor(const Eigen::VectorXd& sig, const TreeTopology::PathStep& s,
                             TreeKind kind) {
    // Rule chains route with sigma only; the right-flow factor of a tree is
    // 1 - sigma.
    if (kind == TreeKind::rule_set || s.left) return sig[s.node];
    return 1.0 - sig[s.node];
}

}  // namespace detail

// Probability that x reaches the given leaf (0-based) in tree m: the product
// of routing factors along the root path.
inline double mu(const TreeTopology& topo, const ScaledErf& f, const Eigen::MatrixXd& w_m,
                 VecRef x, int leaf) {
    if (leaf < 0 || leaf >= topo.n_leaves())
        throw std::invalid_argument("mu: invalid leaf id " + std::to_string(leaf));
    if (x.size() != w_m.rows()) throw std::invalid_argument("mu: feature size mismatch");
    Eigen::VectorXd sig, sigdot;
    detail::node_activations(topo, f, w_m, x, sig, sigdot);
    double prod = 1.0;
    for (const auto& s : topo.leaf_path(leaf)) prod *= detail::routing_factor(sig, s, topo.kind());
    return prod;
}

// Per-input gradient summaries with the 1/sqrt(M) output scaling folded in:
//   node(m, n) such that d f / d w_{m,n} = node(m, n) * x
//   leaf(m, l) = d f / d pi_{m,l} = mu_{m,l} / sqrt(M)
// Everything downstream (forward values, flat Jacobians, empirical NTK
// entries, training updates) is assembled from these.
struct JacobianCoeffs {
    Eigen::MatrixXd node;  // trees x n_nodes
    Eigen::MatrixXd leaf;  // trees x n_leaves
};

inline JacobianCoeffs jacobian_coeffs(const TreeTopology& topo, const ScaledErf& f,
                                      const EnsembleParams& p, VecRef x) {
    detail::check_shapes(topo, p, x);
    const int n = topo.n_nodes(), l = topo.n_leaves();
    const double scale = 1.0 / std::sqrt(static_cast<double>(p.trees));
    JacobianCoeffs c;
    c.node = Eigen::MatrixXd::Zero(p.trees, n);
    c.leaf.resize(p.trees, l);
    Eigen::VectorXd sig, sigdot, factors, prefix, suffix;
    for (int m = 0; m < p.trees; ++m) {
        detail::node_activations(topo, f, p.w[m], x, sig, sigdot);
        for (int leaf = 0; leaf < l; ++leaf) {
            const auto& path = topo.leaf_path(leaf);
            const int depth = static_cast<int>(path.size());
            factors.resize(depth);
            for (int k = 0; k < depth; ++k)
                factors[k] = detail::routing_factor(sig, path[k], topo.kind());
            // prefix[k] = product of factors before k, suffix[k] = after k.
            prefix.resize(depth + 1);
            suffix.resize(depth + 1);
            prefix[0] = 1.0;
            for (int k = 0; k < depth; ++k) prefix[k + 1] = prefix[k] * factors[k];
            suffix[depth] = 1.0;
            for (int k = depth - 1; k >= 0; --k) suffix[k] = suffix[k + 1] * factors[k];
            c.leaf(m, leaf) = scale * prefix[depth];
            const double pi_l = p.pi[m](leaf);
            for (int k = 0; k < depth; ++k) {
                const auto& s = path[k];
                const double sign = (topo.kind() == TreeKind::rule_set || s.left) ? 1.0 : -1.0;
                c.node(m, s.node) += pi_l * sign * prefix[k] * suffix[k + 1];
            }
        }
        for (int j = 0; j < n; ++j) c.node(m, j) *= scale * sigdot[j];
    }
    return c;
}

// Ensemble output (1/sqrt(M)) sum_m sum_l pi_{m,l} mu_{m,l}(x).
inline double forward(const TreeTopology& topo, const ScaledErf& f, const EnsembleParams& p,
                      VecRef x) {
    detail::check_shapes(topo, p, x);
    const int l = topo.n_leaves();
    double acc = 0.0;
    Eigen::VectorXd sig, sigdot;
    for (int m = 0; m < p.trees; ++m) {
        detail::node_activations(topo, f, p.w[m], x, sig, sigdot);
        for (int leaf = 0; leaf < l; ++leaf) {
            double prod = 1.0;
            for (const auto& s : topo.leaf_path(leaf))
                prod *= detail::routing_factor(sig, s, topo.kind());
            acc += p.pi[m](leaf) * prod;
        }
    }
    return acc / std::sqrt(static_cast<double>(p.trees));
}

// forward() assembled from precomputed coefficients (leaf already carries
// mu/sqrt(M)); used by the training loop to avoid a second tree traversal.
inline double forward_from_coeffs(const EnsembleParams& p, const JacobianCoeffs& c) {
    double acc = 0.0;
    for (int m = 0; m < p.trees; ++m) acc += p.pi[m].dot(c.leaf.row(m).transpose());
    return acc;
}

// Full gradient of forward() w.r.t. every parameter, flattened in the order
// documented on EnsembleParams.
inline Eigen::VectorXd jacobian(const TreeTopology& topo, const ScaledErf& f,
                                const EnsembleParams& p, VecRef x) {
    const JacobianCoeffs c = jacobian_coeffs(topo, f, p, x);
    const int n = topo.n_nodes(), l = topo.n_leaves(), fdim = p.features;
    Eigen::VectorXd j(p.parameter_count(topo));
    Eigen::Index pos = 0;
    for (int m = 0; m < p.trees; ++m) {
        for (int node = 0; node < n; ++node) {
            j.segment(pos, fdim) = c.node(m, node) * x;
            pos += fdim;
        }
        j.segment(pos, l) = c.leaf.row(m).transpose();
        pos += l;
    }
    return j;
}

namespace detail {

// <J(xi), J(xj)> given both coefficient sets. Node blocks contribute
// (xi . xj) * sum_{m,n} a_i a_j because each block gradient is a scalar
// multiple of the input vector.
inline double ntk_entry(const JacobianCoeffs& ci, const JacobianCoeffs& cj, double sij) {
    return sij * ci.node.cwiseProduct(cj.node).sum() + ci.leaf.cwiseProduct(cj.leaf).sum();
}

}  // namespace detail

// Empirical NTK over the rows of xs: H(i,j) = <J(xi), J(xj)> across all
// parameters. Coefficients are computed per sample (in parallel); entries are
// filled on the upper triangle in row-major order and mirrored.
inline KernelMatrix empirical_ntk(const TreeTopology& topo, const ScaledErf& f,
                                  const EnsembleParams& p, const Eigen::MatrixXd& xs) {
    const int n = static_cast<int>(xs.rows());
    if (n < 1) throw std::invalid_argument("empirical_ntk: empty sample set");
    std::vector<JacobianCoeffs> coeffs(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        coeffs[i] = jacobian_coeffs(topo, f, p, xs.row(i).transpose());
    });
    KernelMatrix k;
    k.values.resize(n, n);
    k.provenance = Provenance::empirical;
    k.trees = p.trees;
    k.input_ids = default_ids(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            k.values(i, j) = detail::ntk_entry(coeffs[i], coeffs[j], xs.row(i).dot(xs.row(j)));
            k.values(j, i) = k.values(i, j);
        }
    return k;
}

// Cross block of the empirical NTK, rows of xa against rows of xb. Streams
// the xb coefficients so large grids do not hold all Jacobians at once.
inline Eigen::MatrixXd empirical_ntk_cross(const TreeTopology& topo, const ScaledErf& f,
                                           const EnsembleParams& p, const Eigen::MatrixXd& xa,
                                           const Eigen::MatrixXd& xb) {
    const int na = static_cast<int>(xa.rows()), nb = static_cast<int>(xb.rows());
    std::vector<JacobianCoeffs> ca(na);
    for (int i = 0; i < na; ++i) ca[i] = jacobian_coeffs(topo, f, p, xa.row(i).transpose());
    Eigen::MatrixXd k(na, nb);
    parallel_for(static_cast<std::size_t>(nb), [&](std::size_t j) {
        const JacobianCoeffs cb = jacobian_coeffs(topo, f, p, xb.row(j).transpose());
        for (int i = 0; i < na; ++i)
            k(i, j) = detail::ntk_entry(ca[i], cb, xa.row(i).dot(xb.row(j)));
    });
    return k;
}

}  // namespace treetangent
