#pragma once

// Test-only oracles, kept independent of the implementation paths they check:
// a series-based erf, Monte-Carlo estimators for the T/Tdot expectations,
// central finite differences for the Jacobian, and brute-force partial sums
// for the decision-list kernels.

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

#include "treetangent/ensemble.hpp"
#include "treetangent/kernel.hpp"
#include "treetangent/parallel.hpp"
#include "treetangent/rng.hpp"
#include "treetangent/scaled_erf.hpp"
#include "treetangent/topology.hpp"

namespace oracles {

// erf via its Maclaurin series in long double; converges fast for |x| <= 6,
// which covers every input the tests feed it.
inline long double erf_series(long double x) {
    if (std::abs(x) > 6.0L) throw std::invalid_argument("erf_series: |x| too large for series");
    const long double x2 = x * x;
    long double term = x, sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x2 / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-25L * std::abs(sum)) break;
    }
    return sum * 2.0L / std::sqrt(M_PIl);
}

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

// Sample-mean estimate of E[g(u.xi, u.xj)] over u ~ N(0, I_F).
template <class G>
McEstimate mc_expectation(const treetangent::CounterRng& rng, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd& xj, long samples, G&& g) {
    const int f = static_cast<int>(xi.size());
    // Chunked so the accumulation order is fixed regardless of threading.
    const long chunk = 4096;
    const long n_chunks = (samples + chunk - 1) / chunk;
    std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);
    treetangent::parallel_for(static_cast<std::size_t>(n_chunks), [&](std::size_t ci) {
        double s = 0.0, s2 = 0.0;
        const long lo = static_cast<long>(ci) * chunk;
        const long hi = std::min(samples, lo + chunk);
        Eigen::VectorXd u(f);
        for (long k = lo; k < hi; ++k) {
            for (int d = 0; d < f; ++d)
                u[d] = rng.normal(static_cast<std::uint64_t>(k) * f + d);
            const double v = g(u.dot(xi), u.dot(xj));
            s += v;
            s2 += v * v;
        }
        sums[ci] = s;
        sqs[ci] = s2;
    });
    double sum = 0.0, sq = 0.0;
    for (long ci = 0; ci < n_chunks; ++ci) {
        sum += sums[ci];
        sq += sqs[ci];
    }
    McEstimate e;
    e.mean = sum / samples;
    const double var = (sq - samples * e.mean * e.mean) / (samples - 1);
    e.se = std::sqrt(var / samples);
    return e;
}

inline McEstimate mc_t_pair(const treetangent::ScaledErf& f, const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& xj, long samples, std::uint64_t seed) {
    const auto rng = treetangent::CounterRng(seed).stream(treetangent::rng_stream::monte_carlo);
    return mc_expectation(rng, xi, xj, samples,
                          [&](double pi, double pj) { return f.value(pi) * f.value(pj); });
}

inline McEstimate mc_tdot_pair(const treetangent::ScaledErf& f, const Eigen::VectorXd& xi,
                               const Eigen::VectorXd& xj, long samples, std::uint64_t seed) {
    const auto rng = treetangent::CounterRng(seed).stream(treetangent::rng_stream::monte_carlo);
    return mc_expectation(rng, xi, xj, samples,
                          [&](double pi, double pj) { return f.deriv(pi) * f.deriv(pj); });
}

// Central finite differences of forward() over the flat parameter vector.
inline Eigen::VectorXd fd_jacobian(const treetangent::TreeTopology& topo,
                                   const treetangent::ScaledErf& f,
                                   const treetangent::EnsembleParams& params,
                                   const Eigen::VectorXd& x, double h) {
    using treetangent::forward;
    treetangent::EnsembleParams p = params;
    const int n = topo.n_nodes(), l = topo.n_leaves(), fdim = p.features;
    const long total = p.parameter_count(topo);
    Eigen::VectorXd grad(total);
    long pos = 0;
    auto probe = [&](double& slot) {
        const double saved = slot;
        slot = saved + h;
        const double up = forward(topo, f, p, x);
        slot = saved - h;
        const double down = forward(topo, f, p, x);
        slot = saved;
        grad[pos++] = (up - down) / (2.0 * h);
    };
    for (int m = 0; m < p.trees; ++m) {
        for (int node = 0; node < n; ++node)
            for (int d = 0; d < fdim; ++d) probe(p.w[m](d, node));
        for (int leaf = 0; leaf < l; ++leaf) probe(p.pi[m](leaf));
    }
    return grad;
}

// Literal partial sums of the decision-list kernel: the brute-force route the
// closed forms are checked against.
inline double dl_ntk_series(const treetangent::ScaledErf& f, long depth, const Eigen::VectorXd& xi,
                            const Eigen::VectorXd& xj) {
    const double sij = xi.dot(xj);
    const double t = treetangent::t_pair(f, xi, xj);
    const double td = treetangent::tdot_pair(f, xi, xj);
    double sum_d_t = 0.0, sum_t = 0.0, t_pow = 1.0;  // t_pow = t^(d-1)
    for (long d = 1; d <= depth; ++d) {
        sum_d_t += d * t_pow;
        sum_t += t_pow * t;
        t_pow *= t;
    }
    const double t_dm1 = std::pow(t, depth - 1);
    return sij * td * (sum_d_t + depth * t_dm1) + sum_t + t_dm1 * t;
}

}  // namespace oracles
