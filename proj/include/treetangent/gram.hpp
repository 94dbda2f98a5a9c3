#pragma once

#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "treetangent/errors.hpp"
#include "treetangent/kernel.hpp"
#include "treetangent/parallel.hpp"

namespace treetangent {

enum class Provenance { analytic, empirical };

// Symmetric Gram matrix over a sample set, tagged with where it came from.
// trees is the ensemble size M for empirical kernels, 0 for analytic ones.
struct KernelMatrix {
    Eigen::MatrixXd values;
    Provenance provenance = Provenance::analytic;
    long trees = 0;
    std::vector<int> input_ids;

    int size() const { return static_cast<int>(values.rows()); }
};

inline std::vector<int> default_ids(int n) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return ids;
}

// Analytic Gram over the rows of xs. Entries of the upper triangle are
// computed in row-major order and mirrored, so equal inputs always reproduce
// the matrix bit-for-bit; rows are independent and evaluated in parallel.
inline KernelMatrix gram(const ScaledErf& f, const Architecture& arch, const Eigen::MatrixXd& xs) {
    const int n = static_cast<int>(xs.rows());
    if (n < 1) throw std::invalid_argument("gram: empty sample set");
    KernelMatrix k;
    k.values.resize(n, n);
    k.provenance = Provenance::analytic;
    k.input_ids = default_ids(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        for (int j = static_cast<int>(i); j < n; ++j) {
            try {
                k.values(i, j) = ntk_value(f, arch, xs.row(i).transpose(), xs.row(j).transpose());
            } catch (const std::exception& e) {
                throw numeric_error("gram entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    "): " + e.what());
            }
            k.values(j, i) = k.values(i, j);
        }
    });
    return k;
}

// Analytic cross-kernel block, rows of xa against rows of xb.
inline Eigen::MatrixXd gram_cross(const ScaledErf& f, const Architecture& arch,
                                  const Eigen::MatrixXd& xa, const Eigen::MatrixXd& xb) {
    Eigen::MatrixXd k(xa.rows(), xb.rows());
    parallel_for(static_cast<std::size_t>(xa.rows()), [&](std::size_t i) {
        for (Eigen::Index j = 0; j < xb.rows(); ++j) {
            try {
                k(i, j) = ntk_value(f, arch, xa.row(i).transpose(), xb.row(j).transpose());
            } catch (const std::exception& e) {
                throw numeric_error("gram_cross entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + "): " + e.what());
            }
        }
    });
    return k;
}

}  // namespace treetangent
