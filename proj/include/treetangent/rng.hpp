#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

namespace treetangent {

// Counter-based generator: value(i) is a pure function of (seed, i), so any
// parameter tensor can be filled in a documented order and reproduced exactly
// regardless of how the fill is scheduled.
//
// The stream is the splitmix64 output function applied to seed + (i+1)*phi,
// i.e. the i-th state of a splitmix64 run started at the (pre-mixed) seed.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(mix(seed ^ 0x5851f42d4c957f2dULL)) {}

    // Independent substream for a distinct purpose (params, data, folds, ...).
    CounterRng stream(std::uint64_t tag) const { return CounterRng(mix(seed_ + tag)); }

    std::uint64_t bits(std::uint64_t i) const {
        return mix(seed_ + (i + 1) * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform on [0, 1).
    double uniform(std::uint64_t i) const {
        return static_cast<double>(bits(i) >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes counters 2i and 2i+1.
    double normal(std::uint64_t i) const {
        const double u1 = (static_cast<double>(bits(2 * i) >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(bits(2 * i + 1) >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // n standard normals starting at counter `start` (counters start..start+n-1).
    Eigen::VectorXd normal_vector(std::uint64_t start, int n) const {
        Eigen::VectorXd v(n);
        for (int k = 0; k < n; ++k) v[k] = normal(start + static_cast<std::uint64_t>(k));
        return v;
    }

private:
    static std::uint64_t mix(std::uint64_t x) {
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return x;
    }

    std::uint64_t seed_;
};

// Substream tags used across the project; kept in one place so experiment
// reruns with the same top-level seed reproduce byte-identical outputs.
namespace rng_stream {
inline constexpr std::uint64_t params = 0x01;
inline constexpr std::uint64_t train_data = 0x02;
inline constexpr std::uint64_t probe_data = 0x03;
inline constexpr std::uint64_t targets = 0x04;
inline constexpr std::uint64_t folds = 0x05;
inline constexpr std::uint64_t test_pairs = 0x06;
inline constexpr std::uint64_t monte_carlo = 0x07;
}  // namespace rng_stream

// Rows drawn i.i.d. standard normal, then scaled to unit L2 norm.
inline Eigen::MatrixXd random_unit_rows(const CounterRng& rng, int rows, int cols) {
    Eigen::MatrixXd x(rows, cols);
    std::uint64_t c = 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) x(i, j) = rng.normal(c++);
    for (int i = 0; i < rows; ++i) x.row(i) /= x.row(i).norm();
    return x;
}

}  // namespace treetangent
