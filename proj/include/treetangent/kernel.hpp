#pragma once

#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "treetangent/errors.hpp"
#include "treetangent/scaled_erf.hpp"

namespace treetangent {

using VecRef = Eigen::Ref<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

// Leaf profile Q: depth -> number of leaves attached at that depth. The
// limiting NTK of an arbitrary tree depends on its topology only through Q.
class LeafProfile {
public:
    LeafProfile() = default;
    explicit LeafProfile(std::map<int, long> counts) : counts_(std::move(counts)) { validate(); }

    static LeafProfile perfect_binary(int depth) {
        require_depth(depth);
        if (depth > 62) throw std::invalid_argument("LeafProfile: 2^depth exceeds long");
        return LeafProfile(std::map<int, long>{{depth, 1L << depth}});
    }

    static LeafProfile decision_list(int depth) {
        require_depth(depth);
        std::map<int, long> q;
        for (int d = 1; d < depth; ++d) q[d] = 1;
        q[depth] = 2;
        return LeafProfile(std::move(q));
    }

    static LeafProfile rule(int depth) {
        require_depth(depth);
        return LeafProfile(std::map<int, long>{{depth, 1L}});
    }

    const std::map<int, long>& counts() const noexcept { return counts_; }
    int max_depth() const { return counts_.rbegin()->first; }
    long total_leaves() const {
        long t = 0;
        for (const auto& [d, q] : counts_) t += q;
        return t;
    }

    friend bool operator==(const LeafProfile& a, const LeafProfile& b) {
        // Zero-count entries are dropped on construction, so equality is plain
        // map equality and equal profiles evaluate bit-identically.
        return a.counts_ == b.counts_;
    }

private:
    static void require_depth(int d) {
        if (d < 1) throw std::invalid_argument("LeafProfile: depth must be >= 1");
    }

    void validate() {
        long positive = 0;
        for (auto it = counts_.begin(); it != counts_.end();) {
            if (it->first < 1) throw std::invalid_argument("LeafProfile: depths must be >= 1");
            if (it->second < 0) throw std::invalid_argument("LeafProfile: counts must be >= 0");
            if (it->second == 0) {
                it = counts_.erase(it);
                continue;
            }
            positive += it->second;
            ++it;
        }
        if (positive == 0)
            throw std::invalid_argument("LeafProfile: at least one positive count required");
    }

    std::map<int, long> counts_;
};

namespace detail {

inline void require_finite(VecRef xi, VecRef xj, const char* where) {
    if (!xi.allFinite() || !xj.allFinite())
        throw std::invalid_argument(std::string(where) + ": non-finite input vector");
}

}  // namespace detail

// T(xi, xj) = E[sigma(u.xi) sigma(u.xj)] over u ~ N(0, I), in closed form for
// the scaled error function. Lies in (0, 0.5) for distinct unit-norm inputs
// and approaches 0.5 from below as xi -> xj with large alpha.
inline double t_pair(const ScaledErf& f, VecRef xi, VecRef xj) {
    detail::require_finite(xi, xj, "t_pair");
    const double a2 = f.alpha() * f.alpha();
    const double sii = xi.dot(xi), sjj = xj.dot(xj), sij = xi.dot(xj);
    const double denom = std::sqrt((a2 * sii + 0.5) * (a2 * sjj + 0.5));
    double arg = a2 * sij / denom;
    // |arg| < 1 holds mathematically; drift beyond a 1e-9 relative window
    // means the pair is ill-conditioned rather than merely parallel.
    if (std::abs(arg) > 1.0) {
        if (std::abs(arg) > 1.0 + 1e-9)
            throw numeric_error("t_pair: arcsin argument " + std::to_string(arg) +
                                " outside [-1,1] beyond tolerance");
        arg = arg > 0.0 ? 1.0 : -1.0;
    }
    return std::asin(arg) / (2.0 * M_PI) + 0.25;
}

// Tdot(xi, xj) = E[sigma'(u.xi) sigma'(u.xj)]; strictly positive.
inline double tdot_pair(const ScaledErf& f, VecRef xi, VecRef xj) {
    detail::require_finite(xi, xj, "tdot_pair");
    const double a2 = f.alpha() * f.alpha();
    const double sii = xi.dot(xi), sjj = xj.dot(xj), sij = xi.dot(xj);
    const double radicand = (1.0 + 2.0 * a2 * sii) * (1.0 + 2.0 * a2 * sjj) - 4.0 * a2 * a2 * sij * sij;
    if (!(radicand > 0.0))
        throw numeric_error("tdot_pair: degenerate radicand " + std::to_string(radicand) +
                            " (ill-conditioned input pair)");
    return a2 / (M_PI * std::sqrt(radicand));
}

namespace detail {

inline void require_depth(int depth, const char* where) {
    if (depth < 1) throw std::invalid_argument(std::string(where) + ": depth must be >= 1");
}

struct PairStats {
    double sij, t, tdot;
};

inline PairStats pair_stats(const ScaledErf& f, VecRef xi, VecRef xj) {
    return {xi.dot(xj), t_pair(f, xi, xj), tdot_pair(f, xi, xj)};
}

}  // namespace detail

// Limiting NTK of an infinite ensemble of depth-D rules (left-only chains):
// D * Sigma * T^(D-1) * Tdot  +  T^D.
inline double rule_ntk(const ScaledErf& f, int depth, VecRef xi, VecRef xj) {
    detail::require_depth(depth, "rule_ntk");
    const auto s = detail::pair_stats(f, xi, xj);
    return depth * s.sij * std::pow(s.t, depth - 1) * s.tdot + std::pow(s.t, depth);
}

// Limiting NTK of depth-D perfect binary trees, 2^D * rule_ntk(D), evaluated
// as 2*D*Sigma*(2T)^(D-1)*Tdot + (2T)^D. With 2T in (0,1) the powers shrink,
// so the value stays representable for any depth.
inline double pb_ntk(const ScaledErf& f, int depth, VecRef xi, VecRef xj) {
    detail::require_depth(depth, "pb_ntk");
    const auto s = detail::pair_stats(f, xi, xj);
    const double t2 = 2.0 * s.t;
    return 2.0 * depth * s.sij * std::pow(t2, depth - 1) * s.tdot + std::pow(t2, depth);
}

// Limiting NTK of an arbitrary architecture: sum_d Q(d) * rule_ntk(d).
inline double arbitrary_ntk(const ScaledErf& f, const LeafProfile& q, VecRef xi, VecRef xj) {
    const auto s = detail::pair_stats(f, xi, xj);
    double acc = 0.0;
    for (const auto& [d, count] : q.counts()) {
        const double rule = d * s.sij * std::pow(s.t, d - 1) * s.tdot + std::pow(s.t, d);
        acc += static_cast<double>(count) * rule;
    }
    return acc;
}

// Limiting NTK of depth-D decision lists,
//   Sigma*Tdot*(sum_{d<=D} d T^(d-1) + D T^(D-1)) + sum_{d<=D} T^d + T^D,
// with both partial sums in closed form (T < 1/2 keeps them well away from
// the r=1 singularity).
inline double dl_ntk(const ScaledErf& f, int depth, VecRef xi, VecRef xj) {
    detail::require_depth(depth, "dl_ntk");
    const auto s = detail::pair_stats(f, xi, xj);
    const double t = s.t;
    const double td = std::pow(t, depth);
    const double one_minus = 1.0 - t;
    const double sum_d_t = (1.0 - (depth + 1) * td + depth * td * t) / (one_minus * one_minus);
    const double sum_t = t * (1.0 - td) / one_minus;
    const double node = s.sij * s.tdot * (sum_d_t + depth * std::pow(t, depth - 1));
    return node + sum_t + td;
}

// D -> infinity limit of dl_ntk: Sigma*Tdot/(1-T)^2 + T/(1-T). Finite (the
// kernel neither degenerates nor diverges) whenever T < 1.
inline double dl_ntk_inf(const ScaledErf& f, VecRef xi, VecRef xj) {
    const auto s = detail::pair_stats(f, xi, xj);
    if (s.t >= 1.0 - 1e-12)
        throw numeric_error("dl_ntk_inf: T = " + std::to_string(s.t) +
                            " makes the geometric series near-singular");
    const double one_minus = 1.0 - s.t;
    return s.sij * s.tdot / (one_minus * one_minus) + s.t / one_minus;
}

// Architecture selector shared by the Gram assembler, the experiments, and
// the CLI's --arch flag.
struct Architecture {
    enum class Kind { perfect_binary, decision_list, decision_list_inf, rule, profile };

    Kind kind = Kind::perfect_binary;
    int depth = 1;          // unused for decision_list_inf and profile
    LeafProfile profile;    // used only for Kind::profile

    static Architecture pb(int depth) { return {Kind::perfect_binary, depth, {}}; }
    static Architecture dl(int depth) { return {Kind::decision_list, depth, {}}; }
    static Architecture dl_inf() { return {Kind::decision_list_inf, 0, {}}; }
    static Architecture rule(int depth) { return {Kind::rule, depth, {}}; }
    static Architecture from_profile(LeafProfile q) {
        return {Kind::profile, q.max_depth(), std::move(q)};
    }

    std::string label() const {
        switch (kind) {
            case Kind::perfect_binary: return "pb-d" + std::to_string(depth);
            case Kind::decision_list: return "dl-d" + std::to_string(depth);
            case Kind::decision_list_inf: return "dl-inf";
            case Kind::rule: return "rule-d" + std::to_string(depth);
            case Kind::profile: {
                std::ostringstream os;
                os << "profile";
                for (const auto& [d, q] : profile.counts()) os << "-" << d << "x" << q;
                return os.str();
            }
        }
        return "?";
    }
};

inline double ntk_value(const ScaledErf& f, const Architecture& arch, VecRef xi, VecRef xj) {
    switch (arch.kind) {
        case Architecture::Kind::perfect_binary: return pb_ntk(f, arch.depth, xi, xj);
        case Architecture::Kind::decision_list: return dl_ntk(f, arch.depth, xi, xj);
        case Architecture::Kind::decision_list_inf: return dl_ntk_inf(f, xi, xj);
        case Architecture::Kind::rule: return rule_ntk(f, arch.depth, xi, xj);
        case Architecture::Kind::profile: return arbitrary_ntk(f, arch.profile, xi, xj);
    }
    throw std::logic_error("ntk_value: unreachable");
}

}  // namespace treetangent
