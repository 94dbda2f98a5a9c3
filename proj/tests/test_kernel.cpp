#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "treetangent/kernel.hpp"
#include "treetangent/rng.hpp"
#include "treetangent/topology.hpp"

#include "oracles.hpp"

using namespace treetangent;

namespace {

Eigen::VectorXd unit2(double beta) {
    Eigen::VectorXd v(2);
    v << std::cos(beta), std::sin(beta);
    return v;
}

Eigen::VectorXd random_unit(const CounterRng& rng, std::uint64_t base, int f) {
    Eigen::VectorXd v = rng.normal_vector(base, f);
    return v / v.norm();
}

}  // namespace

TEST_CASE("t_pair closed-form anchor values") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0), e1 = unit2(M_PI / 2);

    SECTION("orthogonal unit vectors give 1/4") {
        REQUIRE(t_pair(f, e0, e1) == 0.25);
    }
    SECTION("identical unit vectors, alpha=2") {
        const double expected = std::asin(4.0 / 4.5) / (2 * M_PI) + 0.25;
        REQUIRE(t_pair(f, e0, e0) == Catch::Approx(expected).margin(1e-15));
        REQUIRE(t_pair(f, e0, e0) < 0.5);
    }
    SECTION("antipodal pair mirrors the diagonal value") {
        const Eigen::VectorXd neg = -e0;
        REQUIRE(t_pair(f, e0, neg) ==
                Catch::Approx(0.5 - t_pair(f, e0, e0)).margin(1e-15));
    }
    SECTION("non-finite input is rejected") {
        Eigen::VectorXd bad = e0;
        bad[0] = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_AS(t_pair(f, bad, e1), std::invalid_argument);
    }
}

TEST_CASE("tdot_pair closed-form anchor values") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0), e1 = unit2(M_PI / 2);
    REQUIRE(tdot_pair(f, e0, e1) == Catch::Approx(4.0 / (9.0 * M_PI)).margin(1e-15));
    REQUIRE(tdot_pair(f, e0, e0) == Catch::Approx(4.0 / (M_PI * std::sqrt(17.0))).margin(1e-15));
}

TEST_CASE("T range and Tdot positivity on random unit pairs") {
    const CounterRng rng(3);
    for (double alpha : {0.5, 2.0, 8.0}) {
        const ScaledErf f(alpha);
        for (int k = 0; k < 20; ++k) {
            const auto xi = random_unit(rng, 100 * k, 4);
            const auto xj = random_unit(rng, 100 * k + 50, 4);
            const double t = t_pair(f, xi, xj);
            REQUIRE(t > 0.0);
            REQUIRE(t < 0.5);
            REQUIRE(tdot_pair(f, xi, xj) > 0.0);
            REQUIRE(t_pair(f, xi, xj) == t_pair(f, xj, xi));
        }
    }
}

TEST_CASE("Monte-Carlo agreement for T and Tdot (light run)") {
    const CounterRng rng(5);
    const long samples = 100000;
    for (double alpha : {0.5, 8.0}) {
        const ScaledErf f(alpha);
        for (int k = 0; k < 3; ++k) {
            const auto xi = random_unit(rng, 1000 * k, 3);
            const auto xj = random_unit(rng, 1000 * k + 500, 3);
            const auto t_est = oracles::mc_t_pair(f, xi, xj, samples, 77 + k);
            REQUIRE(std::abs(t_pair(f, xi, xj) - t_est.mean) < 3 * t_est.se);
            const auto td_est = oracles::mc_tdot_pair(f, xi, xj, samples, 177 + k);
            REQUIRE(std::abs(tdot_pair(f, xi, xj) - td_est.mean) < 3 * td_est.se);
        }
    }
}

TEST_CASE("rule kernel: depth one and the orthogonal collapse") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0), e1 = unit2(M_PI / 2);
    const double t = t_pair(f, e0, e1), td = tdot_pair(f, e0, e1);

    REQUIRE(rule_ntk(f, 1, e0, e1) == Catch::Approx(e0.dot(e1) * td + t).margin(1e-15));
    // Orthogonal inputs kill the node term; only T^D survives.
    REQUIRE(rule_ntk(f, 3, e0, e1) == Catch::Approx(0.015625).margin(1e-15));
    REQUIRE_THROWS_AS(rule_ntk(f, 0, e0, e1), std::invalid_argument);
}

TEST_CASE("perfect-binary kernel equals 2^D times the rule kernel") {
    const CounterRng rng(9);
    for (double alpha : {0.5, 2.0, 8.0}) {
        const ScaledErf f(alpha);
        for (int k = 0; k < 10; ++k) {
            const auto xi = random_unit(rng, 100 * k, 3);
            const auto xj = random_unit(rng, 100 * k + 50, 3);
            for (int d = 1; d <= 10; ++d) {
                const double pb = pb_ntk(f, d, xi, xj);
                const double scaled = std::ldexp(rule_ntk(f, d, xi, xj), d);
                REQUIRE(pb == Catch::Approx(scaled).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("pb depth one matches the explicit formula") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd xi = unit2(0.3), xj = unit2(1.1);
    const double expected =
        2.0 * (xi.dot(xj) * tdot_pair(f, xi, xj) + t_pair(f, xi, xj));
    REQUIRE(pb_ntk(f, 1, xi, xj) == Catch::Approx(expected).margin(1e-15));
}

TEST_CASE("arbitrary kernel: explicit profile and pb/rule reductions") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd xi = unit2(0.2), xj = unit2(2.0);

    SECTION("Q(2)=2, Q(3)=4 expands to weighted rules") {
        const LeafProfile q(std::map<int, long>{{1, 0}, {2, 2}, {3, 4}});
        const double expected = 2 * rule_ntk(f, 2, xi, xj) + 4 * rule_ntk(f, 3, xi, xj);
        REQUIRE(arbitrary_ntk(f, q, xi, xj) == Catch::Approx(expected).margin(1e-15));
    }
    SECTION("perfect-binary profile reproduces pb_ntk") {
        for (int d = 1; d <= 10; ++d) {
            const double viaprofile = arbitrary_ntk(f, LeafProfile::perfect_binary(d), xi, xj);
            REQUIRE(viaprofile == Catch::Approx(pb_ntk(f, d, xi, xj)).epsilon(1e-12));
        }
    }
    SECTION("equal profiles from non-isomorphic topologies give bit-identical values") {
        const auto [a, b] = TreeTopology::equal_profile_pair();
        const LeafProfile qa = profile_of(a), qb = profile_of(b);
        REQUIRE(qa == qb);
        const double va = arbitrary_ntk(f, qa, xi, xj);
        const double vb = arbitrary_ntk(f, qb, xi, xj);
        REQUIRE(va == vb);  // exact: same profile, same evaluation order
    }
}

TEST_CASE("decision-list kernel identities") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd xi = unit2(0.4), xj = unit2(1.7);

    SECTION("depth one is twice the depth-one rule") {
        REQUIRE(dl_ntk(f, 1, xi, xj) ==
                Catch::Approx(2 * rule_ntk(f, 1, xi, xj)).epsilon(1e-13));
    }
    SECTION("matches the decision-list leaf profile") {
        for (int d : {2, 3, 5, 8, 13, 21, 32}) {
            const double via_profile = arbitrary_ntk(f, LeafProfile::decision_list(d), xi, xj);
            REQUIRE(dl_ntk(f, d, xi, xj) == Catch::Approx(via_profile).epsilon(1e-12));
        }
    }
    SECTION("matches the brute-force partial sums") {
        for (int d : {1, 2, 7, 40, 200}) {
            REQUIRE(dl_ntk(f, d, xi, xj) ==
                    Catch::Approx(oracles::dl_ntk_series(f, d, xi, xj)).epsilon(1e-12));
        }
    }
    SECTION("rule series is monotone and sums to the infinite-depth limit") {
        // dl_ntk itself carries an extra rule(D) term (the doubled final
        // leaf), so it approaches the limit from above; the clean monotone
        // object is the partial series sum_{d<=D} rule(d).
        REQUIRE(xi.dot(xj) > 0.0);  // rule terms are non-negative here
        const double inf = dl_ntk_inf(f, xi, xj);
        double series = 0.0;
        for (int d = 1; d <= 64; ++d) {
            const double prev = series;
            series += rule_ntk(f, d, xi, xj);
            REQUIRE(series >= prev);
            REQUIRE(series <= inf * (1 + 1e-12));
        }
        REQUIRE(dl_ntk(f, 64, xi, xj) ==
                Catch::Approx(series + rule_ntk(f, 64, xi, xj)).epsilon(1e-12));
    }
    SECTION("gap to the infinite limit shrinks as depth doubles") {
        const double inf = dl_ntk_inf(f, xi, xj);
        double prev_gap = std::numeric_limits<double>::infinity();
        for (int d = 8; d <= 128; d *= 2) {
            const double gap = std::abs(dl_ntk(f, d, xi, xj) - inf);
            REQUIRE(gap < prev_gap);
            prev_gap = gap;
        }
    }
    SECTION("deep lists reach the infinite-depth limit") {
        REQUIRE(std::abs(dl_ntk(f, 10000, xi, xj) - dl_ntk_inf(f, xi, xj)) < 1e-8);
    }
}

TEST_CASE("infinite decision list") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0), e1 = unit2(M_PI / 2);

    SECTION("orthogonal inputs: node term dies, leaves give 1/3") {
        REQUIRE(dl_ntk_inf(f, e0, e1) == Catch::Approx(1.0 / 3.0).margin(1e-15));
    }
    SECTION("agrees with a 10^6-term truncation") {
        const Eigen::VectorXd xi = unit2(0.3), xj = unit2(1.2);
        REQUIRE(std::abs(dl_ntk_inf(f, xi, xj) - oracles::dl_ntk_series(f, 1000000, xi, xj)) <
                1e-10);
    }
    SECTION("stays away from zero at beta = pi/2") {
        const double norm = dl_ntk_inf(f, e0, e1) / dl_ntk_inf(f, e0, e0);
        REQUIRE(norm > 0.05);
    }
}

TEST_CASE("degeneracy: pb collapses with depth, dl does not") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0), e1 = unit2(M_PI / 2);

    double prev_pb = 1.0;
    for (int d = 2; d <= 128; d *= 2) {
        const double pb_norm = pb_ntk(f, d, e0, e1) / pb_ntk(f, d, e0, e0);
        REQUIRE(pb_norm < prev_pb);
        prev_pb = pb_norm;
    }
    REQUIRE(prev_pb < 0.05);

    const double dl_inf_norm = dl_ntk_inf(f, e0, e1) / dl_ntk_inf(f, e0, e0);
    for (int d = 2; d <= 128; d *= 2) {
        const double dl_norm = dl_ntk(f, d, e0, e1) / dl_ntk(f, d, e0, e0);
        if (d == 128) REQUIRE(std::abs(dl_norm - dl_inf_norm) < 1e-3);
    }
    REQUIRE(dl_inf_norm > 0.05);
}

TEST_CASE("degeneracy monotone across the beta range") {
    const ScaledErf f(2.0);
    const Eigen::VectorXd e0 = unit2(0.0);
    for (double beta : {0.4, M_PI / 2, 2.4, 3.0}) {
        const Eigen::VectorXd xj = unit2(beta);
        double prev = std::numeric_limits<double>::infinity();
        for (int d = 2; d <= 128; d *= 2) {
            const double norm = pb_ntk(f, d, e0, xj) / pb_ntk(f, d, e0, e0);
            REQUIRE(norm <= prev + 1e-15);
            prev = norm;
        }
    }
}

TEST_CASE("leaf profile validation") {
    REQUIRE_THROWS_AS(LeafProfile(std::map<int, long>{}), std::invalid_argument);
    REQUIRE_THROWS_AS(LeafProfile(std::map<int, long>{{2, 0}}), std::invalid_argument);
    REQUIRE_THROWS_AS(LeafProfile(std::map<int, long>{{0, 3}}), std::invalid_argument);
    REQUIRE_THROWS_AS(LeafProfile(std::map<int, long>{{2, -1}}), std::invalid_argument);
    const LeafProfile q(std::map<int, long>{{1, 0}, {3, 2}});
    REQUIRE(q == LeafProfile(std::map<int, long>{{3, 2}}));
    REQUIRE(q.max_depth() == 3);
    REQUIRE(q.total_leaves() == 2);
}
