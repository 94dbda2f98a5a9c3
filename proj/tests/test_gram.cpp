#include <catch2/catch_amalgamated.hpp>

#include "treetangent/gram.hpp"
#include "treetangent/linearized.hpp"
#include "treetangent/rng.hpp"

using namespace treetangent;

TEST_CASE("gram of a single sample is the 1x1 diagonal") {
    const ScaledErf f(2.0);
    Eigen::MatrixXd xs(1, 3);
    xs << 0.6, 0.8, 0.0;
    const KernelMatrix k = gram(f, Architecture::pb(3), xs);
    REQUIRE(k.size() == 1);
    REQUIRE(k.values(0, 0) == pb_ntk(f, 3, xs.row(0).transpose(), xs.row(0).transpose()));
    REQUIRE(k.provenance == Provenance::analytic);
}

TEST_CASE("gram is exactly symmetric and permutation-equivariant") {
    const ScaledErf f(2.0);
    const Eigen::MatrixXd xs = random_unit_rows(CounterRng(21), 7, 4);
    const KernelMatrix k = gram(f, Architecture::dl(4), xs);
    REQUIRE((k.values - k.values.transpose()).cwiseAbs().maxCoeff() == 0.0);

    std::vector<int> perm = {3, 0, 6, 1, 5, 2, 4};
    Eigen::MatrixXd xp(7, 4);
    for (int i = 0; i < 7; ++i) xp.row(i) = xs.row(perm[i]);
    const KernelMatrix kp = gram(f, Architecture::dl(4), xp);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
            REQUIRE(kp.values(i, j) == k.values(perm[i], perm[j]));
}

TEST_CASE("analytic gram on distinct unit-norm inputs is positive definite") {
    const ScaledErf f(2.0);
    const Eigen::MatrixXd xs = random_unit_rows(CounterRng(5), 10, 4);
    const KernelMatrix k = gram(f, Architecture::pb(3), xs);
    const EigSym e = eig_sym(k);
    REQUIRE(e.eigenvalues[0] > 1e-10);
}

TEST_CASE("gram names the offending pair on entry failure") {
    const ScaledErf f(2.0);
    Eigen::MatrixXd xs(2, 2);
    xs << 1.0, 0.0, std::numeric_limits<double>::quiet_NaN(), 1.0;
    try {
        gram(f, Architecture::pb(2), xs);
        FAIL("expected numeric_error");
    } catch (const numeric_error& e) {
        REQUIRE(std::string(e.what()).find("(0,1)") != std::string::npos);
    }
}

TEST_CASE("gram_cross matches gram blocks") {
    const ScaledErf f(0.7);
    const Eigen::MatrixXd xs = random_unit_rows(CounterRng(31), 5, 3);
    const KernelMatrix k = gram(f, Architecture::dl_inf(), xs);
    const Eigen::MatrixXd cross = gram_cross(f, Architecture::dl_inf(), xs.topRows(2), xs);
    REQUIRE((cross - k.values.topRows(2)).cwiseAbs().maxCoeff() == 0.0);
}
