#include <doctest.h>

#include <random>

#include "phdae/generate.hpp"
#include "phdae/staircase.hpp"
#include "test_helpers.hpp"

using namespace phdae;
using namespace phdae_test;

TEST_CASE("validate_staircase passes on an RCL index-2 ladder") {
    LadderParams p = LadderParams::make(50, 1.0, 1.0, 1.0, 3);
    StaircaseSystem sys = generate_rcl_ladder(50, p, LadderVariant::Index12Like);
    CHECK(sys.n1 == 1);
    CHECK(sys.n4 == 1);
    CHECK(sys.n2 == 99);
    ValidationReport rep = validate_staircase(sys);
    CHECK(rep.valid());
}

TEST_CASE("validate_staircase reports an injected R indefiniteness") {
    StaircaseSystem sys = make_system(Category::Index1, 4);
    Mat r22 = dense(sys.R22);
    Eigen::SelfAdjointEigenSolver<Mat> es(r22);
    double shift = 2.0 * std::max(1e-3, es.eigenvalues().maxCoeff());
    sys.R22 = SpMat((r22 - shift * Mat::Identity(r22.rows(), r22.cols())).sparseView());
    ValidationReport rep = validate_staircase(sys);
    CHECK_FALSE(rep.valid());
    const CheckResult* psd = rep.find("R-psd");
    REQUIRE(psd != nullptr);
    CHECK_FALSE(psd->pass);
    CHECK(psd->violation > 0.0);
}

TEST_CASE("mismatched index-2 pairing is a structural error") {
    StaircaseSystem sys = make_system(Category::ProperIndex2, 1);
    sys.n4 = sys.n1 + 1;  // inconsistent with the stored blocks
    CHECK_THROWS_AS(validate_staircase(sys), StructuralError);
}

namespace {

StaircaseSystem dims_only(Index n1, Index n2, Index n3, Index n4, Index m = 1) {
    StaircaseSystem s;
    s.n1 = n1;
    s.n2 = n2;
    s.n3 = n3;
    s.n4 = n4;
    s.m = m;
    return s;
}

}  // namespace

TEST_CASE("differentiation index is a pure function of the block dims") {
    CHECK(differentiation_index(dims_only(0, 19999, 10005, 0)) == 1);
    CHECK(differentiation_index(dims_only(0, 5, 0, 0)) == 0);
    CHECK(differentiation_index(dims_only(1, 999, 501, 1)) == 2);
    CHECK(differentiation_index(dims_only(2, 10, 0, 2)) == 2);
}

TEST_CASE("operator blocks of a lossless system") {
    StaircaseSystem sys = make_system(Category::ProperIndex2, 7);
    // Strip all dissipation and coupling.
    auto zero_like = [](const SpMat& M) { return SpMat(M.rows(), M.cols()); };
    sys.R11 = zero_like(sys.R11);
    sys.R12 = zero_like(sys.R12);
    sys.R13 = zero_like(sys.R13);
    sys.R21 = zero_like(sys.R21);
    sys.R22 = zero_like(sys.R22);
    sys.R23 = zero_like(sys.R23);
    sys.R31 = zero_like(sys.R31);
    sys.R32 = zero_like(sys.R32);
    sys.R33 = zero_like(sys.R33);
    sys.P1 = zero_like(sys.P1);
    sys.P2 = zero_like(sys.P2);
    sys.P3 = zero_like(sys.P3);
    OperatorBlocks b = assemble_operator_blocks(sys);
    CHECK((dense(b.A22) - dense(sys.J22)).norm() == 0.0);
    CHECK((b.B2 - dense(sys.G2)).norm() == 0.0);
    CHECK((b.C2 - dense(sys.G2).transpose()).norm() == 0.0);
}

TEST_CASE("operator block identities on random systems") {
    for (unsigned seed : {1u, 2u, 3u}) {
        StaircaseSystem sys = make_system(Category::ImproperIndex12, seed);
        OperatorBlocks b = assemble_operator_blocks(sys);
        Mat A = dense(sys.A());
        Mat R = dense(sys.R());
        CHECK((A + A.transpose() + 2.0 * R).norm() <= 1e-12 * std::max(1.0, A.norm()));
        CHECK((b.C4 - dense(sys.G4).transpose()).norm() == 0.0);
        CHECK((b.B4 - dense(sys.G4)).norm() == 0.0);
        CHECK((dense(b.A14) + dense(b.A41).transpose()).norm() == 0.0);
    }
}

TEST_CASE("hamiltonian values and positivity") {
    StaircaseSystem sys = make_system(Category::ProperIndex12, 9);
    const Index n = sys.n();
    CHECK(hamiltonian(sys, Vec::Zero(n)) == 0.0);

    // Supported only on the algebraic blocks: E vanishes there.
    Vec x = Vec::Zero(n);
    for (Index i = sys.n1 + sys.n2; i < n; ++i) x(i) = 1.0 + double(i);
    CHECK(hamiltonian(sys, x) == 0.0);

    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    Mat E11 = dense(sys.E11), E22 = dense(sys.E22);
    for (int k = 0; k < 1000; ++k) {
        for (Index i = 0; i < n; ++i) x(i) = dist(rng);
        double h = hamiltonian(sys, x);
        CHECK(h >= 0.0);
        Vec x1 = x.head(sys.n1), x2 = x.segment(sys.n1, sys.n2);
        double ref = 0.5 * x1.dot(E11 * x1) + 0.5 * x2.dot(E22 * x2);
        CHECK(std::abs(h - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
    CHECK_THROWS_AS(hamiltonian(sys, Vec::Zero(n + 1)), StructuralError);
}

TEST_CASE("structure matrix is skew and dissipation PSD for every category") {
    for (Category cat : all_categories()) {
        StaircaseSystem sys = make_system(cat, 21);
        const Index n = sys.n(), m = sys.m;
        Mat Gamma = Mat::Zero(n + m, n + m);
        Gamma.topLeftCorner(n, n) = -dense(sys.J());
        Gamma.topRightCorner(n, m) = -dense(sys.G());
        Gamma.bottomLeftCorner(m, n) = dense(sys.G()).transpose();
        Gamma.bottomRightCorner(m, m) = 0.5 * (sys.N - sys.N.transpose());
        double gmax = std::max(1.0, Gamma.cwiseAbs().maxCoeff());
        CHECK((Gamma + Gamma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * gmax);

        Mat W = Mat::Zero(n + m, n + m);
        W.topLeftCorner(n, n) = dense(sys.R());
        W.topRightCorner(n, m) = dense(sys.P());
        W.bottomLeftCorner(m, n) = dense(sys.P()).transpose();
        W.bottomRightCorner(m, m) = 0.5 * (sys.S + sys.S.transpose());
        double wnorm = std::max(1.0, W.norm());
        CHECK(min_eig_sym_dense(0.5 * (W + W.transpose())) >= -1e-10 * wnorm);
        CHECK(min_eig_sym_dense(dense(sys.E11)) >= (sys.n1 > 0 ? 1e-12 : 0.0));
        CHECK(min_eig_sym_dense(dense(sys.E22)) > 0.0);
    }
}
