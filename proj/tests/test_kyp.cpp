#include <doctest.h>

#include "phdae/h2.hpp"
#include "phdae/kyp.hpp"
#include "phdae/rosenbrock.hpp"
#include "test_helpers.hpp"

using namespace phdae;
using namespace phdae_test;

TEST_CASE("behavioural observability") {
    StaircaseSystem sys = make_system(Category::Index1, 3, 10, 4, 0, 2);
    ProperSubsystem p = extract_proper(sys);
    CHECK(check_behavioural_observability(p));

    ProperSubsystem blind = p;
    blind.Cp.setZero();
    CHECK_FALSE(check_behavioural_observability(blind));

    ProperSubsystem empty;
    empty.Ep = Mat(0, 0);
    empty.Ap = Mat(0, 0);
    empty.Bp = Mat(0, 2);
    empty.Cp = Mat(2, 0);
    empty.Dp = Mat::Identity(2, 2);
    CHECK(check_behavioural_observability(empty));
}

TEST_CASE("KYP residual at the identity is the dissipation matrix") {
    StaircaseSystem sys = make_system(Category::ProperIndex12, 13, 10, 3, 2, 2);
    ProperSubsystem p = extract_proper(sys);
    const Index n2 = p.Ep.rows(), m = p.Dp.rows();
    KypResidual kr = kyp_residual(p, Mat::Identity(n2, n2));
    // -Ap^T - Ap = 2 Rp, Cp^T - Bp = 2 Pp, Dp + Dp^T = 2 sym(Sp).
    Mat want(n2 + m, n2 + m);
    want << 2.0 * p.Rp, 2.0 * p.Pp, 2.0 * p.Pp.transpose(),
        p.Sp + p.Sp.transpose();
    CHECK((kr.residual - want).norm() <= 1e-12 * std::max(1.0, want.norm()));
    CHECK(kr.min_eig >= -1e-10 * std::max(1.0, want.norm()));
    CHECK(kr.symmetry_defect <= 1e-12 * std::max(1.0, p.Ep.norm()));
}

TEST_CASE("scalar minimal solution matches a grid-search oracle") {
    // n2 = 1 proper system: Ep = e, Ap = -rho, Bp = g, Cp = g, Dp = d.
    ProperSubsystem p;
    p.Ep = Mat::Constant(1, 1, 2.0);
    p.Ap = Mat::Constant(1, 1, -0.8);
    p.Bp = Mat::Constant(1, 1, 1.3);
    p.Cp = Mat::Constant(1, 1, 1.3);
    p.Dp = Mat::Constant(1, 1, 1.5);
    p.Dinf = Mat::Zero(1, 1);
    KypSolution sol = minimal_kyp_solution(p);

    // Oracle: scan x over a fine grid and keep the smallest feasible
    // KYP point (2x2 residual PSD) with x * Ep > 0.
    double best = std::numeric_limits<double>::infinity();
    for (double x = 1e-4; x <= 2.0; x += 1e-6) {
        double a = -2.0 * p.Ap(0, 0) * x;
        double b = p.Cp(0, 0) - x * p.Bp(0, 0);
        double d = 2.0 * p.Dp(0, 0);
        if (a >= 0.0 && a * d - b * b >= 0.0) {
            best = x;
            break;  // grid is increasing: first feasible x is minimal
        }
    }
    REQUIRE(std::isfinite(best));
    CHECK(std::abs(sol.X(0, 0) - best) <= 1e-6 * std::max(1.0, best));
    CHECK(sol.X(0, 0) <= 1.0 + 1e-10);  // never above the identity solution
}

TEST_CASE("minimal Riccati solution on random proper systems") {
    for (unsigned seed : {91u, 92u, 93u}) {
        StaircaseSystem sys = make_system(Category::ProperIndex12, seed, 10, 3, 2, 2);
        ProperSubsystem p = extract_proper(sys);
        KypSolution sol = minimal_kyp_solution(p);
        const Index n2 = p.Ep.rows();

        Mat s2 = p.Dp + p.Dp.transpose();
        Mat c = p.Cp - p.Bp.transpose() * sol.X;
        Mat riccati = p.Ap.transpose() * sol.X + sol.X.transpose() * p.Ap +
                      c.transpose() * s2.partialPivLu().solve(c);
        double scale = std::max(1.0, 2.0 * p.Ap.norm() * sol.X.norm());
        CHECK(riccati.norm() <= 1e-8 * scale);
        CHECK(sol.riccati_residual <= 1e-8);

        KypResidual kr = kyp_residual(p, sol.X);
        CHECK(kr.min_eig >= -1e-8 * std::max(1.0, kr.residual.norm()));
        CHECK(sol.positivity_margin > 0.0);

        // Minimality relative to the identity solution: I - X_minus PSD.
        Mat gap = Mat::Identity(n2, n2) - sol.X;
        CHECK(min_eig_sym_dense(Mat(0.5 * (gap + gap.transpose()))) >=
              -1e-8 * std::max(1.0, sol.X.norm()));
    }
}

TEST_CASE("representation-changed reduction matrices") {
    StaircaseSystem sys = make_system(Category::ProperIndex12, 97, 14, 4, 2, 2);
    ProperSubsystem p = extract_proper(sys);
    InterpolationData data = default_interpolation_data(6, sys.m);
    TangentialBasis basis = tangential_basis(sys, data);
    orthonormalize_v2(basis);

    SUBCASE("X = I reproduces the standard pair") {
        Mat eye = Mat::Identity(sys.n2, sys.n2);
        ReductionMatrices a = reduction_matrices(sys, basis.V2bar);
        ReductionMatrices b = reduction_matrix_minus(sys, basis.V2bar, eye);
        CHECK((a.We - b.We).norm() <= 1e-14 * std::max(1.0, a.We.norm()));
        CHECK((a.Ve - b.Ve).norm() == 0.0);
    }

    SUBCASE("minimal X keeps interpolation and the feedthrough blocks") {
        KypSolution sol = minimal_kyp_solution(p);
        ReducedParts plain = reduce(sys, basis.V2bar);
        ReductionMatrices wv = reduction_matrix_minus(sys, basis.V2bar, sol.X);
        ReducedParts parts = reduce(sys, wv);
        CHECK((parts.Sr - plain.Sr).norm() <= 1e-12 * std::max(1.0, plain.Sr.norm()));
        CHECK((parts.Nr - plain.Nr).norm() <= 1e-12 * std::max(1.0, plain.Nr.norm()));
        CHECK((parts.Dinf - plain.Dinf).norm() <= 1e-12);

        auto linf = factor_dinf(parts.Dinf);
        ReducedModel rom = assemble_rom(parts, linf.first, linf.second);
        CHECK(validate_staircase(rom.sys).valid());
        CHECK(max_interp_residual(sys, rom.sys, data.shifts, data.directions) <=
              1e-8);
    }
}
