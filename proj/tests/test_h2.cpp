#include <doctest.h>

#include <algorithm>

#include "phdae/h2.hpp"
#include "phdae/rosenbrock.hpp"
#include "test_helpers.hpp"

using namespace phdae;
using namespace phdae_test;

TEST_CASE("reduced left eigentriples of a scalar pencil") {
    ReducedParts parts;
    parts.Er = Mat::Constant(1, 1, 2.0);
    parts.Jr = Mat::Zero(1, 1);
    parts.Rr = Mat::Constant(1, 1, 3.0);  // Jr - Rr = -3
    parts.Gr = Mat::Constant(1, 2, 1.0);
    parts.Pr = Mat::Zero(1, 2);
    parts.Sr = Mat::Zero(2, 2);
    parts.Nr = Mat::Zero(2, 2);
    parts.Dinf = Mat::Zero(2, 2);
    std::vector<EigenTriple> eigs = reduced_left_eigen(parts);
    REQUIRE(eigs.size() == 1);
    CHECK(std::abs(eigs[0].lambda - Complex(-1.5, 0.0)) <= 1e-14);
    // r = (Gr - Pr)^T t for whichever normalization of t was chosen.
    CVec want = (parts.Gr - parts.Pr).transpose().cast<Complex>() * eigs[0].t;
    CHECK((eigs[0].r - want).norm() <= 1e-14);
}

TEST_CASE("reduced spectra are conjugate-closed and stable") {
    for (Category cat : {Category::Index1, Category::ProperIndex12}) {
        StaircaseSystem sys = make_system(cat, 17);
        InterpolationData data = default_interpolation_data(6, sys.m);
        TangentialBasis basis = tangential_basis(sys, data);
        orthonormalize_v2(basis);
        ReducedParts parts = reduce(sys, basis.V2bar);
        std::vector<EigenTriple> eigs = reduced_left_eigen(parts);
        CHECK(Index(eigs.size()) == parts.r_proper());
        for (const EigenTriple& e : eigs) {
            CHECK(e.lambda.real() <= 1e-10);
            if (std::abs(e.lambda.imag()) > 1e-12) {
                auto match = std::find_if(
                    eigs.begin(), eigs.end(), [&](const EigenTriple& o) {
                        return std::abs(o.lambda - std::conj(e.lambda)) <
                               1e-8 * std::max(1.0, std::abs(e.lambda));
                    });
                CHECK(match != eigs.end());
            }
        }
    }
}

TEST_CASE("IRKA reaches a fixed point with mirrored-spectrum shifts") {
    for (unsigned seed : {61u, 62u, 63u}) {
        StaircaseSystem sys = make_system(Category::ProperIndex12, seed, 14, 4, 2, 2);
        InterpolationData init = default_interpolation_data(6, sys.m);
        IrkaOutput out = irka_ph(sys, init);
        INFO("seed ", seed, ", iterations ", out.history.size());
        CHECK(out.converged);
        CHECK(out.model.sys.n2 == out.parts.r_proper());
        CHECK(validate_staircase(out.model.sys).valid());

        // Fixed point: the final shifts are the mirrored eigenvalues of
        // the final reduced pencil.
        std::vector<EigenTriple> eigs = reduced_left_eigen(out.parts);
        std::vector<Complex> mirrored, shifts = out.final_data.shifts;
        for (const EigenTriple& e : eigs) mirrored.push_back(-e.lambda);
        auto key = [](const Complex& a, const Complex& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        };
        std::sort(mirrored.begin(), mirrored.end(), key);
        std::sort(shifts.begin(), shifts.end(), key);
        REQUIRE(mirrored.size() == shifts.size());
        double scale = 1.0;
        for (const Complex& s : shifts) scale = std::max(scale, std::abs(s));
        for (std::size_t i = 0; i < shifts.size(); ++i)
            CHECK(std::abs(mirrored[i] - shifts[i]) <= 1e-5 * scale);

        // Tangential interpolation holds at the converged shifts.
        double res = max_interp_residual(sys, out.model.sys,
                                         out.final_data.shifts,
                                         out.final_data.directions);
        CHECK(res <= 1e-6);
    }
}

TEST_CASE("residual matrix zeta") {
    StaircaseSystem sys = make_system(Category::ProperIndex12, 71, 12, 4, 2, 2);
    ProperSubsystem proper = extract_proper(sys);
    InterpolationData data = default_interpolation_data(6, sys.m);
    TangentialBasis basis = tangential_basis(sys, data);
    orthonormalize_v2(basis);
    ReducedParts parts = reduce(sys, basis.V2bar);

    SUBCASE("vanishes along the interpolation directions") {
        for (Index i = 0; i < data.size(); ++i) {
            CMat z = residual_zeta(proper, basis.V2bar, parts, data.shifts[i]);
            CHECK((z * data.directions[i]).norm() <=
                  1e-8 * std::max(1.0, z.norm()));
        }
    }

    SUBCASE("vanishes identically for the trivial projection") {
        Mat eye = Mat::Identity(sys.n2, sys.n2);
        ReducedParts full = reduce(sys, eye);
        CMat z = residual_zeta(proper, eye, full, Complex(0.4, 1.7));
        CHECK(z.norm() <= 1e-9 * std::max(1.0, proper.Bp.norm()));
    }

    SUBCASE("maps to the proper transfer error through the resolvent") {
        // Cp (mu Ep - Ap)^{-1} zeta(mu) = Hr_sp(mu) - H_sp(mu).
        Complex mu(0.3, 2.1);
        CMat z = residual_zeta(proper, basis.V2bar, parts, mu);
        CMat resolvent =
            (mu * proper.Ep.cast<Complex>() - proper.Ap.cast<Complex>())
                .partialPivLu()
                .solve(z);
        CMat lhs = proper.Cp.cast<Complex>() * resolvent;
        CMat hr = (parts.Gr + parts.Pr).transpose().cast<Complex>() *
                      (mu * parts.Er.cast<Complex>() -
                       (parts.Jr - parts.Rr).cast<Complex>())
                          .partialPivLu()
                          .solve((parts.Gr - parts.Pr).cast<Complex>()) +
                  (parts.Sr + parts.Nr).cast<Complex>();
        CMat h = proper_transfer_eval(proper, mu) -
                 mu * proper.Dinf.cast<Complex>();
        CHECK((lhs - (hr - h)).norm() <= 1e-9 * std::max(1.0, h.norm()));
    }
}

TEST_CASE("TRKSM greedy enrichment") {
    StaircaseSystem sys = make_system(Category::ImproperIndex12, 83, 16, 4, 2, 2);
    InterpolationData init = default_interpolation_data(2, sys.m);
    RegionSpec region = default_region(60);

    SUBCASE("terminates at the requested maximal order") {
        TrksmOutput out = trksm_ph(sys, init, 6, region);
        CHECK(out.parts.r_proper() <= 6);
        CHECK(validate_staircase(out.model.sys).valid());
        CHECK(!out.history.empty());
        for (const IterationRecord& rec : out.history)
            CHECK(rec.residual_max >= 0.0);
        double res = max_interp_residual(sys, out.model.sys,
                                         out.final_data.shifts,
                                         out.final_data.directions);
        CHECK(res <= 1e-8);
    }

    SUBCASE("enrichment shrinks the greedy residual") {
        TrksmOutput small = trksm_ph(sys, init, 4, region);
        TrksmOutput large = trksm_ph(sys, init, 12, region);
        CHECK(large.history.back().residual_max <=
              small.history.back().residual_max + 1e-12);
    }
}
