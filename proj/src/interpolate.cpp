#include "phdae/interpolate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseLU>
#include <Eigen/SVD>

namespace phdae {

namespace {

bool is_real_shift(Complex s) {
    return std::abs(s.imag()) <= 1e-14 * (1.0 + std::abs(s));
}

SpMat zeros(Index r, Index c) { return SpMat(r, c); }

SpMat sp_identity(Index n, double scale = 1.0) {
    SpMat I(n, n);
    I.setIdentity();
    if (scale != 1.0) I = SpMat(scale * I);
    return I;
}

}  // namespace

void InterpolationData::add(Complex sigma, const CVec& b) {
    shifts.push_back(sigma);
    directions.push_back(b);
}

void InterpolationData::add_closed(Complex sigma, const CVec& b) {
    add(sigma, b);
    if (!is_real_shift(sigma)) add(std::conj(sigma), b.conjugate());
}

void InterpolationData::validate(Index m) const {
    if (shifts.size() != directions.size())
        throw StructuralError("shift/direction count mismatch");
    const Index r = size();
    for (Index i = 0; i < r; ++i) {
        if (directions[i].size() != m)
            throw StructuralError("tangential direction has wrong length");
        for (Index j = i + 1; j < r; ++j)
            if (std::abs(shifts[i] - shifts[j]) <=
                1e-14 * (1.0 + std::abs(shifts[i])))
                throw StructuralError("interpolation shifts must be distinct");
    }
    for (Index i = 0; i < r; ++i) {
        if (is_real_shift(shifts[i])) {
            if (directions[i].imag().cwiseAbs().maxCoeff() >
                1e-12 * (1.0 + directions[i].norm()))
                throw StructuralError("real shift carries a complex direction");
            continue;
        }
        bool found = false;
        for (Index j = 0; j < r && !found; ++j) {
            if (j == i) continue;
            if (std::abs(shifts[j] - std::conj(shifts[i])) <=
                    1e-12 * (1.0 + std::abs(shifts[i])) &&
                (directions[j] - directions[i].conjugate()).norm() <=
                    1e-12 * (1.0 + directions[i].norm()))
                found = true;
        }
        if (!found)
            throw StructuralError("interpolation data is not closed under conjugation");
    }
}

InterpolationData default_interpolation_data(Index r, Index m, double omega_min,
                                             double omega_max) {
    InterpolationData data;
    if (r <= 0) return data;
    const Index npairs = r / 2;
    Index dir = 0;
    auto canonical = [&m, &dir]() {
        CVec b = CVec::Zero(m);
        b(dir % m) = 1.0;
        ++dir;
        return b;
    };
    for (Index k = 0; k < npairs; ++k) {
        double t = (npairs == 1) ? 0.5 : double(k) / double(npairs - 1);
        double w = omega_min * std::pow(omega_max / omega_min, t);
        data.add_closed(Complex(0.0, w), canonical());
    }
    if (r % 2 == 1) {
        // Odd order: one real shift at the geometric mean.
        data.add(Complex(std::sqrt(omega_min * omega_max), 0.0), canonical());
    }
    return data;
}

namespace {

// One shifted solve (sigma E - A) v = B b, complex or realified.
CVec shifted_solve(const SpMat& E, const SpMat& A, const CVec& rhs, Complex sigma,
                   ShiftedSolveMode mode) {
    const Index n = E.rows();
    if (mode == ShiftedSolveMode::Complex || is_real_shift(sigma)) {
        if (is_real_shift(sigma) && rhs.imag().isZero(0.0)) {
            SpMat M = SpMat(sigma.real() * E - A);
            M.makeCompressed();
            Eigen::SparseLU<SpMat> lu(M);
            if (lu.info() != Eigen::Success)
                throw NumericalError("shifted system is singular");
            return lu.solve(rhs.real()).cast<Complex>();
        }
        SpCMat M = SpCMat(sigma * E.cast<Complex>() - A.cast<Complex>());
        M.makeCompressed();
        Eigen::SparseLU<SpCMat> lu(M);
        if (lu.info() != Eigen::Success)
            throw NumericalError("shifted system is singular");
        return lu.solve(rhs);
    }
    // Equivalent 2n x 2n real block system
    //   [sr*E - A, -si*E; si*E, sr*E - A] [vr; vi] = [Re rhs; Im rhs].
    std::vector<Eigen::Triplet<double>> t;
    SpMat M11 = SpMat(sigma.real() * E - A);
    auto add = [&t](Index r0, Index c0, const SpMat& b, double s) {
        for (int k = 0; k < b.outerSize(); ++k)
            for (SpMat::InnerIterator it(b, k); it; ++it)
                t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
    };
    add(0, 0, M11, 1.0);
    add(0, n, E, -sigma.imag());
    add(n, 0, E, sigma.imag());
    add(n, n, M11, 1.0);
    SpMat M(2 * n, 2 * n);
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    Eigen::SparseLU<SpMat> lu(M);
    if (lu.info() != Eigen::Success)
        throw NumericalError("shifted system is singular");
    Vec stacked(2 * n);
    stacked << rhs.real(), rhs.imag();
    Vec sol = lu.solve(stacked);
    CVec v(n);
    v.real() = sol.head(n);
    v.imag() = sol.tail(n);
    return v;
}

}  // namespace

TangentialBasis tangential_basis(const StaircaseSystem& sys,
                                 const InterpolationData& data,
                                 const BasisOptions& opts) {
    sys.check_dims();
    data.validate(sys.m);
    const Index r = data.size();
    if (r == 0) throw StructuralError("empty interpolation data");

    SpMat E = sys.E(), A = sys.A(), B = sys.B();
    const Index n = sys.n();

    TangentialBasis basis;
    basis.n1 = sys.n1;
    basis.n2 = sys.n2;
    basis.n3 = sys.n3;
    basis.n4 = sys.n4;
    basis.V.resize(n, r);
    basis.Breal.resize(sys.m, r);

    std::vector<bool> done(r, false);
    Index col = 0;
    for (Index i = 0; i < r; ++i) {
        if (done[i]) continue;
        Complex sigma = data.shifts[i];
        CVec b = data.directions[i];
        if (!is_real_shift(sigma)) {
            // Process the pair at its upper-half-plane member.
            if (sigma.imag() < 0) {
                sigma = std::conj(sigma);
                b = b.conjugate();
            }
            for (Index j = 0; j < r; ++j)
                if (j != i && std::abs(data.shifts[j] - std::conj(sigma)) <=
                                  1e-12 * (1.0 + std::abs(sigma)))
                    done[j] = true;
        }
        done[i] = true;

        CVec rhs = B * b;
        CVec v;
        try {
            v = shifted_solve(E, A, rhs, sigma, opts.solve_mode);
        } catch (const NumericalError&) {
            std::ostringstream os;
            os << "shift " << sigma << " is (near) a generalized eigenvalue of (E, A)";
            throw NumericalError(os.str());
        }
        double res = ((sigma * (E.cast<Complex>() * v) - A.cast<Complex>() * v) - rhs).norm();
        double scale = std::max(rhs.norm(), 1e-300);
        if (!v.allFinite() || res > opts.residual_tol * scale) {
            std::ostringstream os;
            os << "shifted solve at sigma = " << sigma << " failed: relative residual "
               << res / scale;
            throw NumericalError(os.str());
        }

        if (is_real_shift(sigma)) {
            basis.V.col(col) = v.real();
            basis.Breal.col(col) = b.real();
            ++col;
        } else {
            basis.V.col(col) = v.real();
            basis.Breal.col(col) = b.real();
            basis.V.col(col + 1) = v.imag();
            basis.Breal.col(col + 1) = b.imag();
            col += 2;
        }
    }
    if (col != r) throw StructuralError("internal: basis column count mismatch");
    return basis;
}

void orthonormalize_v2(TangentialBasis& basis, double tol_cs) {
    const Index r = basis.V.cols();
    const Index n = basis.V.rows();
    if (r == 0) throw StructuralError("empty basis");

    // Equilibrate columns before orthonormalizing: shifted solves at widely
    // spread frequencies give columns of widely different magnitude, and the
    // retained subspace (hence the cosines) is scale-invariant while the
    // numerical accuracy of the factorization is not.
    Mat Vn = basis.V;
    Vec colscale(r);
    for (Index k = 0; k < r; ++k) {
        double nk = Vn.col(k).norm();
        colscale(k) = nk > 0.0 ? 1.0 / nk : 1.0;
        Vn.col(k) *= colscale(k);
    }
    Eigen::ColPivHouseholderQR<Mat> qr(Vn);
    Mat Rq = qr.matrixR().topRows(std::min(r, n)).triangularView<Eigen::Upper>();
    double rq_max = Rq.diagonal().cwiseAbs().maxCoeff();
    Index vrank = 0;
    for (Index k = 0; k < Rq.diagonal().size(); ++k)
        if (std::abs(Rq(k, k)) > 1e-13 * rq_max) ++vrank;
    if (vrank < r) basis.warnings.push_back("basis V is numerically rank-deficient");
    Mat Q = qr.householderQ() * Mat::Identity(n, vrank);

    Mat Q2 = Q.middleRows(basis.n1, basis.n2);
    if (basis.n2 == 0 || Q2.cwiseAbs().maxCoeff() <= 1e-14)
        throw NumericalError("basis has no proper (V2) content");

    Eigen::JacobiSVD<Mat> svd(Q2, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    Index kept = 0;
    for (Index k = 0; k < sv.size(); ++k)
        if (sv(k) > tol_cs * sv(0)) ++kept;
    if (kept == 0) throw NumericalError("V2 block has numerical rank zero");
    if (kept < r) {
        std::ostringstream os;
        os << "V2 block rank-deficient: keeping r' = " << kept << " of r = " << r;
        basis.warnings.push_back(os.str());
    }

    basis.V2bar = svd.matrixU().leftCols(kept);
    basis.cosines = sv.head(kept);
    // V2bar lies in the column span of the equilibrated V2 block, so the
    // least-squares combination matrix represents it exactly; undo the
    // column scaling to express it against the raw basis.
    Mat V2n = Vn.middleRows(basis.n1, basis.n2);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(V2n);
    Mat Tn = cod.solve(basis.V2bar);
    // One step of iterative refinement recovers the digits lost to the
    // conditioning of a nearly rank-deficient V2 block.
    Tn += cod.solve(Mat(basis.V2bar - V2n * Tn));
    basis.Tv = colscale.asDiagonal() * Tn;
}

ReductionMatrices reduction_matrices(const StaircaseSystem& sys, const Mat& V2bar) {
    return reduction_matrices(sys, V2bar, nullptr);
}

ReductionMatrices reduction_matrices(const StaircaseSystem& sys, const Mat& V2bar,
                                     const Mat* left_state_transform) {
    OperatorBlocks b = assemble_operator_blocks(sys);
    const Index n1 = b.n1, n2 = b.n2, n3 = b.n3, n4 = b.n4, m = b.m;
    const Index rp = V2bar.cols();
    const Index nt = n1 + n2 + n3 + n4 + m;
    if (V2bar.rows() != n2) throw StructuralError("V2bar has wrong row count");

    Mat XV2 = left_state_transform ? Mat(*left_state_transform * V2bar) : V2bar;

    ReductionMatrices wv;
    wv.We = Mat::Zero(nt, rp + m);
    wv.Ve = Mat::Zero(nt, rp + m);
    const Index o2 = n1, o3 = n1 + n2, o5 = n1 + n2 + n3 + n4;

    wv.We.block(o2, 0, n2, rp) = XV2;
    wv.Ve.block(o2, 0, n2, rp) = V2bar;
    wv.We.block(o5, rp, m, m) = Mat::Identity(m, m);
    wv.Ve.block(o5, rp, m, m) = Mat::Identity(m, m);

    if (n3 > 0) {
        SpMat A33T = SpMat(b.A33.transpose());
        A33T.makeCompressed();
        Eigen::SparseLU<SpMat> lu33t(A33T);
        if (lu33t.info() != Eigen::Success)
            throw NumericalError("A33 (= J33 - R33) is singular");
        // Evaluate sparse solves into temporaries: SparseLU cannot write
        // directly into a strided block expression.
        Mat sol23 = lu33t.solve(Mat(dense(b.A23).transpose() * XV2));
        wv.We.block(o3, 0, n3, rp) = -sol23;
        Mat c3t = b.C3.transpose();
        if (n4 > 0) {
            Eigen::PartialPivLU<Mat> lu14t(Mat(dense(b.A14).transpose()));
            Mat a14tc4t = lu14t.solve(b.C4.transpose());
            c3t -= dense(b.A13).transpose() * a14tc4t;
        }
        Mat sol3 = lu33t.solve(c3t);
        wv.We.block(o3, rp, n3, m) = sol3;
    }
    if (n4 > 0) {
        Eigen::PartialPivLU<Mat> lu14t(Mat(dense(b.A14).transpose()));
        wv.We.block(0, rp, n1, m) = lu14t.solve(b.C4.transpose());
        wv.Ve.block(0, rp, n1, m) = lu14t.solve(b.B4);
    }
    return wv;
}

ReducedParts reduce(const StaircaseSystem& sys, const Mat& V2bar) {
    return reduce(sys, reduction_matrices(sys, V2bar));
}

ReducedParts reduce(const StaircaseSystem& sys, const ReductionMatrices& wv) {
    const Index n = sys.n(), m = sys.m;
    const Index rp = wv.We.cols() - m;

    // Constant pencil coefficient Gamma + W = [-A, -B; C, D].
    Mat M0r;
    {
        Mat ve_top = wv.Ve.topRows(n);
        Mat ve_bot = wv.Ve.bottomRows(m);
        Mat prod_top = -(sys.A() * ve_top) - Mat(sys.B() * ve_bot);
        Mat prod_bot = sys.C() * ve_top + sys.D() * ve_bot;
        M0r = wv.We.topRows(n).transpose() * prod_top +
              wv.We.bottomRows(m).transpose() * prod_bot;
    }

    // s-coefficient blkdiag(E, 0).
    Mat M1r = wv.We.topRows(n).transpose() * (sys.E() * wv.Ve.topRows(n));

    ReducedParts parts;
    parts.Er = 0.5 * (M1r.topLeftCorner(rp, rp) + M1r.topLeftCorner(rp, rp).transpose());
    parts.Dinf = 0.5 * (M1r.bottomRightCorner(m, m) + M1r.bottomRightCorner(m, m).transpose());

    double scale1 = std::max(1.0, M1r.cwiseAbs().maxCoeff());
    double off = 0.0;
    if (rp > 0 && m > 0)
        off = std::max(M1r.topRightCorner(rp, m).cwiseAbs().maxCoeff(),
                       M1r.bottomLeftCorner(m, rp).cwiseAbs().maxCoeff());
    if (off > 1e-10 * scale1)
        throw NumericalError("reduced s-coefficient is not block-diagonal");

    Mat gamma = 0.5 * (M0r - M0r.transpose());
    Mat w = 0.5 * (M0r + M0r.transpose());
    parts.Jr = -gamma.topLeftCorner(rp, rp);
    parts.Gr = -gamma.topRightCorner(rp, m);
    parts.Nr = gamma.bottomRightCorner(m, m);
    parts.Rr = w.topLeftCorner(rp, rp);
    parts.Pr = w.topRightCorner(rp, m);
    parts.Sr = w.bottomRightCorner(m, m);

    // Structure of the reduced pencil is inherited; verify numerically.
    double scale_w = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (min_eig_sym_dense(w) < -1e-8 * scale_w)
        throw NumericalError("reduced dissipation matrix lost positive semi-definiteness");
    if (rp > 0 && min_eig_sym_dense(parts.Er) <= 0.0)
        throw NumericalError("reduced Er is not positive definite");
    return parts;
}

std::pair<Mat, Index> factor_dinf(const Mat& Dinf, double tol) {
    const Index m = Dinf.rows();
    if (Dinf.cols() != m) throw StructuralError("Dinf must be square");
    double scale = m > 0 ? Dinf.cwiseAbs().maxCoeff() : 0.0;
    if (m > 0 && (Dinf - Dinf.transpose()).cwiseAbs().maxCoeff() >
                     1e-10 * std::max(1.0, scale))
        throw StructuralError("Dinf is not symmetric");
    if (m == 0 || scale == 0.0) return {Mat::Zero(m, 0), 0};

    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Dinf + Dinf.transpose()));
    const Vec& ev = es.eigenvalues();  // ascending
    double lmax = ev(m - 1);
    Index q = 0;
    for (Index k = 0; k < m; ++k)
        if (ev(k) > tol * lmax) ++q;
    Mat Linf(m, q);
    Index c = 0;
    for (Index k = 0; k < m; ++k)
        if (ev(k) > tol * lmax) Linf.col(c++) = es.eigenvectors().col(k) * std::sqrt(ev(k));
    return {Linf, q};
}

ReducedModel assemble_rom(const ReducedParts& parts, const Mat& Linf, Index q) {
    const Index rp = parts.r_proper();
    const Index m = parts.Sr.rows();

    ReducedModel rom;
    rom.q = q;
    rom.r_proper = rp;

    StaircaseSystem& s = rom.sys;
    s.n1 = q;
    s.n2 = rp;
    s.n3 = 0;
    s.n4 = q;
    s.m = m;

    s.E11 = sp_identity(q);
    s.E22 = parts.Er.sparseView();
    s.J11 = zeros(q, q);
    s.J12 = zeros(q, rp);
    s.J13 = zeros(q, 0);
    s.J14 = sp_identity(q);
    s.J21 = zeros(rp, q);
    s.J22 = parts.Jr.sparseView();
    s.J23 = zeros(rp, 0);
    s.J31 = zeros(0, q);
    s.J32 = zeros(0, rp);
    s.J33 = zeros(0, 0);
    s.J41 = sp_identity(q, -1.0);
    s.R11 = zeros(q, q);
    s.R12 = zeros(q, rp);
    s.R13 = zeros(q, 0);
    s.R21 = zeros(rp, q);
    s.R22 = parts.Rr.sparseView();
    s.R23 = zeros(rp, 0);
    s.R31 = zeros(0, q);
    s.R32 = zeros(0, rp);
    s.R33 = zeros(0, 0);
    s.G1 = zeros(q, m);
    s.G2 = parts.Gr.sparseView();
    s.G3 = zeros(0, m);
    s.G4 = SpMat(Linf.transpose().sparseView());
    s.P1 = zeros(q, m);
    s.P2 = parts.Pr.sparseView();
    s.P3 = zeros(0, m);
    s.S = parts.Sr;
    s.N = parts.Nr;
    s.check_dims();
    return rom;
}

ReducedModel interpolate(const StaircaseSystem& sys, const InterpolationData& data,
                         const InterpolateOptions& opts) {
    TangentialBasis basis;
    try {
        basis = tangential_basis(sys, data, opts.basis);
        orthonormalize_v2(basis, opts.tol_cs);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("basis stage: ") + e.what());
    }

    ReducedParts parts;
    try {
        parts = reduce(sys, reduction_matrices(sys, basis.V2bar));
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("projection stage: ") + e.what());
    }

    auto [linf, q] = factor_dinf(parts.Dinf, opts.dinf_tol);
    ReducedModel rom = assemble_rom(parts, linf, q);
    rom.provenance.method = "fixed";
    rom.provenance.shifts = data.shifts;
    rom.provenance.directions = data.directions;
    return rom;
}

}  // namespace phdae
