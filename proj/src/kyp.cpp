#include "phdae/kyp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "phdae/lyapunov.hpp"

namespace phdae {

bool check_behavioural_observability(const ProperSubsystem& p, double rank_tol) {
    const Index n2 = p.Ap.rows();
    const Index m = p.Cp.rows();
    if (n2 == 0) return true;
    Eigen::GeneralizedEigenSolver<Mat> ges;
    ges.compute(p.Ap, p.Ep, false);
    if (ges.info() != Eigen::Success)
        throw NumericalError("check_behavioural_observability: eigen solver failed");
    for (Index i = 0; i < n2; ++i) {
        if (ges.betas()(i) == 0.0) continue;  // infinite eigenvalue
        Complex s = ges.eigenvalues()(i);
        CMat M(n2 + m, n2);
        M.topRows(n2) = s * p.Ep.cast<Complex>() - p.Ap.cast<Complex>();
        M.bottomRows(m) = p.Cp.cast<Complex>();
        Eigen::BDCSVD<CMat> svd(M);
        const auto& sv = svd.singularValues();
        if (sv(sv.size() - 1) <= rank_tol * sv(0)) return false;
    }
    return true;
}

KypResidual kyp_residual(const ProperSubsystem& p, const Mat& X) {
    const Index n2 = p.Ap.rows();
    const Index m = p.Cp.rows();
    if (X.rows() != n2 || X.cols() != n2)
        throw StructuralError("kyp_residual: X must be n2 x n2");
    KypResidual kr;
    kr.residual = Mat::Zero(n2 + m, n2 + m);
    kr.residual.topLeftCorner(n2, n2) =
        -p.Ap.transpose() * X - X.transpose() * p.Ap;
    kr.residual.topRightCorner(n2, m) = p.Cp.transpose() - X.transpose() * p.Bp;
    kr.residual.bottomLeftCorner(m, n2) = p.Cp - p.Bp.transpose() * X;
    kr.residual.bottomRightCorner(m, m) = p.Dp + p.Dp.transpose();
    Mat sym = 0.5 * (kr.residual + kr.residual.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym);
    kr.min_eig = es.eigenvalues().size() > 0 ? es.eigenvalues()(0) : 0.0;
    kr.symmetry_defect = (X.transpose() * p.Ep - p.Ep.transpose() * X).norm();
    return kr;
}

namespace {

struct TildeSystem {
    Mat A, B, C, Sinv;
    Eigen::LLT<Mat> llt;  // Ep = L L^T
    double scale = 1.0;   // residual normalization
};

Mat riccati_residual_tilde(const TildeSystem& t, const Mat& X) {
    Mat K = t.C - t.B.transpose() * X;
    return t.A.transpose() * X + X * t.A + K.transpose() * t.Sinv * K;
}

// Stable invariant subspace of the Hamiltonian matrix associated with
// the positive-real Riccati equation; returns the stabilizing (hence
// minimal) symmetric solution in the transformed frame.
Mat hamiltonian_solution(const TildeSystem& t) {
    const Index n = t.A.rows();
    Mat Abar = t.A - t.B * t.Sinv * t.C;
    Mat G = t.B * t.Sinv * t.B.transpose();
    Mat Q = t.C.transpose() * t.Sinv * t.C;
    Mat H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Abar;
    H.topRightCorner(n, n) = G;
    H.bottomLeftCorner(n, n) = -Q;
    H.bottomRightCorner(n, n) = -Abar.transpose();
    Eigen::EigenSolver<Mat> es(H);
    if (es.info() != Eigen::Success)
        throw NumericalError("minimal_kyp_solution: Hamiltonian eigen solver failed");
    std::vector<Index> stable;
    for (Index i = 0; i < 2 * n; ++i)
        if (es.eigenvalues()(i).real() < 0) stable.push_back(i);
    if (static_cast<Index>(stable.size()) != n)
        throw NumericalError(
            "minimal_kyp_solution: Hamiltonian spectrum not dichotomic");
    CMat U1(n, n), U2(n, n);
    for (Index k = 0; k < n; ++k) {
        U1.col(k) = es.eigenvectors().col(stable[k]).head(n);
        U2.col(k) = es.eigenvectors().col(stable[k]).tail(n);
    }
    Eigen::FullPivLU<CMat> lu(U1);
    if (!lu.isInvertible())
        throw NumericalError("minimal_kyp_solution: invariant subspace ill-conditioned");
    Mat X = (U2 * lu.inverse()).real();
    X = 0.5 * (X + Mat(X.transpose()));
    if (riccati_residual_tilde(t, X).norm() > 1e-6 * t.scale)
        throw NumericalError("minimal_kyp_solution: Hamiltonian solution inaccurate");
    return X;
}

}  // namespace

KypSolution minimal_kyp_solution(const ProperSubsystem& p, const KypOptions& opts) {
    const Index n2 = p.Ap.rows();
    const Index m = p.Cp.rows();
    // A non-positive rank tolerance skips the observability guard; large
    // chain models can be structurally observable while their Hautus
    // margins fall below any representable tolerance.
    if (opts.rank_tol > 0 && !check_behavioural_observability(p, opts.rank_tol))
        throw NumericalError(
            "minimal_kyp_solution: system is not behaviourally observable");
    Mat S = p.Dp + p.Dp.transpose();
    {
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        double lo = es.eigenvalues()(0), hi = es.eigenvalues()(m - 1);
        if (!(lo > 1e-12 * std::max(1.0, hi)))
            throw NumericalError(
                "minimal_kyp_solution: Dp + Dp^T is singular (unsupported case)");
    }
    KypSolution sol;
    sol.kind = "minimal";
    if (n2 == 0) {
        sol.X = Mat(0, 0);
        return sol;
    }

    TildeSystem t;
    t.llt.compute(p.Ep);
    if (t.llt.info() != Eigen::Success)
        throw NumericalError("minimal_kyp_solution: Ep not positive definite");
    t.A = t.llt.matrixL().solve(p.Ap);
    t.A = t.llt.matrixL().solve(Mat(t.A.transpose())).transpose();
    t.B = t.llt.matrixL().solve(p.Bp);
    t.C = t.llt.matrixL().solve(Mat(p.Cp.transpose())).transpose();
    t.Sinv = S.inverse();
    t.scale = std::max(1.0, t.C.norm() * t.C.norm());

    // Newton iteration from the always-feasible identity.
    Mat X = Mat::Identity(n2, n2);
    bool newton_ok = false;
    try {
        double prev = riccati_residual_tilde(t, X).norm();
        for (int k = 0; k < opts.max_newton; ++k) {
            Mat F = riccati_residual_tilde(t, X);
            double fn = F.norm();
            if (fn <= opts.riccati_tol * t.scale) {
                newton_ok = true;
                break;
            }
            if (fn > 10.0 * prev + opts.riccati_tol * t.scale) break;  // diverging
            prev = fn;
            Mat Ax = t.A - t.B * t.Sinv * (t.C - t.B.transpose() * X);
            Mat delta = solve_lyapunov(Mat(Ax.transpose()), F);
            X += delta;
            X = 0.5 * (X + Mat(X.transpose()));
        }
        if (!newton_ok &&
            riccati_residual_tilde(t, X).norm() <= opts.riccati_tol * t.scale)
            newton_ok = true;
    } catch (const NumericalError&) {
        newton_ok = false;
    }
    if (!newton_ok) X = hamiltonian_solution(t);

    if (opts.cross_check && n2 <= 60) {
        Mat Xh = hamiltonian_solution(t);
        if ((X - Xh).norm() > 1e-6 * (1.0 + Xh.norm())) X = Xh;
    }

    sol.riccati_residual = riccati_residual_tilde(t, X).norm() / t.scale;
    // Map back to the Ep-frame: X_orig = L^-T Xtilde L^T.
    Mat L = t.llt.matrixL();
    Mat Xorig = t.llt.matrixL().transpose().solve(Mat(X * L.transpose()));
    sol.X = Xorig;
    Mat sympos = L * X * L.transpose();  // = sym(X_orig^T Ep)
    Eigen::SelfAdjointEigenSolver<Mat> es(sympos);
    double nrm = std::max(1e-300, sympos.norm());
    sol.positivity_margin = es.eigenvalues()(0) / nrm;
    sol.residual_min_eig = kyp_residual(p, sol.X).min_eig;
    return sol;
}

ReductionMatrices reduction_matrix_minus(const StaircaseSystem& sys,
                                         const Mat& V2bar, const Mat& Xminus) {
    return reduction_matrices(sys, V2bar, &Xminus);
}

}  // namespace phdae
