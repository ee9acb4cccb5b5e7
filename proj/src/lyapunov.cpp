#include "phdae/lyapunov.hpp"

#include <Eigen/Eigenvalues>

namespace phdae {

Mat solve_lyapunov(const Mat& A, const Mat& Q) {
    const Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw StructuralError("solve_lyapunov: dimension mismatch");
    if (n == 0) return Mat(0, 0);

    Eigen::ComplexSchur<Mat> schur(A);
    if (schur.info() != Eigen::Success)
        throw NumericalError("solve_lyapunov: Schur decomposition failed");
    const CMat& T = schur.matrixT();
    const CMat& U = schur.matrixU();

    // A = U T U^*; with Y = U^* X U the equation becomes
    // T Y + Y T^H = -U^* Q U, solvable column by column since T is
    // upper triangular.
    CMat Qt = U.adjoint() * Q.cast<Complex>() * U;
    CMat Y = CMat::Zero(n, n);
    const double scale = T.norm() / std::sqrt(static_cast<double>(n));
    // (Y T^H).col(j) couples column j to columns k > j, so sweep backwards.
    for (Index j = n - 1; j >= 0; --j) {
        CVec rhs = -Qt.col(j);
        for (Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
        // (T + conj(T_jj) I) y_j = rhs, upper triangular.
        Complex tjj = std::conj(T(j, j));
        for (Index i = n - 1; i >= 0; --i) {
            Complex acc = rhs(i);
            for (Index k = i + 1; k < n; ++k) acc -= T(i, k) * Y(k, j);
            Complex diag = T(i, i) + tjj;
            if (std::abs(diag) < 1e-14 * (scale + 1.0))
                throw NumericalError(
                    "solve_lyapunov: spectrum not Lyapunov-regular");
            Y(i, j) = acc / diag;
        }
    }
    CMat X = U * Y * U.adjoint();
    Mat Xr = X.real();
    return 0.5 * (Xr + Xr.transpose());
}

}  // namespace phdae
