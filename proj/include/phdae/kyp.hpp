#ifndef PHDAE_KYP_HPP
#define PHDAE_KYP_HPP

#include <string>

#include "phdae/interpolate.hpp"
#include "phdae/rosenbrock.hpp"
#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Hautus observability test on the proper subsystem: full column rank
/// of [(sEp - Ap); Cp] at every finite generalized eigenvalue s of
/// (Ep, Ap).
bool check_behavioural_observability(const ProperSubsystem& p,
                                     double rank_tol = 1e-10);

struct KypResidual {
    Mat residual;            // (n2+m) x (n2+m) symmetric block matrix
    double min_eig = 0.0;
    double symmetry_defect = 0.0;  // || X^T Ep - Ep^T X ||
};

/// KYP block matrix
/// [[-Ap^T X - X^T Ap, Cp^T - X^T Bp], [Cp - Bp^T X, Dp + Dp^T]]
/// and its minimum eigenvalue.
KypResidual kyp_residual(const ProperSubsystem& p, const Mat& X);

struct KypSolution {
    Mat X;                        // n2 x n2
    double residual_min_eig = 0.0;
    double riccati_residual = 0.0;
    double positivity_margin = 0.0;  // min eig of sym(X^T Ep), relative
    std::string kind;                // "identity" | "minimal" | "user"
};

struct KypOptions {
    int max_newton = 50;
    double riccati_tol = 1e-11;  // relative Riccati residual target
    double rank_tol = 1e-10;
    bool cross_check = true;  // verify against the Hamiltonian subspace
                              // solution on small instances
};

/// Minimal solution of the positive-real Riccati equation
/// Ap^T X + X^T Ap + (Cp^T - X^T Bp)(Dp+Dp^T)^{-1}(Cp - Bp^T X) = 0
/// with X^T Ep symmetric positive definite. Requires behavioural
/// observability and invertible Dp + Dp^T. Newton iteration from the
/// always-feasible X = I; Hamiltonian invariant-subspace fallback.
KypSolution minimal_kyp_solution(const ProperSubsystem& p,
                                 const KypOptions& opts = {});

/// Reduction matrix pair where the first column block of We uses
/// Xminus * V2bar in place of V2bar; Ve is unchanged, so interpolation
/// and the feedthrough blocks are preserved.
ReductionMatrices reduction_matrix_minus(const StaircaseSystem& sys,
                                         const Mat& V2bar, const Mat& Xminus);

}  // namespace phdae

#endif
