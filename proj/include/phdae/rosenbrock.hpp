#ifndef PHDAE_ROSENBROCK_HPP
#define PHDAE_ROSENBROCK_HPP

#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Constant strict-system-equivalence transformation pair (T1, T2) that
/// brings the system matrix of a staircase pH-DAE into the condensed
/// form separating proper and improper parts. Both matrices are
/// s-independent and nonsingular; their (5,5) block is I_m.
struct SseTransform {
    Index n1 = 0, n2 = 0, n3 = 0, n4 = 0, m = 0;
    Mat T1, T2;  // (n+m) x (n+m)
};

/// Proper pH-ODE subsystem of a staircase pH-DAE together with the
/// improper coefficient Dinf. Raw state-space data (Ep, Ap, Bp, Cp, Dp)
/// and its pH decomposition (Jp, Rp, Gp, Pp, Sp, Np) are both kept.
/// The full transfer function is Cp (sEp - Ap)^-1 Bp + Dp + s Dinf.
struct ProperSubsystem {
    Mat Ep;           // = E22, symmetric positive definite
    Mat Ap, Bp, Cp, Dp;
    Mat Dinf;         // symmetric PSD, m x m
    Mat Jp, Rp, Gp, Pp, Sp, Np;
};

/// Builds T1 and T2 exactly from the operator blocks. A33 and A41 must
/// be invertible when nonempty; a singular block raises NumericalError
/// naming the block. Inverses are applied through LU factorizations.
SseTransform build_transformations(const OperatorBlocks& blocks);

struct ExtractOptions {
    double pattern_tol = 1e-10;  // relative, constant-block pattern of the
                                 // transformed system matrix
    bool verify_pattern = true;
};

/// Extracts the proper subsystem and Dinf by forming the transformed
/// pencil coefficients T1*(Gamma+W)*T2 and T1*Eext*T2 block-wise.
/// Asserts the constant identity/zero pattern of the condensed form and
/// cross-checks Ap against the Schur-complement formula.
ProperSubsystem extract_proper(const StaircaseSystem& sys,
                               const ExtractOptions& opts = {});

/// Dinf = G4^T A41^-T E11 A41^-1 G4 (zero matrix when n4 == 0).
Mat dinf_closed_form(const OperatorBlocks& blocks, const SpMat& E11);

struct PhProperForm {
    Mat Jp, Rp, Gp, Pp, Sp, Np;
};

/// Symmetric/skew split of the proper system matrix:
/// Jp = (Ap - Ap^T)/2, Rp = -(Ap + Ap^T)/2,
/// Gp = (Bp + Cp^T)/2, Pp = (Cp^T - Bp)/2, Sp = sym(Dp), Np = skew(Dp).
/// Raises NumericalError if the resulting dissipation matrix is
/// indefinite beyond tolerance (input was not a valid pH system).
PhProperForm ph_form_of_proper(const Mat& Ap, const Mat& Bp, const Mat& Cp,
                               const Mat& Dp, double psd_tol = 1e-10);

/// Transfer function of the proper + improper decomposition,
/// Cp (sEp - Ap)^-1 Bp + Dp + s Dinf.
CMat proper_transfer_eval(const ProperSubsystem& p, Complex s);

}  // namespace phdae

#endif
