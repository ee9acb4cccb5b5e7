#ifndef PHDAE_STAIRCASE_HPP
#define PHDAE_STAIRCASE_HPP

#include <string>
#include <vector>

#include "phdae/types.hpp"

namespace phdae {

/// Port-Hamiltonian descriptor system in staircase form.
///
/// The state is partitioned into four blocks of sizes n1..n4 and the
/// system matrices are stored block-wise so that the structural zero
/// pattern is kept explicit and sparse blocks stay sparse:
///
///   E = blkdiag(E11, E22, 0, 0)
///   J = [J11 J12 J13 J14; J21 J22 J23 0; J31 J32 J33 0; J41 0 0 0]
///   R = [R11 R12 R13 0;   R21 R22 R23 0; R31 R32 R33 0; 0   0 0 0]
///   G = [G1; G2; G3; G4],  P = [P1; P2; P3; 0]
///
/// with E11, E22 symmetric positive definite, J skew-symmetric, R
/// symmetric positive semi-definite, J41 and J33 - R33 invertible when
/// nonempty, and n1 == n4. Dynamics:
///
///   E x' = (J - R) x + (G - P) u
///   y    = (G + P)^T x + (S + N) u
struct StaircaseSystem {
    Index n1 = 0, n2 = 0, n3 = 0, n4 = 0, m = 0;

    SpMat E11, E22;
    SpMat J11, J12, J13, J14, J21, J22, J23, J31, J32, J33, J41;
    SpMat R11, R12, R13, R21, R22, R23, R31, R32, R33;
    SpMat G1, G2, G3, G4, P1, P2, P3;
    Mat S, N;

    Index n() const { return n1 + n2 + n3 + n4; }

    /// Throws StructuralError on any block dimension inconsistency.
    void check_dims() const;

    // Assembled full matrices (sparse).
    SpMat E() const;
    SpMat J() const;
    SpMat R() const;
    SpMat G() const;
    SpMat P() const;
    SpMat A() const;  // J - R
    SpMat B() const;  // G - P
    Mat C() const;    // (G + P)^T, m x n
    Mat D() const;    // S + N
};

/// Operator blocks A = J - R, B = G - P, C = (G + P)^T, D = S + N,
/// partitioned like the staircase blocks. A24, A34, A42, A43, A44 and
/// B-row/C-column 4 beyond G4 are structurally zero and not stored.
struct OperatorBlocks {
    Index n1 = 0, n2 = 0, n3 = 0, n4 = 0, m = 0;
    SpMat A11, A12, A13, A14;
    SpMat A21, A22, A23;
    SpMat A31, A32, A33;
    SpMat A41;
    Mat B1, B2, B3, B4;
    Mat C1, C2, C3, C4;  // m x nj row blocks
    Mat D;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double violation = 0.0;  // measured magnitude
    double tolerance = 0.0;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool valid() const;
    const CheckResult* find(const std::string& name) const;
    std::string summary() const;
};

struct ValidationOptions {
    double psd_tol = 1e-10;       // relative slack on min eigenvalue
    double skew_tol = 1e-12;      // relative max-norm defect
    double invert_tol = 1e-12;    // smallest/largest singular value ratio
    unsigned regularity_seed = 0x5eed;
};

/// Runs every structural and numerical invariant check of the staircase
/// form and reports each one. Dimension inconsistencies throw
/// StructuralError; numerical violations are reported in the result.
ValidationReport validate_staircase(const StaircaseSystem& sys,
                                    const ValidationOptions& opts = {});
ValidationReport validate_staircase(const StaircaseSystem& sys, double psd_tol);

/// Differentiation index of the uncontrolled system: 0, 1 or 2,
/// a pure function of (n1, n3, n4).
int differentiation_index(const StaircaseSystem& sys);

OperatorBlocks assemble_operator_blocks(const StaircaseSystem& sys);

/// Stored energy 0.5 * x^T E x.
double hamiltonian(const StaircaseSystem& sys, const Vec& x);

/// Smallest eigenvalue of a symmetric matrix; dense solve for moderate
/// sizes, LDLT-inertia based bound for large sparse inputs.
double min_eig_sym(const SpMat& M);
double min_eig_sym_dense(const Mat& M);

}  // namespace phdae

#endif
