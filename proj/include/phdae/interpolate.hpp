#ifndef PHDAE_INTERPOLATE_HPP
#define PHDAE_INTERPOLATE_HPP

#include <string>
#include <utility>
#include <vector>

#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Conjugate-closed set of interpolation shifts and right tangential
/// directions. Real shifts must carry real directions; every non-real
/// (sigma, b) must have its conjugate partner in the set.
struct InterpolationData {
    std::vector<Complex> shifts;
    std::vector<CVec> directions;

    Index size() const { return static_cast<Index>(shifts.size()); }
    void add(Complex sigma, const CVec& b);
    /// Adds (sigma, b); for non-real sigma also adds the conjugate pair.
    void add_closed(Complex sigma, const CVec& b);
    /// Throws StructuralError if not conjugate-closed, directions have
    /// wrong length, or shifts repeat.
    void validate(Index m) const;
};

/// Default interpolation data: log-spaced shifts on the positive
/// imaginary axis in [omega_min, omega_max] with conjugates, directions
/// cycling the canonical basis of R^m.
InterpolationData default_interpolation_data(Index r, Index m,
                                             double omega_min = 1e-2,
                                             double omega_max = 1e4);

enum class ShiftedSolveMode { Complex, RealBlock };

struct BasisOptions {
    double residual_tol = 1e-10;
    ShiftedSolveMode solve_mode = ShiftedSolveMode::Complex;
};

/// Realified tangential Krylov basis. Column order follows the
/// canonical traversal of the interpolation data: a real shift yields
/// one column, a conjugate pair (processed at its Im > 0 member) yields
/// the pair [Re v, Im v]. Breal holds the correspondingly realified
/// tangential directions.
struct TangentialBasis {
    Index n1 = 0, n2 = 0, n3 = 0, n4 = 0;
    Mat V;        // n x r
    Mat Breal;    // m x r
    Mat V2bar;    // n2 x r' (after orthonormalize_v2)
    Mat Tv;       // r x r' real, V2 * Tv = V2bar
    Vec cosines;  // retained singular values of the V2 block of Q
    std::vector<std::string> warnings;

    Mat V2() const { return V.middleRows(n1, n2); }
};

/// Solves (sigma_i E - A) v = B b_i for every datum and assembles the
/// realified basis. A solve whose relative residual exceeds
/// opts.residual_tol raises NumericalError carrying the offending shift.
TangentialBasis tangential_basis(const StaircaseSystem& sys,
                                 const InterpolationData& data,
                                 const BasisOptions& opts = {});

/// Orthonormalizes V (thin QR), then computes the thin SVD of its V2
/// block; retained left singular vectors form V2bar and the singular
/// values are the cosines of the CS decomposition. Rank-deficient V2
/// shrinks r' with a recorded warning; an all-zero V2 raises
/// NumericalError.
void orthonormalize_v2(TangentialBasis& basis, double tol_cs = 1e-10);

struct ReductionMatrices {
    Mat We, Ve;  // (n+m) x (r'+m)
};

/// Reduction matrix pair of the structure-preserving projection,
/// assembled from V2bar and LU solves with A33^T and A14^T.
ReductionMatrices reduction_matrices(const StaircaseSystem& sys, const Mat& V2bar);

/// Optionally replaces the V2bar occurrences in the first column block
/// of We by X * V2bar (KYP representation change); Ve is unaffected.
ReductionMatrices reduction_matrices(const StaircaseSystem& sys, const Mat& V2bar,
                                     const Mat* left_state_transform);

/// Reduced pencil in pH-split form: the proper blocks of order r' plus
/// the exactly inherited improper coefficient Dinf.
struct ReducedParts {
    Mat Er, Jr, Rr, Gr, Pr, Sr, Nr;  // proper part, order r'
    Mat Dinf;                        // m x m
    Index r_proper() const { return Er.rows(); }
};

/// Forms We^T R(s) Ve on the pencil coefficients and splits it into
/// s-part, skew part and symmetric part.
ReducedParts reduce(const StaircaseSystem& sys, const ReductionMatrices& wv);
ReducedParts reduce(const StaircaseSystem& sys, const Mat& V2bar);

/// Eigendecomposition-based rank-revealing factorization Dinf =
/// Linf Linf^T with Linf (m x q). Throws on asymmetric input.
std::pair<Mat, Index> factor_dinf(const Mat& Dinf, double tol = 1e-12);

struct IterationRecord {
    int iteration = 0;
    std::vector<Complex> shifts;
    double shift_change = 0.0;     // relative change metric (IRKA)
    double residual_max = 0.0;     // greedy residual (TRKSM) or objective
};

struct Provenance {
    std::string method;
    std::vector<Complex> shifts;
    std::vector<CVec> directions;
    std::vector<IterationRecord> history;
    bool converged = true;
};

/// Minimal pH-DAE ROM in staircase form, dims (q, r', 0, q).
struct ReducedModel {
    StaircaseSystem sys;
    Index q = 0;
    Index r_proper = 0;
    Provenance provenance;
};

ReducedModel assemble_rom(const ReducedParts& parts, const Mat& Linf, Index q);

struct InterpolateOptions {
    BasisOptions basis;
    double tol_cs = 1e-10;
    double dinf_tol = 1e-12;
};

/// Algorithm pipeline: tangential basis -> CS orthonormalization ->
/// reduction matrices -> reduced pencil -> Dinf factorization -> ROM.
ReducedModel interpolate(const StaircaseSystem& sys, const InterpolationData& data,
                         const InterpolateOptions& opts = {});

}  // namespace phdae

#endif
