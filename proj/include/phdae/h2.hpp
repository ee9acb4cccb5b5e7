#ifndef PHDAE_H2_HPP
#define PHDAE_H2_HPP

#include <string>
#include <vector>

#include "phdae/interpolate.hpp"
#include "phdae/rosenbrock.hpp"
#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Left eigentriple of the reduced proper pencil: lambda with
/// t^T (lambda Er - (Jr - Rr)) = 0 and residual direction
/// r = (Gr - Pr)^T t.
struct EigenTriple {
    Complex lambda;
    CVec t;  // left eigenvector, length r'
    CVec r;  // residual direction, length m
};

/// All eigentriples of the reduced pencil, conjugate-closed. A pairwise
/// eigenvalue gap below eig_tol appends a multiplicity warning but
/// still returns the computed (possibly ill-conditioned) vectors.
std::vector<EigenTriple> reduced_left_eigen(const ReducedParts& parts,
                                            double eig_tol = 1e-8,
                                            std::vector<std::string>* warnings = nullptr);

struct IrkaOptions {
    int max_iter = 100;
    double shift_tol = 1e-6;  // relative change of the sorted shift multiset
    double eig_tol = 1e-8;
    InterpolateOptions inner;
};

struct IrkaOutput {
    ReducedModel model;
    TangentialBasis basis;        // final basis (V2bar, Tv, Breal)
    ReducedParts parts;           // final reduced pencil parts
    InterpolationData final_data; // converged shifts and directions
    std::vector<IterationRecord> history;
    bool converged = false;
};

/// Fixed-point iteration: interpolate, mirror the reduced spectrum into
/// new shifts, take residual directions as new tangential directions,
/// repeat until the sorted shift multiset is stationary. A shift that
/// collides with the pencil spectrum is nudged by +eig_tol in the real
/// part (recorded in the history).
IrkaOutput irka_ph(const StaircaseSystem& sys, const InterpolationData& init,
                   const IrkaOptions& opts = {});

/// Like irka_ph but applies the given left state transform (n2 x n2)
/// when forming the reduction matrix pair of the final model and of
/// every iterate; used for representation-changed projections.
IrkaOutput irka_ph(const StaircaseSystem& sys, const InterpolationData& init,
                   const IrkaOptions& opts, const Mat* left_state_transform);

/// Residual matrix of the reduced resolvent against the proper
/// full-order blocks:
/// zeta(mu) = (Ap - mu Ep) V2bar (Jr - Rr - mu Er)^{-1} (Gr - Pr) - Bp.
CMat residual_zeta(const ProperSubsystem& proper, const Mat& V2bar,
                   const ReducedParts& parts, Complex mu);

struct RegionSpec {
    std::vector<Complex> candidates;  // upper-half-plane representatives
    double omega_min = 1e-2;
    double omega_max = 1e4;
    bool ritz_update = true;  // refresh candidates with mirrored Ritz values
};

RegionSpec default_region(Index points = 200, double omega_min = 1e-2,
                          double omega_max = 1e4);

struct TrksmOptions {
    double response_tol = 1e-4;  // relative sigma-response change between orders
    double zeta_floor = 0.0;     // stop early when max residual falls below this
    Index probe_points = 50;
    InterpolateOptions inner;
};

struct TrksmOutput {
    ReducedModel model;
    TangentialBasis basis;
    ReducedParts parts;
    InterpolationData final_data;
    std::vector<IterationRecord> history;
    bool converged = false;
};

/// Greedy adaptive interpolation: each round adds the candidate shift
/// maximizing the spectral norm of zeta together with its dominant
/// right singular vector as tangential direction (plus conjugates),
/// until the sigma response stabilizes or r_max is reached.
TrksmOutput trksm_ph(const StaircaseSystem& sys, const InterpolationData& init,
                     Index r_max, const RegionSpec& region,
                     const TrksmOptions& opts = {});

}  // namespace phdae

#endif
