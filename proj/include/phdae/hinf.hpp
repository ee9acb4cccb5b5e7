#ifndef PHDAE_HINF_HPP
#define PHDAE_HINF_HPP

#include <vector>

#include "phdae/h2.hpp"
#include "phdae/interpolate.hpp"
#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// Row-wise fill of the strictly upper triangle of an m x m matrix from
/// a vector of length m(m-1)/2.
Mat vtsu(const Vec& theta_n, Index m);
/// Row-wise fill of the upper triangle (diagonal included) from a
/// vector of length m(m+1)/2.
Mat vtu(const Vec& theta_s, Index m);

/// Delta_N = vtsu^T - vtsu (skew for every theta_n).
Mat delta_n(const Vec& theta_n, Index m);
/// Delta_S = vtu^T vtu (symmetric PSD for every theta_s).
Mat delta_s(const Vec& theta_s, Index m);

/// Concatenated parameter vector [theta_n; theta_s] of length m^2.
struct PerturbationParams {
    Vec theta_n;  // length m(m-1)/2
    Vec theta_s;  // length m(m+1)/2
    static PerturbationParams split(const Vec& theta, Index m);
    Vec concat() const;
};

/// Certificate matrix F with F^T V2bar = Breal * Tv (exact by the
/// orthonormality of V2bar; minimum-norm solution).
struct InterpolationCertificate {
    Mat F;   // n2 x m
    Mat Tv;  // realified basis combination matrix
    InterpolationData data;
};

InterpolationCertificate build_certificate(const TangentialBasis& basis,
                                           const InterpolationData& data);

/// Applies the feedthrough perturbation to the reduced pencil parts:
/// the skew part receives M Delta_N M^T and the dissipation part
/// M Delta_S M^T with M = [V2bar^T F; -I]. Interpolation is untouched
/// for every parameter value.
ReducedParts perturb_rom(const ReducedParts& parts,
                         const InterpolationCertificate& cert,
                         const TangentialBasis& basis,
                         const PerturbationParams& theta);

struct IhaOptions {
    double omega_min = 1e-4;
    double omega_max = 1e6;
    Index grid_points = 400;
    int refine = 3;
    int max_evals = 2000;       // Nelder-Mead objective evaluation budget
    double simplex_tol = 1e-9;  // relative simplex spread stopping rule
    double initial_step = 0.1;
    InterpolateOptions inner;
};

struct IhaOutput {
    ReducedModel model;
    Vec theta_opt;
    double objective0 = 0.0;    // sampled error at theta = 0
    double objective_opt = 0.0;
    std::vector<IterationRecord> history;
    bool converged = false;     // false on optimizer stagnation at budget
};

/// Optimizes the perturbation parameters against the sampled maximal
/// singular value of the error on a log frequency grid (Nelder-Mead
/// over R^{m^2}), starting from theta0 (default zero = unperturbed).
IhaOutput iha_ph(const StaircaseSystem& sys, const TangentialBasis& basis,
                 const ReducedParts& parts, const InterpolationData& data,
                 const Vec& theta0, const IhaOptions& opts = {});

/// Convenience overload: runs irka_ph first, then optimizes from
/// theta0 = 0.
IhaOutput iha_ph(const StaircaseSystem& sys, const InterpolationData& init,
                 const IrkaOptions& irka_opts = {}, const IhaOptions& opts = {});

}  // namespace phdae

#endif
