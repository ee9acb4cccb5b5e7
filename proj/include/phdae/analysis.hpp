#ifndef PHDAE_ANALYSIS_HPP
#define PHDAE_ANALYSIS_HPP

#include <string>
#include <vector>

#include "phdae/interpolate.hpp"
#include "phdae/rosenbrock.hpp"
#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

/// H(s) = (G+P)^T (sE - (J-R))^{-1} (G-P) + S + N via a sparse complex
/// factorization of the shifted pencil. Throws NumericalError when the
/// pencil is singular at s.
CMat transfer_eval(const StaircaseSystem& sys, Complex s);

struct FrequencyResponse {
    std::vector<double> frequencies;  // rad/s, strictly increasing
    std::vector<CMat> values;         // H(i omega)
    std::vector<double> sigma;        // largest singular values
    std::vector<Index> skipped;       // grid indices where the pencil was singular
};

std::vector<double> log_grid(double omega_min, double omega_max, Index points);

FrequencyResponse sigma_response(const StaircaseSystem& sys,
                                 const std::vector<double>& grid);

struct InterpolationReport {
    std::vector<double> residuals;  // per-shift relative residuals
    double max_residual = 0.0;
    bool pass = true;
};

InterpolationReport verify_interpolation(const StaircaseSystem& fom,
                                         const StaircaseSystem& rom,
                                         const InterpolationData& data,
                                         double tol = 1e-8);

struct ErrorOptions {
    double omega_min = 1e-4;
    double omega_max = 1e6;
    Index points = 400;
    int refine = 3;               // local refinement passes around the argmax
    double mismatch_tol = 1e-12;  // feedthrough / improper mismatch threshold
};

struct ErrorReport {
    bool h2_unbounded = false;
    double h2 = 0.0;
    bool hinf_unbounded = false;
    double hinf = 0.0;  // lower-bound estimate from sampling
    double hinf_argmax_omega = 0.0;
    double delta_dp_norm = 0.0;
    double delta_dinf_norm = 0.0;
    std::string reason;  // set when a norm is unbounded
};

/// H2 norm of the error system. Unbounded exactly when the proper
/// feedthroughs or the improper coefficients differ beyond
/// opts.mismatch_tol; otherwise computed from the controllability
/// Gramian of the stacked strictly proper error realization.
ErrorReport h2_error(const StaircaseSystem& fom, const StaircaseSystem& rom,
                     const ErrorOptions& opts = {});

/// Sampled H-infinity estimate: max over a log grid of the largest
/// singular value of H - Hr, with local refinement around the argmax.
ErrorReport hinf_error(const StaircaseSystem& fom, const StaircaseSystem& rom,
                       const ErrorOptions& opts = {});

/// Both norms in one report.
ErrorReport error_norms(const StaircaseSystem& fom, const StaircaseSystem& rom,
                        const ErrorOptions& opts = {});

}  // namespace phdae

#endif
