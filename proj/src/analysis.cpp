#include "phdae/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "phdae/lyapunov.hpp"

namespace phdae {

CMat transfer_eval(const StaircaseSystem& sys, Complex s) {
    const Index n = sys.n();
    const Index m = sys.m;
    Mat D = sys.D();
    if (n == 0) return D.cast<Complex>();

    SpMat E = sys.E();
    SpMat J = sys.J();
    SpMat R = sys.R();
    SpCMat pencil = (s * E.cast<Complex>() - (J - R).cast<Complex>()).pruned();
    pencil.makeCompressed();
    Eigen::SparseLU<SpCMat> lu(pencil);
    if (lu.info() != Eigen::Success)
        throw NumericalError("transfer_eval: pencil singular at the given point");
    Mat B = sys.B();
    Mat C = sys.C();
    CMat X = lu.solve(B.cast<Complex>());
    if (lu.info() != Eigen::Success)
        throw NumericalError("transfer_eval: solve failed at the given point");
    return C.cast<Complex>() * X + D.cast<Complex>();
}

std::vector<double> log_grid(double omega_min, double omega_max, Index points) {
    if (!(omega_min > 0) || !(omega_max > omega_min) || points < 2)
        throw StructuralError("log_grid: need 0 < omega_min < omega_max, points >= 2");
    std::vector<double> g(points);
    double l0 = std::log10(omega_min), l1 = std::log10(omega_max);
    for (Index i = 0; i < points; ++i)
        g[i] = std::pow(10.0, l0 + (l1 - l0) * double(i) / double(points - 1));
    return g;
}

FrequencyResponse sigma_response(const StaircaseSystem& sys,
                                 const std::vector<double>& grid) {
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw StructuralError("sigma_response: frequencies must be strictly increasing");
    FrequencyResponse fr;
    for (size_t i = 0; i < grid.size(); ++i) {
        try {
            CMat H = transfer_eval(sys, Complex(0.0, grid[i]));
            Eigen::JacobiSVD<CMat> svd(H);
            fr.frequencies.push_back(grid[i]);
            fr.values.push_back(H);
            fr.sigma.push_back(svd.singularValues().size() > 0
                                   ? svd.singularValues()(0)
                                   : 0.0);
        } catch (const NumericalError&) {
            fr.skipped.push_back(static_cast<Index>(i));
        }
    }
    return fr;
}

InterpolationReport verify_interpolation(const StaircaseSystem& fom,
                                         const StaircaseSystem& rom,
                                         const InterpolationData& data,
                                         double tol) {
    InterpolationReport rep;
    for (Index i = 0; i < data.size(); ++i) {
        CVec hb = transfer_eval(fom, data.shifts[i]) * data.directions[i];
        CVec hrb = transfer_eval(rom, data.shifts[i]) * data.directions[i];
        double denom = hb.norm();
        double res = (denom > 0) ? (hb - hrb).norm() / denom : (hb - hrb).norm();
        rep.residuals.push_back(res);
        rep.max_residual = std::max(rep.max_residual, res);
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

namespace {

struct StandardForm {
    Mat A, B, C;  // E-free realization of the strictly proper part
};

// Converts (Ep, Ap, Bp, Cp) to standard form via the Cholesky factor of
// Ep: A = L^-1 Ap L^-T etc.
StandardForm to_standard(const ProperSubsystem& p) {
    StandardForm sf;
    const Index n = p.Ep.rows();
    if (n == 0) {
        sf.A = Mat(0, 0);
        sf.B = Mat(0, p.Bp.cols());
        sf.C = Mat(p.Cp.rows(), 0);
        return sf;
    }
    Eigen::LLT<Mat> llt(p.Ep);
    if (llt.info() != Eigen::Success)
        throw NumericalError("h2_error: Ep is not positive definite");
    sf.A = llt.matrixL().solve(Mat(p.Ap));
    sf.A = llt.matrixL().solve(Mat(sf.A.transpose())).transpose();
    sf.B = llt.matrixL().solve(p.Bp);
    sf.C = llt.matrixL().solve(Mat(p.Cp.transpose())).transpose();
    return sf;
}

void fill_mismatch(ErrorReport& rep, const ProperSubsystem& f,
                   const ProperSubsystem& r, double tol) {
    double dscale = std::max(1.0, std::max(f.Dp.norm(), r.Dp.norm()));
    double iscale = std::max(1.0, std::max(f.Dinf.norm(), r.Dinf.norm()));
    rep.delta_dp_norm = (f.Dp - r.Dp).norm();
    rep.delta_dinf_norm = (f.Dinf - r.Dinf).norm();
    if (rep.delta_dinf_norm > tol * iscale) {
        rep.hinf_unbounded = true;
        rep.h2_unbounded = true;
        rep.reason = "improper coefficient mismatch";
    } else if (rep.delta_dp_norm > tol * dscale) {
        rep.h2_unbounded = true;
        rep.reason = "feedthrough mismatch";
    }
}

double grid_max(const StaircaseSystem& fom, const StaircaseSystem& rom,
                const std::vector<double>& grid, double* argmax) {
    double best = 0.0;
    double bw = grid.empty() ? 0.0 : grid.front();
    for (double w : grid) {
        Complex s(0.0, w);
        CMat diff = transfer_eval(fom, s) - transfer_eval(rom, s);
        Eigen::JacobiSVD<CMat> svd(diff);
        double v = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
        if (v > best) {
            best = v;
            bw = w;
        }
    }
    if (argmax) *argmax = bw;
    return best;
}

}  // namespace

ErrorReport h2_error(const StaircaseSystem& fom, const StaircaseSystem& rom,
                     const ErrorOptions& opts) {
    if (fom.m != rom.m) throw StructuralError("h2_error: port count mismatch");
    ErrorReport rep;
    ProperSubsystem pf = extract_proper(fom);
    ProperSubsystem pr = extract_proper(rom);
    fill_mismatch(rep, pf, pr, opts.mismatch_tol);
    if (rep.h2_unbounded) return rep;

    StandardForm sf = to_standard(pf);
    StandardForm sr = to_standard(pr);
    const Index nf = sf.A.rows(), nr = sr.A.rows(), m = fom.m;
    Mat A = Mat::Zero(nf + nr, nf + nr);
    A.topLeftCorner(nf, nf) = sf.A;
    A.bottomRightCorner(nr, nr) = sr.A;
    Mat B(nf + nr, m);
    B.topRows(nf) = sf.B;
    B.bottomRows(nr) = sr.B;
    Mat C(m, nf + nr);
    C.leftCols(nf) = sf.C;
    C.rightCols(nr) = -sr.C;
    if (nf + nr == 0) return rep;  // constant systems, zero strictly proper part
    Mat P = solve_lyapunov(A, B * B.transpose());
    double tr = (C * P * C.transpose()).trace();
    rep.h2 = std::sqrt(std::max(0.0, tr));
    return rep;
}

ErrorReport hinf_error(const StaircaseSystem& fom, const StaircaseSystem& rom,
                       const ErrorOptions& opts) {
    if (fom.m != rom.m) throw StructuralError("hinf_error: port count mismatch");
    ErrorReport rep;
    ProperSubsystem pf = extract_proper(fom);
    ProperSubsystem pr = extract_proper(rom);
    fill_mismatch(rep, pf, pr, opts.mismatch_tol);
    if (rep.hinf_unbounded) return rep;

    std::vector<double> grid = log_grid(opts.omega_min, opts.omega_max, opts.points);
    double argmax = opts.omega_min;
    double best = grid_max(fom, rom, grid, &argmax);
    double width = 10.0;  // one decade around the argmax, shrinking per pass
    for (int pass = 0; pass < opts.refine; ++pass) {
        double lo = std::max(opts.omega_min / 10.0, argmax / width);
        double hi = argmax * width;
        std::vector<double> local = log_grid(lo, hi, 41);
        double a2 = argmax;
        double v = grid_max(fom, rom, local, &a2);
        if (v > best) {
            best = v;
            argmax = a2;
        }
        width = std::pow(width, 0.5);
    }
    rep.hinf = best;
    rep.hinf_argmax_omega = argmax;
    return rep;
}

ErrorReport error_norms(const StaircaseSystem& fom, const StaircaseSystem& rom,
                        const ErrorOptions& opts) {
    ErrorReport h2 = h2_error(fom, rom, opts);
    ErrorReport hi = hinf_error(fom, rom, opts);
    h2.hinf_unbounded = hi.hinf_unbounded;
    h2.hinf = hi.hinf;
    h2.hinf_argmax_omega = hi.hinf_argmax_omega;
    if (h2.reason.empty()) h2.reason = hi.reason;
    return h2;
}

}  // namespace phdae
