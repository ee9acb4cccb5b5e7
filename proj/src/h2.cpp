#include "phdae/h2.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "phdae/analysis.hpp"

namespace phdae {

namespace {

bool nearly_real(Complex z, double scale) {
    return std::abs(z.imag()) <= 1e-10 * (1.0 + scale);
}

// Relative distance between sorted shift multisets; 1.0 when the sizes
// differ (forces the iteration to continue).
double shift_change(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size()) return 1.0;
    auto lex = [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    };
    std::sort(a.begin(), a.end(), lex);
    std::sort(b.begin(), b.end(), lex);
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]) / (1.0 + std::abs(b[i])));
    return d;
}

InterpolationData mirror_spectrum(const std::vector<EigenTriple>& eigs,
                                  Index m) {
    InterpolationData next;
    double scale = 0.0;
    for (const auto& e : eigs) scale = std::max(scale, std::abs(e.lambda));
    for (const auto& e : eigs) {
        Complex sigma = -e.lambda;
        CVec b = e.r;
        if (b.norm() > 0) b /= b.norm();
        if (nearly_real(sigma, scale)) {
            CVec br = b.real().cast<Complex>();
            if (br.norm() > 0) br /= br.norm();
            next.add(Complex(sigma.real(), 0.0), br);
        } else if (sigma.imag() > 0) {
            next.add_closed(sigma, b);
        }  // the Im < 0 member of each pair is added by its partner
    }
    next.validate(m);
    return next;
}

}  // namespace

std::vector<EigenTriple> reduced_left_eigen(const ReducedParts& parts,
                                            double eig_tol,
                                            std::vector<std::string>* warnings) {
    const Index r = parts.r_proper();
    std::vector<EigenTriple> out;
    if (r == 0) return out;
    Mat Ar = parts.Jr - parts.Rr;
    // t^T (lambda Er - Ar) = 0  <=>  Ar^T t = lambda Er^T t.
    Eigen::GeneralizedEigenSolver<Mat> ges;
    ges.compute(Ar.transpose(), Mat(parts.Er.transpose()), true);
    if (ges.info() != Eigen::Success)
        throw NumericalError("reduced_left_eigen: eigen solver failed");
    Mat Br = parts.Gr - parts.Pr;
    double pencil_scale = Ar.norm() + parts.Er.norm();
    for (Index i = 0; i < r; ++i) {
        EigenTriple e;
        e.lambda = ges.eigenvalues()(i);
        e.t = ges.eigenvectors().col(i);
        double tn = e.t.norm();
        if (tn > 0) e.t /= tn;
        CVec res = e.t.transpose() *
                   (e.lambda * parts.Er.cast<Complex>() - Ar.cast<Complex>());
        if (res.norm() > 1e-10 * (std::abs(e.lambda) + 1.0) * pencil_scale)
            throw NumericalError("reduced_left_eigen: eigenvector residual too large");
        e.r = Br.cast<Complex>().transpose() * e.t;
        out.push_back(std::move(e));
    }
    if (warnings) {
        for (size_t i = 0; i < out.size(); ++i)
            for (size_t j = i + 1; j < out.size(); ++j)
                if (std::abs(out[i].lambda - out[j].lambda) <
                    eig_tol * (1.0 + std::abs(out[i].lambda))) {
                    warnings->push_back("clustered reduced eigenvalues detected");
                    i = out.size();
                    break;
                }
    }
    return out;
}

namespace {

struct Iterate {
    TangentialBasis basis;
    ReducedParts parts;
};

Iterate build_iterate(const StaircaseSystem& sys, const InterpolationData& data,
                      const InterpolateOptions& inner,
                      const Mat* left_state_transform) {
    Iterate it;
    it.basis = tangential_basis(sys, data, inner.basis);
    orthonormalize_v2(it.basis, inner.tol_cs);
    ReductionMatrices wv =
        reduction_matrices(sys, it.basis.V2bar, left_state_transform);
    it.parts = reduce(sys, wv);
    return it;
}

}  // namespace

IrkaOutput irka_ph(const StaircaseSystem& sys, const InterpolationData& init,
                   const IrkaOptions& opts) {
    return irka_ph(sys, init, opts, nullptr);
}

IrkaOutput irka_ph(const StaircaseSystem& sys, const InterpolationData& init,
                   const IrkaOptions& opts, const Mat* left_state_transform) {
    init.validate(sys.m);
    IrkaOutput out;
    InterpolationData data = init;
    InterpolationData built;  // the data the current iterate was built from
    Iterate it;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        try {
            it = build_iterate(sys, data, opts.inner, left_state_transform);
        } catch (const NumericalError&) {
            // Shift collision with the pencil spectrum: nudge every
            // shift into the open right half-plane and retry once.
            for (auto& s : data.shifts) s += opts.eig_tol;
            IterationRecord rec;
            rec.iteration = iter;
            rec.shifts = data.shifts;
            rec.shift_change = 1.0;
            out.history.push_back(rec);
            it = build_iterate(sys, data, opts.inner, left_state_transform);
        }
        built = data;
        std::vector<std::string> warn;
        std::vector<EigenTriple> eigs =
            reduced_left_eigen(it.parts, opts.eig_tol, &warn);
        InterpolationData next = mirror_spectrum(eigs, sys.m);

        IterationRecord rec;
        rec.iteration = iter;
        rec.shifts = next.shifts;
        rec.shift_change = shift_change(next.shifts, data.shifts);
        out.history.push_back(rec);
        if (rec.shift_change < opts.shift_tol) {
            out.converged = true;
            break;
        }
        data = next;
    }
    auto [Linf, q] = factor_dinf(it.parts.Dinf, opts.inner.dinf_tol);
    out.model = assemble_rom(it.parts, Linf, q);
    out.model.provenance.method = "irka";
    out.model.provenance.shifts = built.shifts;
    out.model.provenance.directions = built.directions;
    out.model.provenance.history = out.history;
    out.model.provenance.converged = out.converged;
    out.basis = std::move(it.basis);
    out.parts = std::move(it.parts);
    out.final_data = std::move(built);
    return out;
}

CMat residual_zeta(const ProperSubsystem& proper, const Mat& V2bar,
                   const ReducedParts& parts, Complex mu) {
    CMat pencil = (parts.Jr - parts.Rr).cast<Complex>() -
                  mu * parts.Er.cast<Complex>();
    Eigen::PartialPivLU<CMat> lu(pencil);
    CMat sol = lu.solve((parts.Gr - parts.Pr).cast<Complex>());
    double residual = (pencil * sol - (parts.Gr - parts.Pr).cast<Complex>()).norm();
    if (!(residual <= 1e-8 * (1.0 + (parts.Gr - parts.Pr).norm())))
        throw NumericalError("residual_zeta: reduced resolvent singular at mu");
    CMat W = V2bar.cast<Complex>() * sol;
    return proper.Ap.cast<Complex>() * W - mu * (proper.Ep.cast<Complex>() * W) -
           proper.Bp.cast<Complex>();
}

RegionSpec default_region(Index points, double omega_min, double omega_max) {
    RegionSpec rs;
    rs.omega_min = omega_min;
    rs.omega_max = omega_max;
    std::vector<double> g = log_grid(omega_min, omega_max, points);
    for (double w : g) rs.candidates.emplace_back(0.0, w);
    return rs;
}

namespace {

// Transfer function of the reduced pencil parts without assembling a
// staircase system.
CMat reduced_transfer(const ReducedParts& p, Complex s) {
    CMat H = (p.Sr + p.Nr).cast<Complex>() + s * p.Dinf.cast<Complex>();
    if (p.r_proper() > 0) {
        CMat pencil = s * p.Er.cast<Complex>() - (p.Jr - p.Rr).cast<Complex>();
        Eigen::PartialPivLU<CMat> lu(pencil);
        CMat X = lu.solve((p.Gr - p.Pr).cast<Complex>());
        H += (p.Gr + p.Pr).cast<Complex>().transpose() * X;
    }
    return H;
}

Vec reduced_sigma_probe(const ReducedParts& p, const std::vector<double>& grid) {
    Vec s(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        Eigen::JacobiSVD<CMat> svd(reduced_transfer(p, Complex(0.0, grid[i])));
        s(static_cast<Index>(i)) =
            svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    }
    return s;
}

}  // namespace

TrksmOutput trksm_ph(const StaircaseSystem& sys, const InterpolationData& init,
                     Index r_max, const RegionSpec& region,
                     const TrksmOptions& opts) {
    init.validate(sys.m);
    if (r_max <= init.size())
        throw StructuralError("trksm_ph: r_max must exceed the initial data size");
    ProperSubsystem proper = extract_proper(sys);
    std::vector<double> probe =
        log_grid(region.omega_min, region.omega_max, opts.probe_points);

    TrksmOutput out;
    InterpolationData data = init;
    Iterate it;
    Vec prev_sigma;
    int iter = 0;
    while (true) {
        ++iter;
        it = build_iterate(sys, data, opts.inner, nullptr);
        Vec cur_sigma = reduced_sigma_probe(it.parts, probe);
        IterationRecord rec;
        rec.iteration = iter;
        rec.shifts = data.shifts;
        if (prev_sigma.size() == cur_sigma.size()) {
            double denom = std::max(1e-300, prev_sigma.lpNorm<Eigen::Infinity>());
            rec.shift_change =
                (cur_sigma - prev_sigma).lpNorm<Eigen::Infinity>() / denom;
            if (rec.shift_change < opts.response_tol) {
                out.history.push_back(rec);
                out.converged = true;
                break;
            }
        } else {
            rec.shift_change = 1.0;
        }
        prev_sigma = cur_sigma;
        if (data.size() >= r_max) {
            out.history.push_back(rec);
            break;
        }

        // Candidate set: fixed imaginary-axis samples plus mirrored
        // stable Ritz values of the current reduced pencil.
        std::vector<Complex> cands = region.candidates;
        if (region.ritz_update) {
            for (const auto& e : reduced_left_eigen(it.parts)) {
                Complex mu = -e.lambda;
                if (mu.imag() < 0) mu = std::conj(mu);
                cands.push_back(mu);
            }
        }
        double best = -1.0;
        Complex best_mu;
        CMat best_zeta;
        for (Complex mu : cands) {
            bool used = false;
            for (Complex s : data.shifts)
                if (std::abs(mu - s) <= 1e-12 * (1.0 + std::abs(s))) used = true;
            if (used) continue;
            CMat z;
            try {
                z = residual_zeta(proper, it.basis.V2bar, it.parts, mu);
            } catch (const NumericalError&) {
                continue;  // singular reduced resolvent at this candidate
            }
            Eigen::JacobiSVD<CMat> svd(z);
            double v = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
            if (v > best) {
                best = v;
                best_mu = mu;
                best_zeta = z;
            }
        }
        if (best < 0)
            throw NumericalError("trksm_ph: candidate set exhausted");
        rec.residual_max = best;
        out.history.push_back(rec);
        if (best <= opts.zeta_floor) {
            out.converged = true;
            break;
        }

        Eigen::JacobiSVD<CMat> svd(best_zeta, Eigen::ComputeThinV);
        CVec b = svd.matrixV().col(0);
        double scale = std::abs(best_mu);
        if (nearly_real(best_mu, scale)) {
            CVec br = b.real().cast<Complex>();
            if (br.norm() == 0) br = b.imag().cast<Complex>();
            br /= br.norm();
            data.add(Complex(best_mu.real(), 0.0), br);
        } else {
            data.add_closed(best_mu, b);
        }
    }

    auto [Linf, q] = factor_dinf(it.parts.Dinf, opts.inner.dinf_tol);
    out.model = assemble_rom(it.parts, Linf, q);
    out.model.provenance.method = "trksm";
    out.model.provenance.shifts = data.shifts;
    out.model.provenance.directions = data.directions;
    out.model.provenance.history = out.history;
    out.model.provenance.converged = out.converged;
    out.basis = std::move(it.basis);
    out.parts = std::move(it.parts);
    out.final_data = std::move(data);
    return out;
}

}  // namespace phdae
