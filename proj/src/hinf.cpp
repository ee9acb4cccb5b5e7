#include "phdae/hinf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "phdae/analysis.hpp"

namespace phdae {

Mat vtsu(const Vec& theta_n, Index m) {
    if (theta_n.size() != m * (m - 1) / 2)
        throw StructuralError("vtsu: parameter vector must have length m(m-1)/2");
    Mat U = Mat::Zero(m, m);
    Index k = 0;
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) U(i, j) = theta_n(k++);
    return U;
}

Mat vtu(const Vec& theta_s, Index m) {
    if (theta_s.size() != m * (m + 1) / 2)
        throw StructuralError("vtu: parameter vector must have length m(m+1)/2");
    Mat U = Mat::Zero(m, m);
    Index k = 0;
    for (Index i = 0; i < m; ++i)
        for (Index j = i; j < m; ++j) U(i, j) = theta_s(k++);
    return U;
}

Mat delta_n(const Vec& theta_n, Index m) {
    Mat U = vtsu(theta_n, m);
    return U.transpose() - U;
}

Mat delta_s(const Vec& theta_s, Index m) {
    Mat U = vtu(theta_s, m);
    return U.transpose() * U;
}

PerturbationParams PerturbationParams::split(const Vec& theta, Index m) {
    if (theta.size() != m * m)
        throw StructuralError("PerturbationParams: concatenated length must be m^2");
    PerturbationParams p;
    p.theta_n = theta.head(m * (m - 1) / 2);
    p.theta_s = theta.tail(m * (m + 1) / 2);
    return p;
}

Vec PerturbationParams::concat() const {
    Vec t(theta_n.size() + theta_s.size());
    t << theta_n, theta_s;
    return t;
}

InterpolationCertificate build_certificate(const TangentialBasis& basis,
                                           const InterpolationData& data) {
    InterpolationCertificate cert;
    Mat rhs = basis.Breal * basis.Tv;  // m x r'
    cert.F = basis.V2bar * rhs.transpose();
    cert.Tv = basis.Tv;
    cert.data = data;
    double residual = (cert.F.transpose() * basis.V2bar - rhs).norm();
    if (!(residual <= 1e-12 * (1.0 + rhs.norm())))
        throw NumericalError("build_certificate: certificate residual too large");
    return cert;
}

ReducedParts perturb_rom(const ReducedParts& parts,
                         const InterpolationCertificate& cert,
                         const TangentialBasis& basis,
                         const PerturbationParams& theta) {
    const Index r = parts.r_proper();
    const Index m = parts.Sr.rows();
    Mat M(r + m, m);
    M.topRows(r) = basis.V2bar.transpose() * cert.F;
    M.bottomRows(m) = -Mat::Identity(m, m);
    Mat dN = M * delta_n(theta.theta_n, m) * M.transpose();
    Mat dS = M * delta_s(theta.theta_s, m) * M.transpose();

    ReducedParts out = parts;
    out.Jr += dN.topLeftCorner(r, r);
    out.Gr += dN.topRightCorner(r, m);
    // The extended skew structure matrix carries -Nr in its feedthrough
    // block, so the perturbation enters Nr with opposite sign; this is
    // exactly what keeps the tangential interpolation conditions intact.
    out.Nr -= dN.bottomRightCorner(m, m);
    out.Rr += dS.topLeftCorner(r, r);
    out.Pr += dS.topRightCorner(r, m);
    out.Sr += dS.bottomRightCorner(m, m);
    // Re-symmetrize against roundoff; the construction is exactly
    // skew/symmetric in exact arithmetic.
    out.Jr = 0.5 * (out.Jr - Mat(out.Jr.transpose()));
    out.Nr = 0.5 * (out.Nr - Mat(out.Nr.transpose()));
    out.Rr = 0.5 * (out.Rr + Mat(out.Rr.transpose()));
    out.Sr = 0.5 * (out.Sr + Mat(out.Sr.transpose()));
    return out;
}

namespace {

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

class SampledObjective {
  public:
    SampledObjective(const StaircaseSystem& sys, const IhaOptions& opts)
        : sys_(sys), opts_(opts),
          grid_(log_grid(opts.omega_min, opts.omega_max, opts.grid_points)) {}

    double operator()(const ReducedParts& parts) {
        double argmax = grid_.front();
        double best = eval_grid(parts, grid_, &argmax);
        double width = 10.0;
        for (int pass = 0; pass < opts_.refine; ++pass) {
            double lo = std::max(opts_.omega_min / 10.0, argmax / width);
            std::vector<double> local = log_grid(lo, argmax * width, 21);
            double a2 = argmax;
            double v = eval_grid(parts, local, &a2);
            if (v > best) {
                best = v;
                argmax = a2;
            }
            width = std::sqrt(width);
        }
        return best;
    }

  private:
    double eval_grid(const ReducedParts& parts, const std::vector<double>& grid,
                     double* argmax) {
        double best = 0.0;
        for (double w : grid) {
            const CMat& Hf = fom_at(w);
            CMat diff = Hf - reduced_transfer(parts, Complex(0.0, w));
            Eigen::JacobiSVD<CMat> svd(diff);
            double v = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
            if (v > best) {
                best = v;
                if (argmax) *argmax = w;
            }
        }
        return best;
    }

    const CMat& fom_at(double w) {
        auto it = cache_.find(w);
        if (it == cache_.end())
            it = cache_.emplace(w, transfer_eval(sys_, Complex(0.0, w))).first;
        return it->second;
    }

    const StaircaseSystem& sys_;
    const IhaOptions& opts_;
    std::vector<double> grid_;
    std::map<double, CMat> cache_;
};

}  // namespace

IhaOutput iha_ph(const StaircaseSystem& sys, const TangentialBasis& basis,
                 const ReducedParts& parts, const InterpolationData& data,
                 const Vec& theta0, const IhaOptions& opts) {
    const Index m = sys.m;
    const Index dim = m * m;
    if (theta0.size() != dim)
        throw StructuralError("iha_ph: theta0 must have length m^2");
    InterpolationCertificate cert = build_certificate(basis, data);
    SampledObjective objective(sys, opts);

    int evals = 0;
    auto f = [&](const Vec& theta) {
        ++evals;
        return objective(
            perturb_rom(parts, cert, basis, PerturbationParams::split(theta, m)));
    };

    IhaOutput out;
    out.objective0 = objective(
        perturb_rom(parts, cert, basis, PerturbationParams::split(Vec::Zero(dim), m)));

    // Nelder-Mead over R^{m^2}.
    std::vector<Vec> simplex(dim + 1, theta0);
    std::vector<double> fv(dim + 1);
    for (Index i = 0; i < dim; ++i) simplex[i + 1](i) += opts.initial_step;
    for (Index i = 0; i <= dim; ++i) fv[i] = f(simplex[i]);
    const double f_start = fv[0];  // objective at theta0

    auto order = [&] {
        std::vector<Index> idx(dim + 1);
        for (Index i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(),
                  [&](Index a, Index b) { return fv[a] < fv[b]; });
        std::vector<Vec> s2;
        std::vector<double> f2;
        for (Index i : idx) {
            s2.push_back(simplex[i]);
            f2.push_back(fv[i]);
        }
        simplex.swap(s2);
        fv.swap(f2);
    };
    order();
    int iter = 0;
    while (evals < opts.max_evals) {
        ++iter;
        double spread = (fv[dim] - fv[0]) / (std::abs(fv[0]) + 1e-12);
        {
            IterationRecord rec;
            rec.iteration = iter;
            rec.residual_max = fv[0];
            rec.shift_change = spread;
            out.history.push_back(rec);
        }
        if (spread < opts.simplex_tol) {
            out.converged = true;
            break;
        }
        Vec centroid = Vec::Zero(dim);
        for (Index i = 0; i < dim; ++i) centroid += simplex[i];
        centroid /= double(dim);
        Vec xr = centroid + (centroid - simplex[dim]);
        double fr = f(xr);
        if (fr < fv[0]) {
            Vec xe = centroid + 2.0 * (centroid - simplex[dim]);
            double fe = f(xe);
            if (fe < fr) {
                simplex[dim] = xe;
                fv[dim] = fe;
            } else {
                simplex[dim] = xr;
                fv[dim] = fr;
            }
        } else if (fr < fv[dim - 1]) {
            simplex[dim] = xr;
            fv[dim] = fr;
        } else {
            Vec xc = centroid + 0.5 * ((fr < fv[dim] ? xr : simplex[dim]) - centroid);
            double fc = f(xc);
            if (fc < std::min(fr, fv[dim])) {
                simplex[dim] = xc;
                fv[dim] = fc;
            } else {
                for (Index i = 1; i <= dim; ++i) {
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
                    fv[i] = f(simplex[i]);
                }
            }
        }
        order();
    }
    out.theta_opt = simplex[0];
    out.objective_opt = fv[0];
    if (out.objective_opt > f_start) {
        // Never report a point worse than the starting parameters.
        out.theta_opt = theta0;
        out.objective_opt = f_start;
    }

    ReducedParts best = perturb_rom(parts, cert, basis,
                                    PerturbationParams::split(out.theta_opt, m));
    auto [Linf, q] = factor_dinf(best.Dinf, opts.inner.dinf_tol);
    out.model = assemble_rom(best, Linf, q);
    out.model.provenance.method = "iha";
    out.model.provenance.shifts = data.shifts;
    out.model.provenance.directions = data.directions;
    out.model.provenance.history = out.history;
    out.model.provenance.converged = out.converged;
    return out;
}

IhaOutput iha_ph(const StaircaseSystem& sys, const InterpolationData& init,
                 const IrkaOptions& irka_opts, const IhaOptions& opts) {
    IrkaOutput irka = irka_ph(sys, init, irka_opts);
    return iha_ph(sys, irka.basis, irka.parts, irka.final_data,
                  Vec::Zero(sys.m * sys.m), opts);
}

}  // namespace phdae
