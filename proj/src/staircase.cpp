#include "phdae/staircase.hpp"

#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SVD>

namespace phdae {

namespace {

using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& t, Index r0, Index c0, const SpMat& b,
               double scale = 1.0) {
    for (int k = 0; k < b.outerSize(); ++k)
        for (SpMat::InnerIterator it(b, k); it; ++it)
            t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw StructuralError(msg);
}

void check_block(const SpMat& b, Index rows, Index cols, const char* name) {
    if (b.rows() != rows || b.cols() != cols) {
        std::ostringstream os;
        os << "block " << name << " has shape " << b.rows() << "x" << b.cols()
           << ", expected " << rows << "x" << cols;
        throw StructuralError(os.str());
    }
}

double max_abs(const SpMat& m) {
    double v = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            v = std::max(v, std::abs(it.value()));
    return v;
}

// Ratio of smallest to largest singular value; 0 for empty input treated
// as perfectly invertible (vacuous).
double sv_ratio(const SpMat& m) {
    if (m.rows() == 0) return 1.0;
    if (m.rows() <= 2048) {
        Mat dense(m);
        Eigen::JacobiSVD<Mat> svd(dense);
        double smax = svd.singularValues()(0);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        return smax > 0 ? smin / smax : 0.0;
    }
    // Large sparse: a successful LU factorization with nonzero
    // determinant certifies invertibility (coarse: no condition number).
    SpMat mc = m;
    mc.makeCompressed();
    Eigen::SparseLU<SpMat> lu(mc);
    if (lu.info() != Eigen::Success) return 0.0;
    double log_det = lu.logAbsDeterminant();
    return std::isfinite(log_det) ? 1.0 : 0.0;
}

}  // namespace

void StaircaseSystem::check_dims() const {
    require(n1 >= 0 && n2 >= 0 && n3 >= 0 && n4 >= 0 && m >= 0,
            "negative block dimension");
    require(n1 == n4, "n1 != n4 (index-2 blocks must be paired)");
    check_block(E11, n1, n1, "E11");
    check_block(E22, n2, n2, "E22");
    check_block(J11, n1, n1, "J11");
    check_block(J12, n1, n2, "J12");
    check_block(J13, n1, n3, "J13");
    check_block(J14, n1, n4, "J14");
    check_block(J21, n2, n1, "J21");
    check_block(J22, n2, n2, "J22");
    check_block(J23, n2, n3, "J23");
    check_block(J31, n3, n1, "J31");
    check_block(J32, n3, n2, "J32");
    check_block(J33, n3, n3, "J33");
    check_block(J41, n4, n1, "J41");
    check_block(R11, n1, n1, "R11");
    check_block(R12, n1, n2, "R12");
    check_block(R13, n1, n3, "R13");
    check_block(R21, n2, n1, "R21");
    check_block(R22, n2, n2, "R22");
    check_block(R23, n2, n3, "R23");
    check_block(R31, n3, n1, "R31");
    check_block(R32, n3, n2, "R32");
    check_block(R33, n3, n3, "R33");
    check_block(G1, n1, m, "G1");
    check_block(G2, n2, m, "G2");
    check_block(G3, n3, m, "G3");
    check_block(G4, n4, m, "G4");
    check_block(P1, n1, m, "P1");
    check_block(P2, n2, m, "P2");
    check_block(P3, n3, m, "P3");
    if (S.rows() != m || S.cols() != m) throw StructuralError("S must be m x m");
    if (N.rows() != m || N.cols() != m) throw StructuralError("N must be m x m");
}

SpMat StaircaseSystem::E() const {
    std::vector<Triplet> t;
    add_block(t, 0, 0, E11);
    add_block(t, n1, n1, E22);
    SpMat out(n(), n());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat StaircaseSystem::J() const {
    std::vector<Triplet> t;
    const Index o2 = n1, o3 = n1 + n2, o4 = n1 + n2 + n3;
    add_block(t, 0, 0, J11);
    add_block(t, 0, o2, J12);
    add_block(t, 0, o3, J13);
    add_block(t, 0, o4, J14);
    add_block(t, o2, 0, J21);
    add_block(t, o2, o2, J22);
    add_block(t, o2, o3, J23);
    add_block(t, o3, 0, J31);
    add_block(t, o3, o2, J32);
    add_block(t, o3, o3, J33);
    add_block(t, o4, 0, J41);
    SpMat out(n(), n());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat StaircaseSystem::R() const {
    std::vector<Triplet> t;
    const Index o2 = n1, o3 = n1 + n2;
    add_block(t, 0, 0, R11);
    add_block(t, 0, o2, R12);
    add_block(t, 0, o3, R13);
    add_block(t, o2, 0, R21);
    add_block(t, o2, o2, R22);
    add_block(t, o2, o3, R23);
    add_block(t, o3, 0, R31);
    add_block(t, o3, o2, R32);
    add_block(t, o3, o3, R33);
    SpMat out(n(), n());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat StaircaseSystem::G() const {
    std::vector<Triplet> t;
    add_block(t, 0, 0, G1);
    add_block(t, n1, 0, G2);
    add_block(t, n1 + n2, 0, G3);
    add_block(t, n1 + n2 + n3, 0, G4);
    SpMat out(n(), m);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat StaircaseSystem::P() const {
    std::vector<Triplet> t;
    add_block(t, 0, 0, P1);
    add_block(t, n1, 0, P2);
    add_block(t, n1 + n2, 0, P3);
    SpMat out(n(), m);
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat StaircaseSystem::A() const { return SpMat(J() - R()); }
SpMat StaircaseSystem::B() const { return SpMat(G() - P()); }
Mat StaircaseSystem::C() const { return Mat(SpMat(G() + P())).transpose(); }
Mat StaircaseSystem::D() const { return S + N; }

bool ValidationReport::valid() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << (c.pass ? "PASS " : "FAIL ") << c.name << " (violation "
           << c.violation << ", tol " << c.tolerance << ")\n";
    return os.str();
}

double min_eig_sym_dense(const Mat& M) {
    if (M.rows() == 0) return std::numeric_limits<double>::infinity();
    Mat sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double min_eig_sym(const SpMat& M) {
    if (M.rows() == 0) return std::numeric_limits<double>::infinity();
    if (M.rows() <= 2048) return min_eig_sym_dense(Mat(M));
    // Large sparse path: LDLT inertia check. A PSD matrix (up to a small
    // shift) factors with a nonnegative diagonal.
    SpMat sym = SpMat(0.5 * (SpMat(M.transpose()) + M));
    double scale = max_abs(sym);
    double shift = 1e-12 * std::max(1.0, scale);
    SpMat I(M.rows(), M.cols());
    I.setIdentity();
    Eigen::SimplicialLDLT<SpMat> ldlt;
    ldlt.compute(SpMat(sym + shift * I));
    if (ldlt.info() != Eigen::Success) return -scale;
    double dmin = ldlt.vectorD().minCoeff();
    return dmin >= 0 ? 0.0 : dmin;
}

ValidationReport validate_staircase(const StaircaseSystem& sys, double psd_tol) {
    ValidationOptions o;
    o.psd_tol = psd_tol;
    return validate_staircase(sys, o);
}

ValidationReport validate_staircase(const StaircaseSystem& sys,
                                    const ValidationOptions& opts) {
    sys.check_dims();
    ValidationReport rep;
    auto push = [&rep](const std::string& name, bool pass, double viol, double tol) {
        rep.checks.push_back({name, pass, viol, tol});
    };

    {
        double e1 = (sys.n1 > 0) ? min_eig_sym(sys.E11)
                                 : std::numeric_limits<double>::infinity();
        push("E11-spd", e1 > 0, e1 > 0 ? 0.0 : -e1, 0.0);
        double e2 = (sys.n2 > 0) ? min_eig_sym(sys.E22)
                                 : std::numeric_limits<double>::infinity();
        push("E22-spd", e2 > 0, e2 > 0 ? 0.0 : -e2, 0.0);
        double d1 = max_abs(SpMat(sys.E11 - SpMat(sys.E11.transpose())));
        double d2 = max_abs(SpMat(sys.E22 - SpMat(sys.E22.transpose())));
        double scale = std::max({1.0, max_abs(sys.E11), max_abs(sys.E22)});
        double tol = opts.skew_tol * scale;
        push("E-symmetric", std::max(d1, d2) <= tol, std::max(d1, d2), tol);
    }

    {
        SpMat J = sys.J();
        double defect = max_abs(SpMat(J + SpMat(J.transpose())));
        double nskew = (sys.m > 0) ? (sys.N + sys.N.transpose()).cwiseAbs().maxCoeff() : 0.0;
        double scale = std::max({1.0, max_abs(J),
                                 sys.m > 0 ? sys.N.cwiseAbs().maxCoeff() : 0.0});
        double tol = opts.skew_tol * scale;
        push("J-skew", defect <= tol, defect, tol);
        push("N-skew", nskew <= tol, nskew, tol);
    }

    {
        SpMat R = sys.R();
        double symd = max_abs(SpMat(R - SpMat(R.transpose())));
        double scale = std::max(1.0, max_abs(R));
        push("R-symmetric", symd <= opts.skew_tol * scale, symd, opts.skew_tol * scale);
        double emin = min_eig_sym(R);
        double tol = opts.psd_tol * scale;
        bool pass = emin >= -tol;
        push("R-psd", pass, pass ? 0.0 : -emin, tol);
    }

    {
        // Extended dissipation matrix W = [R P; P^T sym(S)].
        const Index n = sys.n(), m = sys.m;
        std::vector<Triplet> t;
        add_block(t, 0, 0, sys.R());
        add_block(t, 0, n, sys.P());
        add_block(t, n, 0, SpMat(sys.P().transpose()));
        Mat ssym = 0.5 * (sys.S + sys.S.transpose());
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
                if (ssym(i, j) != 0.0) t.emplace_back(n + i, n + j, ssym(i, j));
        SpMat W(n + m, n + m);
        W.setFromTriplets(t.begin(), t.end());
        double scale = std::max(1.0, max_abs(W));
        double emin = min_eig_sym(W);
        double tol = opts.psd_tol * scale;
        bool pass = emin >= -tol;
        push("W-psd", pass, pass ? 0.0 : -emin, tol);
    }

    if (sys.n4 > 0) {
        double r = sv_ratio(sys.J41);
        push("J41-invertible", r >= opts.invert_tol, r, opts.invert_tol);
    }
    if (sys.n3 > 0) {
        double r = sv_ratio(SpMat(sys.J33 - sys.R33));
        push("A33-invertible", r >= opts.invert_tol, r, opts.invert_tol);
    }

    {
        // Probabilistic regularity check of the pencil at one random
        // unit-magnitude complex point.
        std::mt19937 rng(opts.regularity_seed);
        std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
        Complex lambda0 = std::polar(1.0, u(rng));
        SpCMat pencil = SpCMat(lambda0 * sys.E().cast<Complex>() - sys.A().cast<Complex>());
        pencil.makeCompressed();
        bool ok = true;
        if (sys.n() > 0) {
            Eigen::SparseLU<SpCMat> lu(pencil);
            ok = lu.info() == Eigen::Success &&
                 std::isfinite(lu.logAbsDeterminant().real());
        }
        push("pencil-regular", ok, ok ? 0.0 : 1.0, 0.0);
    }

    return rep;
}

int differentiation_index(const StaircaseSystem& sys) {
    if (sys.n1 != sys.n4) throw StructuralError("n1 != n4");
    if (sys.n1 > 0) return 2;
    return sys.n3 > 0 ? 1 : 0;
}

OperatorBlocks assemble_operator_blocks(const StaircaseSystem& sys) {
    sys.check_dims();
    OperatorBlocks b;
    b.n1 = sys.n1;
    b.n2 = sys.n2;
    b.n3 = sys.n3;
    b.n4 = sys.n4;
    b.m = sys.m;
    b.A11 = SpMat(sys.J11 - sys.R11);
    b.A12 = SpMat(sys.J12 - sys.R12);
    b.A13 = SpMat(sys.J13 - sys.R13);
    b.A14 = sys.J14;
    b.A21 = SpMat(sys.J21 - sys.R21);
    b.A22 = SpMat(sys.J22 - sys.R22);
    b.A23 = SpMat(sys.J23 - sys.R23);
    b.A31 = SpMat(sys.J31 - sys.R31);
    b.A32 = SpMat(sys.J32 - sys.R32);
    b.A33 = SpMat(sys.J33 - sys.R33);
    b.A41 = sys.J41;
    b.B1 = Mat(sys.G1 - sys.P1);
    b.B2 = Mat(sys.G2 - sys.P2);
    b.B3 = Mat(sys.G3 - sys.P3);
    b.B4 = Mat(sys.G4);
    b.C1 = Mat(sys.G1 + sys.P1).transpose();
    b.C2 = Mat(sys.G2 + sys.P2).transpose();
    b.C3 = Mat(sys.G3 + sys.P3).transpose();
    b.C4 = Mat(sys.G4).transpose();
    b.D = sys.S + sys.N;
    return b;
}

double hamiltonian(const StaircaseSystem& sys, const Vec& x) {
    if (x.size() != sys.n()) throw StructuralError("state dimension mismatch");
    Vec x1 = x.segment(0, sys.n1);
    Vec x2 = x.segment(sys.n1, sys.n2);
    return 0.5 * (x1.dot(sys.E11 * x1) + x2.dot(sys.E22 * x2));
}

}  // namespace phdae
