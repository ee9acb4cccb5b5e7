#include "phdae/rosenbrock.hpp"

#include <sstream>

#include <Eigen/LU>

namespace phdae {

namespace {

// LU-backed application of a block inverse from either side.
class BlockInverse {
public:
    explicit BlockInverse(const Mat& a, const char* name) {
        if (a.rows() == 0) return;
        lu_.compute(a);
        luT_.compute(a.transpose());
        // PartialPivLU has no rank query; detect singularity via the
        // reciprocal condition estimate on the residual of a solve.
        double scale = a.cwiseAbs().maxCoeff();
        Mat id = Mat::Identity(a.rows(), a.cols());
        Mat res = a * lu_.solve(id) - id;
        if (!res.allFinite() || res.cwiseAbs().maxCoeff() > 1e-6 * std::max(1.0, scale)) {
            std::ostringstream os;
            os << "block " << name << " is singular or severely ill-conditioned";
            throw NumericalError(os.str());
        }
    }

    // inv(A) * X
    Mat left(const Mat& x) const {
        if (x.rows() == 0) return x;
        return lu_.solve(x);
    }
    // X * inv(A)
    Mat right(const Mat& x) const {
        if (x.cols() == 0) return x;
        return luT_.solve(x.transpose()).transpose();
    }

private:
    Eigen::PartialPivLU<Mat> lu_, luT_;
};

void set_block(Mat& target, Index r0, Index c0, const Mat& b) {
    if (b.rows() == 0 || b.cols() == 0) return;
    target.block(r0, c0, b.rows(), b.cols()) = b;
}

}  // namespace

SseTransform build_transformations(const OperatorBlocks& b) {
    const Index n1 = b.n1, n2 = b.n2, n3 = b.n3, n4 = b.n4, m = b.m;
    const Index nt = n1 + n2 + n3 + n4 + m;

    Mat A13 = dense(b.A13), A23 = dense(b.A23), A31 = dense(b.A31),
        A32 = dense(b.A32), A21 = dense(b.A21), A12 = dense(b.A12);
    Mat A33 = dense(b.A33), A41 = dense(b.A41), A14 = dense(b.A14);

    BlockInverse inv33(A33, "A33 (= J33 - R33)");
    BlockInverse inv41(A41, "A41 (= J41)");
    BlockInverse inv14(A14, "A14 (= -J41^T)");

    SseTransform t;
    t.n1 = n1;
    t.n2 = n2;
    t.n3 = n3;
    t.n4 = n4;
    t.m = m;
    t.T1 = Mat::Zero(nt, nt);
    t.T2 = Mat::Zero(nt, nt);

    const Index o1 = 0, o2 = n1, o3 = n1 + n2, o4 = n1 + n2 + n3, o5 = n1 + n2 + n3 + n4;

    // T1 block rows.
    set_block(t.T1, o1, o1, Mat::Identity(n1, n1));
    set_block(t.T1, o1, o3, -inv33.right(A13));
    set_block(t.T1, o2, o2, Mat::Identity(n2, n2));
    set_block(t.T1, o2, o3, -inv33.right(A23));
    set_block(t.T1, o2, o4, -inv41.right(A21 - inv33.right(A23) * A31));
    set_block(t.T1, o3, o3, inv33.left(Mat::Identity(n3, n3)));
    set_block(t.T1, o4, o4, inv41.left(Mat::Identity(n4, n4)));
    set_block(t.T1, o5, o1, inv14.right(b.C4));
    set_block(t.T1, o5, o3, inv33.right(b.C3 - inv14.right(b.C4) * A13));
    set_block(t.T1, o5, o5, Mat::Identity(m, m));

    // T2 block columns.
    set_block(t.T2, o1, o1, Mat::Identity(n1, n1));
    set_block(t.T2, o2, o2, Mat::Identity(n2, n2));
    set_block(t.T2, o3, o1, -inv33.left(A31));
    set_block(t.T2, o3, o2, -inv33.left(A32));
    set_block(t.T2, o3, o3, Mat::Identity(n3, n3));
    set_block(t.T2, o4, o2, inv14.left(-A12 + A13 * inv33.left(A32)));
    set_block(t.T2, o4, o4, inv14.left(Mat::Identity(n4, n4)));
    set_block(t.T2, o1, o5, -inv41.left(b.B4));
    set_block(t.T2, o3, o5, -inv33.left(Mat(b.B3 - A31 * inv41.left(b.B4))));
    set_block(t.T2, o5, o5, Mat::Identity(m, m));

    return t;
}

Mat dinf_closed_form(const OperatorBlocks& b, const SpMat& E11) {
    if (b.n4 == 0) return Mat::Zero(b.m, b.m);
    Mat A41 = dense(b.A41);
    BlockInverse inv41(A41, "A41 (= J41)");
    Mat X = inv41.left(Mat(b.B4));  // A41^-1 G4, since B4 = G4
    return X.transpose() * Mat(E11) * X;
}

namespace {

void assert_pattern_zero(const Mat& blk, double tol, double scale, const char* what) {
    if (blk.size() == 0) return;
    double v = blk.cwiseAbs().maxCoeff();
    if (v > tol * std::max(1.0, scale)) {
        std::ostringstream os;
        os << "condensed-form pattern violated: block " << what
           << " should vanish, max entry " << v;
        throw NumericalError(os.str());
    }
}

void assert_pattern_identity(const Mat& blk, double sign, double tol, double scale,
                             const char* what) {
    if (blk.size() == 0) return;
    Mat d = blk - sign * Mat::Identity(blk.rows(), blk.cols());
    double v = d.cwiseAbs().maxCoeff();
    if (v > tol * std::max(1.0, scale)) {
        std::ostringstream os;
        os << "condensed-form pattern violated: block " << what
           << " deviates from identity by " << v;
        throw NumericalError(os.str());
    }
}

}  // namespace

ProperSubsystem extract_proper(const StaircaseSystem& sys, const ExtractOptions& opts) {
    OperatorBlocks b = assemble_operator_blocks(sys);
    const Index n1 = b.n1, n2 = b.n2, n3 = b.n3, n4 = b.n4, m = b.m;
    const Index n = n1 + n2 + n3 + n4;

    ProperSubsystem p;
    p.Ep = dense(sys.E22);

    if (n1 == 0 && n3 == 0 && n4 == 0) {
        // Nothing to eliminate; the system is its own proper part.
        p.Ap = dense(b.A22);
        p.Bp = b.B2;
        p.Cp = b.C2;
        p.Dp = b.D;
        p.Dinf = Mat::Zero(m, m);
    } else {
        SseTransform t = build_transformations(b);

        // Pencil coefficients of the Rosenbrock matrix: R(s) = s*Eext + M0
        // with M0 = Gamma + W = [-A, -B; C, D].
        Mat M0 = Mat::Zero(n + m, n + m);
        M0.block(0, 0, n, n) = -dense(sys.A());
        M0.block(0, n, n, m) = -dense(sys.B());
        M0.block(n, 0, m, n) = sys.C();
        M0.block(n, n, m, m) = sys.D();
        Mat M1 = Mat::Zero(n + m, n + m);
        M1.block(0, 0, n, n) = dense(sys.E());

        Mat TM0 = t.T1 * M0 * t.T2;
        Mat TM1 = t.T1 * M1 * t.T2;

        const Index o2 = n1, o3 = n1 + n2, o4 = n1 + n2 + n3, o5 = n;
        p.Ap = -TM0.block(o2, o2, n2, n2);
        p.Bp = -TM0.block(o2, o5, n2, m);
        p.Cp = TM0.block(o5, o2, m, n2);
        p.Dp = TM0.block(o5, o5, m, m);
        p.Dinf = TM1.block(o5, o5, m, m);

        if (opts.verify_pattern) {
            // Ep block of the transformed pencil must reproduce E22.
            Mat ep_blk = TM1.block(o2, o2, n2, n2);
            if (n2 > 0 && (ep_blk - p.Ep).cwiseAbs().maxCoeff() >
                              opts.pattern_tol * std::max(1.0, p.Ep.cwiseAbs().maxCoeff()))
                throw NumericalError("transformed Ep block disagrees with E22");
            double scale0 = M0.cwiseAbs().maxCoeff();
            double scale1 = std::max(M1.cwiseAbs().maxCoeff(), 1.0);
            double tol = opts.pattern_tol;
            assert_pattern_identity(TM0.block(o3, o3, n3, n3), -1.0, tol, scale0, "(3,3)");
            assert_pattern_identity(TM0.block(o4, 0, n4, n1), -1.0, tol, scale0, "(4,1)");
            assert_pattern_identity(TM0.block(0, o4, n1, n4), -1.0, tol, scale0, "(1,4)");
            assert_pattern_zero(TM0.block(0, o2, n1, n2), tol, scale0, "(1,2)");
            assert_pattern_zero(TM0.block(o2, 0, n2, n1), tol, scale0, "(2,1)");
            assert_pattern_zero(TM0.block(o2, o3, n2, n3), tol, scale0, "(2,3)");
            assert_pattern_zero(TM0.block(o2, o4, n2, n4), tol, scale0, "(2,4)");
            assert_pattern_zero(TM0.block(o3, 0, n3, n1), tol, scale0, "(3,1)");
            assert_pattern_zero(TM0.block(o3, o2, n3, n2), tol, scale0, "(3,2)");
            assert_pattern_zero(TM0.block(o3, o4, n3, n4), tol, scale0, "(3,4)");
            assert_pattern_zero(TM0.block(o3, o5, n3, m), tol, scale0, "(3,5)");
            assert_pattern_zero(TM0.block(o4, o2, n4, n2), tol, scale0, "(4,2)");
            assert_pattern_zero(TM0.block(o4, o3, n4, n3), tol, scale0, "(4,3)");
            assert_pattern_zero(TM0.block(o4, o4, n4, n4), tol, scale0, "(4,4)");
            assert_pattern_zero(TM0.block(o4, o5, n4, m), tol, scale0, "(4,5)");
            assert_pattern_zero(TM0.block(o5, o3, m, n3), tol, scale0, "(5,3)");
            assert_pattern_zero(TM0.block(o5, o4, m, n4), tol, scale0, "(5,4)");
            // s-coefficient keeps only blocks (1,1), (2,2), (5,5).
            assert_pattern_zero(TM1.block(o2, o5, n2, m), tol, scale1, "s-(2,5)");
            assert_pattern_zero(TM1.block(o5, o2, m, n2), tol, scale1, "s-(5,2)");

            // Cross-check Ap against the direct Schur-complement formula.
            Mat A33 = dense(b.A33);
            Mat ap_direct = dense(b.A22);
            if (n3 > 0) {
                Eigen::PartialPivLU<Mat> lu33(A33);
                ap_direct -= dense(b.A23) * lu33.solve(dense(b.A32));
            }
            double d = (p.Ap - ap_direct).cwiseAbs().maxCoeff();
            if (d > tol * std::max(1.0, ap_direct.cwiseAbs().maxCoeff()))
                throw NumericalError("extracted Ap disagrees with A22 - A23 A33^-1 A32");
        }
    }

    PhProperForm f = ph_form_of_proper(p.Ap, p.Bp, p.Cp, p.Dp);
    p.Jp = f.Jp;
    p.Rp = f.Rp;
    p.Gp = f.Gp;
    p.Pp = f.Pp;
    p.Sp = f.Sp;
    p.Np = f.Np;
    return p;
}

PhProperForm ph_form_of_proper(const Mat& Ap, const Mat& Bp, const Mat& Cp,
                               const Mat& Dp, double psd_tol) {
    PhProperForm f;
    f.Jp = 0.5 * (Ap - Ap.transpose());
    f.Rp = -0.5 * (Ap + Ap.transpose());
    f.Gp = 0.5 * (Bp + Cp.transpose());
    f.Pp = 0.5 * (Cp.transpose() - Bp);
    f.Sp = 0.5 * (Dp + Dp.transpose());
    f.Np = 0.5 * (Dp - Dp.transpose());

    const Index n2 = Ap.rows(), m = Dp.rows();
    Mat W = Mat::Zero(n2 + m, n2 + m);
    W.topLeftCorner(n2, n2) = f.Rp;
    W.topRightCorner(n2, m) = f.Pp;
    W.bottomLeftCorner(m, n2) = f.Pp.transpose();
    W.bottomRightCorner(m, m) = f.Sp;
    double scale = std::max(1.0, W.size() > 0 ? W.cwiseAbs().maxCoeff() : 0.0);
    double emin = min_eig_sym_dense(W);
    if (emin < -psd_tol * scale)
        throw NumericalError("proper dissipation matrix is indefinite; input is not a pH system");
    return f;
}

CMat proper_transfer_eval(const ProperSubsystem& p, Complex s) {
    const Index m = p.Dp.rows();
    CMat H = p.Dp.cast<Complex>() + s * p.Dinf.cast<Complex>();
    if (p.Ap.rows() > 0) {
        CMat pencil = s * p.Ep.cast<Complex>() - p.Ap.cast<Complex>();
        H += p.Cp.cast<Complex>() * pencil.partialPivLu().solve(p.Bp.cast<Complex>());
    }
    return H;
}

}  // namespace phdae
