#include "phdae/generate.hpp"

#include <algorithm>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace phdae {

namespace {

using Triplet = Eigen::Triplet<double>;

SpMat from_triplets(Index r, Index c, std::vector<Triplet>& t) {
    SpMat m(r, c);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

SpMat zeros(Index r, Index c) { return SpMat(r, c); }

}  // namespace

Category category_from_string(const std::string& s) {
    if (s == "index-0") return Category::Index0;
    if (s == "index-1") return Category::Index1;
    if (s == "proper-index-2") return Category::ProperIndex2;
    if (s == "improper-index-2") return Category::ImproperIndex2;
    if (s == "proper-index-1-2") return Category::ProperIndex12;
    if (s == "improper-index-1-2") return Category::ImproperIndex12;
    throw StructuralError("unknown category: " + s);
}

std::string to_string(Category c) {
    switch (c) {
        case Category::Index0: return "index-0";
        case Category::Index1: return "index-1";
        case Category::ProperIndex2: return "proper-index-2";
        case Category::ImproperIndex2: return "improper-index-2";
        case Category::ProperIndex12: return "proper-index-1-2";
        case Category::ImproperIndex12: return "improper-index-1-2";
    }
    throw StructuralError("invalid category value");
}

void GeneratorSpec::check() const {
    if (n2 <= 0) throw StructuralError("n2 must be positive in every category");
    auto want = [this](bool idx2, bool idx1) {
        if (idx2 && (n1 <= 0 || n1 != n4))
            throw StructuralError("index-2 categories require n1 = n4 > 0");
        if (!idx2 && (n1 != 0 || n4 != 0))
            throw StructuralError("category requires n1 = n4 = 0");
        if (idx1 && n3 <= 0) throw StructuralError("category requires n3 > 0");
        if (!idx1 && n3 != 0) throw StructuralError("category requires n3 = 0");
    };
    switch (category) {
        case Category::Index0: want(false, false); break;
        case Category::Index1: want(false, true); break;
        case Category::ProperIndex2:
        case Category::ImproperIndex2: want(true, false); break;
        case Category::ProperIndex12:
        case Category::ImproperIndex12: want(true, true); break;
    }
    if (m <= 0) throw StructuralError("m must be positive");
}

namespace {

struct Rng {
    std::mt19937 gen;
    std::uniform_real_distribution<double> uni{-1.0, 1.0};
    explicit Rng(unsigned seed) : gen(seed) {}
    double operator()() { return uni(gen); }
    double positive(double lo, double hi) {
        return lo + (hi - lo) * 0.5 * (uni(gen) + 1.0);
    }
};

// Banded symmetric positive definite matrix, diagonally dominant.
SpMat banded_spd(Index n, Index bw, Rng& rng) {
    std::vector<Triplet> t;
    std::vector<double> rowsum(n, 0.0);
    std::vector<Triplet> off;
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j <= std::min(n - 1, i + bw); ++j) {
            double v = 0.3 * rng();
            off.emplace_back(i, j, v);
            off.emplace_back(j, i, v);
            rowsum[i] += std::abs(v);
            rowsum[j] += std::abs(v);
        }
    for (auto& e : off) t.push_back(e);
    for (Index i = 0; i < n; ++i)
        t.emplace_back(i, i, rowsum[i] + rng.positive(0.5, 1.5));
    return from_triplets(n, n, t);
}

// Banded random block; skew = true produces a skew-symmetric square block.
SpMat banded_random(Index rows, Index cols, Index bw, double scale, Rng& rng,
                    bool skew = false) {
    std::vector<Triplet> t;
    if (skew) {
        for (Index i = 0; i < rows; ++i)
            for (Index j = i + 1; j <= std::min(cols - 1, i + bw); ++j) {
                double v = scale * rng();
                t.emplace_back(i, j, v);
                t.emplace_back(j, i, -v);
            }
    } else {
        for (Index i = 0; i < rows; ++i)
            for (Index j = std::max<Index>(0, i - bw); j <= std::min(cols - 1, i + bw); ++j)
                t.emplace_back(i, j, scale * rng());
    }
    return from_triplets(rows, cols, t);
}

}  // namespace

StaircaseSystem generate_staircase(const GeneratorSpec& spec) {
    spec.check();
    Rng rng(spec.seed);
    const Index n1 = spec.n1, n2 = spec.n2, n3 = spec.n3, n4 = spec.n4, m = spec.m;
    const Index bw = spec.bandwidth;
    const double cpl = spec.coupling;

    StaircaseSystem s;
    s.n1 = n1;
    s.n2 = n2;
    s.n3 = n3;
    s.n4 = n4;
    s.m = m;

    s.E11 = banded_spd(n1, bw, rng);
    s.E22 = banded_spd(n2, bw, rng);

    s.J11 = banded_random(n1, n1, bw, cpl, rng, true);
    s.J22 = banded_random(n2, n2, bw, cpl, rng, true);
    s.J33 = banded_random(n3, n3, bw, cpl, rng, true);
    s.J12 = banded_random(n1, n2, bw, cpl, rng);
    s.J21 = SpMat(-SpMat(s.J12.transpose()));
    s.J13 = banded_random(n1, n3, bw, cpl, rng);
    s.J31 = SpMat(-SpMat(s.J13.transpose()));
    s.J23 = banded_random(n2, n3, bw, cpl, rng);
    s.J32 = SpMat(-SpMat(s.J23.transpose()));
    // J41 = I + small banded perturbation keeps it invertible.
    {
        SpMat pert = banded_random(n4, n1, bw, 0.1 * cpl, rng);
        SpMat eye(n4, n1);
        eye.setIdentity();
        s.J41 = SpMat(eye + pert);
        s.J14 = SpMat(-SpMat(s.J41.transpose()));
    }

    // R from banded Cholesky-like factors over blocks 1-3: strictly
    // positive definite there, so R33 (hence J33 - R33) stays invertible.
    const Index ntop = n1 + n2 + n3;
    SpMat Rtop;
    {
        std::vector<Triplet> t;
        for (Index i = 0; i < ntop; ++i) {
            t.emplace_back(i, i, rng.positive(0.3, 1.0));
            for (Index j = std::max<Index>(0, i - bw); j < i; ++j)
                t.emplace_back(i, j, 0.3 * cpl * rng());
        }
        SpMat L = from_triplets(ntop, ntop, t);
        Rtop = SpMat(L * SpMat(L.transpose()));
    }
    auto blk = [&Rtop](Index r0, Index c0, Index rows, Index cols) {
        return SpMat(Rtop.block(r0, c0, rows, cols));
    };
    s.R11 = blk(0, 0, n1, n1);
    s.R12 = blk(0, n1, n1, n2);
    s.R13 = blk(0, n1 + n2, n1, n3);
    s.R21 = blk(n1, 0, n2, n1);
    s.R22 = blk(n1, n1, n2, n2);
    s.R23 = blk(n1, n1 + n2, n2, n3);
    s.R31 = blk(n1 + n2, 0, n3, n1);
    s.R32 = blk(n1 + n2, n1, n3, n2);
    s.R33 = blk(n1 + n2, n1 + n2, n3, n3);

    // Input maps.
    s.G1 = banded_random(n1, m, std::max<Index>(bw, m), cpl, rng);
    s.G2 = banded_random(n2, m, std::max<Index>(bw, m), cpl, rng);
    s.G3 = banded_random(n3, m, std::max<Index>(bw, m), cpl, rng);
    const bool improper = spec.category == Category::ImproperIndex2 ||
                          spec.category == Category::ImproperIndex12;
    if (improper) {
        Mat g4(n4, m);
        for (Index i = 0; i < n4; ++i)
            for (Index j = 0; j < m; ++j) g4(i, j) = rng() + ((i == j) ? 1.0 : 0.0);
        s.G4 = g4.sparseView();
    } else {
        s.G4 = zeros(n4, m);
    }

    // Symmetric PSD feedthrough and skew part.
    Mat f(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) f(i, j) = rng();
    s.S = f * f.transpose() + 0.1 * Mat::Identity(m, m);
    Mat nn = Mat::Zero(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = i + 1; j < m; ++j) {
            double v = cpl * rng();
            nn(i, j) = v;
            nn(j, i) = -v;
        }
    s.N = nn;

    // P sampled as R^(1/2) Z S^(1/2) with ||Z|| < 1, which keeps the
    // extended dissipation matrix PSD by the Schur complement condition.
    s.P1 = zeros(n1, m);
    s.P2 = zeros(n2, m);
    s.P3 = zeros(n3, m);
    if (spec.with_feedthrough_coupling && ntop <= 1500 && ntop > 0) {
        Mat Rd = Mat(Rtop);
        Eigen::SelfAdjointEigenSolver<Mat> es(Rd);
        Mat rsqrt = es.operatorSqrt();
        Eigen::SelfAdjointEigenSolver<Mat> ess(s.S);
        Mat ssqrt = ess.operatorSqrt();
        Mat Z(ntop, m);
        for (Index i = 0; i < ntop; ++i)
            for (Index j = 0; j < m; ++j) Z(i, j) = rng();
        Eigen::JacobiSVD<Mat> svd(Z);
        double zn = svd.singularValues()(0);
        if (zn > 0) Z *= 0.9 / zn;
        Mat Ptop = rsqrt * Z * ssqrt;
        s.P1 = Ptop.topRows(n1).sparseView();
        s.P2 = Ptop.middleRows(n1, n2).sparseView();
        s.P3 = Ptop.bottomRows(n3).sparseView();
    }

    s.check_dims();
    return s;
}

LadderParams LadderParams::make(Index cells, double c_base, double l_base,
                                double r_base, unsigned seed) {
    Rng rng(seed);
    LadderParams p;
    p.capacitance = Vec(cells);
    p.inductance = Vec(std::max<Index>(cells - 1, 0));
    p.resistance = Vec(std::max<Index>(cells - 1, 0));
    for (Index i = 0; i < cells; ++i)
        p.capacitance(i) = c_base * rng.positive(0.8, 1.2);
    for (Index i = 0; i + 1 < cells; ++i) {
        p.inductance(i) = l_base * rng.positive(0.8, 1.2);
        p.resistance(i) = r_base * rng.positive(0.8, 1.2);
    }
    p.rs_in = r_base;
    p.rs_out = r_base;
    p.load = r_base;
    p.c_port = c_base;
    return p;
}

namespace {

StaircaseSystem ladder_index1(Index c, const LadderParams& p) {
    // x2 = [v_1..v_c, iL_1..iL_{c-1}], x3 = [a_1..a_{c-1}, b_1, b_2].
    const Index n2 = 2 * c - 1;
    const Index n3 = c + 1;
    const Index m = 2;
    const Index iv = 0;       // offset of v block in x2
    const Index il = c;       // offset of iL block in x2
    const Index ia = 0;       // offset of a block in x3
    const Index ib = c - 1;   // offset of b block in x3

    std::vector<Triplet> e22, j22, j23, r22, r23, r33, p2;
    for (Index i = 0; i < c; ++i) e22.emplace_back(iv + i, iv + i, p.capacitance(i));
    for (Index i = 0; i + 1 < c; ++i) e22.emplace_back(il + i, il + i, p.inductance(i));

    for (Index i = 0; i + 1 < c; ++i) {
        // node v_i loses iL_i, inductor sees +v_i.
        j22.emplace_back(iv + i, il + i, -1.0);
        j22.emplace_back(il + i, iv + i, 1.0);
        // inductor sees -v_{a_i}; node a_i receives iL_i.
        j23.emplace_back(il + i, ia + i, -1.0);
        // resistor a_i -> v_{i+1} with conductance g.
        double g = 1.0 / p.resistance(i);
        r33.emplace_back(ia + i, ia + i, g);
        r22.emplace_back(iv + i + 1, iv + i + 1, g);
        r23.emplace_back(iv + i + 1, ia + i, -g);
    }
    // ports at v_1 and v_c through source resistors.
    double g_in = 1.0 / p.rs_in, g_out = 1.0 / p.rs_out;
    r22.emplace_back(iv + 0, iv + 0, g_in);
    r22.emplace_back(iv + c - 1, iv + c - 1, g_out);
    p2.emplace_back(iv + 0, 0, -g_in);
    p2.emplace_back(iv + c - 1, 1, -g_out);
    // trailing resistive chain v_c - b1 - b2 - ground.
    double gl = 1.0 / p.load;
    r22.emplace_back(iv + c - 1, iv + c - 1, gl);
    r23.emplace_back(iv + c - 1, ib + 0, -gl);
    r33.emplace_back(ib + 0, ib + 0, 2.0 * gl);
    r33.emplace_back(ib + 0, ib + 1, -gl);
    r33.emplace_back(ib + 1, ib + 0, -gl);
    r33.emplace_back(ib + 1, ib + 1, 2.0 * gl);

    StaircaseSystem s;
    s.n1 = 0;
    s.n2 = n2;
    s.n3 = n3;
    s.n4 = 0;
    s.m = m;
    s.E11 = zeros(0, 0);
    s.E22 = from_triplets(n2, n2, e22);
    s.J11 = zeros(0, 0);
    s.J12 = zeros(0, n2);
    s.J13 = zeros(0, n3);
    s.J14 = zeros(0, 0);
    s.J21 = zeros(n2, 0);
    s.J22 = from_triplets(n2, n2, j22);
    s.J23 = from_triplets(n2, n3, j23);
    s.J31 = zeros(n3, 0);
    s.J32 = SpMat(-SpMat(s.J23.transpose()));
    s.J33 = zeros(n3, n3);
    s.J41 = zeros(0, 0);
    s.R11 = zeros(0, 0);
    s.R12 = zeros(0, n2);
    s.R13 = zeros(0, n3);
    s.R21 = zeros(n2, 0);
    s.R22 = from_triplets(n2, n2, r22);
    s.R23 = from_triplets(n2, n3, r23);
    s.R31 = zeros(n3, 0);
    s.R32 = SpMat(SpMat(s.R23.transpose()));
    s.R33 = from_triplets(n3, n3, r33);
    s.G1 = zeros(0, m);
    s.G2 = zeros(n2, m);
    s.G3 = zeros(n3, m);
    s.G4 = zeros(0, m);
    s.P1 = zeros(0, m);
    s.P2 = from_triplets(n2, m, p2);
    s.P3 = zeros(n3, m);
    s.S = Mat::Zero(m, m);
    s.S(0, 0) = g_in;
    s.S(1, 1) = g_out;
    s.N = Mat::Zero(m, m);
    s.check_dims();
    return s;
}

StaircaseSystem ladder_index12(Index c, const LadderParams& p) {
    // x1 = [v0] (port capacitor), x4 = [i_s] (source current),
    // x2 = [v_1..v_{c-1}, iL_0..iL_{c-1}], x3 = [a_0..a_{c-2}, b_1].
    // Inductor branch j (j = 0..c-2): v_j -> a_j -> resistor -> v_{j+1},
    // where v_0 is the x1 node. Trailing inductor iL_{c-1} from v_{c-1}
    // to ground with a small series resistance.
    const Index nv = c - 1;
    const Index nl = c;
    const Index n2 = nv + nl;  // = 2c - 1
    const Index na = c - 1;
    const Index n3 = na + 1;   // = c
    const Index m = 1;
    const Index iv = 0, il = nv, ia = 0, ib = na;

    auto cap = [&p, nv](Index i) {
        // capacitance vector holds c entries: index 0 is unused spare
        // for this variant; use entries 1..c-1 for v_1..v_{c-1}.
        return p.capacitance(std::min<Index>(i + 1, p.capacitance.size() - 1));
    };
    auto ind = [&p](Index j) {
        return p.inductance.size() > 0 ? p.inductance(std::min<Index>(j, p.inductance.size() - 1))
                                       : 1.0;
    };
    auto res = [&p](Index j) {
        return p.resistance.size() > 0 ? p.resistance(std::min<Index>(j, p.resistance.size() - 1))
                                       : 1.0;
    };

    std::vector<Triplet> e22, j12, j22, j23, r22, r23, r33;
    for (Index i = 0; i < nv; ++i) e22.emplace_back(iv + i, iv + i, cap(i));
    for (Index j = 0; j < nl; ++j) e22.emplace_back(il + j, il + j, ind(j));

    // Branch 0 leaves the x1 node (absent in the single-cell case, where
    // the only inductor is the trailing one handled below).
    if (c > 1) j12.emplace_back(0, il + 0, -1.0);
    for (Index j = 0; j + 1 < c; ++j) {
        if (j > 0) {
            j22.emplace_back(iv + j - 1, il + j, -1.0);
            j22.emplace_back(il + j, iv + j - 1, 1.0);
        }
        j23.emplace_back(il + j, ia + j, -1.0);
        double g = 1.0 / res(j);
        r33.emplace_back(ia + j, ia + j, g);
        r22.emplace_back(iv + j, iv + j, g);
        r23.emplace_back(iv + j, ia + j, -g);
    }
    // Trailing grounded inductor with series resistance off v_{c-1}
    // (or off the x1 node when c == 1).
    if (nv > 0) {
        j22.emplace_back(iv + nv - 1, il + nl - 1, -1.0);
        j22.emplace_back(il + nl - 1, iv + nv - 1, 1.0);
    } else {
        j12.emplace_back(0, il + nl - 1, -1.0);
    }
    r22.emplace_back(il + nl - 1, il + nl - 1, 0.1 * res(0));
    // Load chain: last dynamic node - b1 - ground.
    double gl = 1.0 / p.load;
    if (nv > 0) {
        r22.emplace_back(iv + nv - 1, iv + nv - 1, gl);
        r23.emplace_back(iv + nv - 1, ib, -gl);
        r33.emplace_back(ib, ib, 2.0 * gl);
    } else {
        r33.emplace_back(ib, ib, 2.0 * gl);  // b1 between x1 node and ground
    }

    StaircaseSystem s;
    s.n1 = 1;
    s.n2 = n2;
    s.n3 = n3;
    s.n4 = 1;
    s.m = m;
    std::vector<Triplet> e11{{0, 0, p.c_port}};
    s.E11 = from_triplets(1, 1, e11);
    s.E22 = from_triplets(n2, n2, e22);
    s.J11 = zeros(1, 1);
    s.J12 = from_triplets(1, n2, j12);
    s.J13 = zeros(1, n3);
    std::vector<Triplet> j14{{0, 0, -1.0}}, j41{{0, 0, 1.0}};
    s.J14 = from_triplets(1, 1, j14);
    s.J41 = from_triplets(1, 1, j41);
    s.J21 = SpMat(-SpMat(s.J12.transpose()));
    s.J22 = from_triplets(n2, n2, j22);
    s.J23 = from_triplets(n2, n3, j23);
    s.J31 = zeros(n3, 1);
    s.J32 = SpMat(-SpMat(s.J23.transpose()));
    s.J33 = zeros(n3, n3);
    s.R11 = zeros(1, 1);
    s.R12 = zeros(1, n2);
    s.R13 = zeros(1, n3);
    s.R21 = zeros(n2, 1);
    s.R22 = from_triplets(n2, n2, r22);
    s.R23 = from_triplets(n2, n3, r23);
    s.R31 = zeros(n3, 1);
    s.R32 = SpMat(SpMat(s.R23.transpose()));
    s.R33 = from_triplets(n3, n3, r33);
    s.G1 = zeros(1, m);
    s.G2 = zeros(n2, m);
    s.G3 = zeros(n3, m);
    std::vector<Triplet> g4{{0, 0, -1.0}};
    s.G4 = from_triplets(1, m, g4);
    s.P1 = zeros(1, m);
    s.P2 = zeros(n2, m);
    s.P3 = zeros(n3, m);
    s.S = Mat::Zero(m, m);
    // Optional shunt resistor directly across the source terminals: a
    // pure dissipative feedthrough of 1/r_shunt.
    if (p.r_shunt > 0) s.S(0, 0) = 1.0 / p.r_shunt;
    s.N = Mat::Zero(m, m);
    s.check_dims();
    return s;
}

}  // namespace

StaircaseSystem generate_rcl_ladder(Index cells, const LadderParams& params,
                                    LadderVariant variant) {
    if (cells < 1) throw StructuralError("ladder needs at least one cell");
    for (Index i = 0; i < params.capacitance.size(); ++i)
        if (params.capacitance(i) <= 0) throw StructuralError("nonpositive capacitance");
    for (Index i = 0; i < params.inductance.size(); ++i)
        if (params.inductance(i) <= 0) throw StructuralError("nonpositive inductance");
    for (Index i = 0; i < params.resistance.size(); ++i)
        if (params.resistance(i) <= 0) throw StructuralError("nonpositive resistance");
    if (params.rs_in <= 0 || params.rs_out <= 0 || params.load <= 0 || params.c_port <= 0)
        throw StructuralError("nonpositive port/load parameter");
    if (params.r_shunt < 0)
        throw StructuralError("negative shunt resistance");

    if (variant == LadderVariant::Index1Like) return ladder_index1(cells, params);
    return ladder_index12(cells, params);
}

}  // namespace phdae
