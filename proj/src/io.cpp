#include "phdae/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace phdae {

namespace {

constexpr int kFormatVersion = 1;

void write_value(FILE* f, double v) { std::fprintf(f, "%.16e", v); }

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_write(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "w"));
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

}  // namespace

void write_matrix_market(const std::string& path, const SpMat& M) {
    FilePtr f = open_write(path);
    std::fprintf(f.get(), "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f.get(), "%" PRId64 " %" PRId64 " %" PRId64 "\n",
                 static_cast<int64_t>(M.rows()), static_cast<int64_t>(M.cols()),
                 static_cast<int64_t>(M.nonZeros()));
    for (Index c = 0; c < M.outerSize(); ++c)
        for (SpMat::InnerIterator it(M, c); it; ++it) {
            std::fprintf(f.get(), "%" PRId64 " %" PRId64 " ",
                         static_cast<int64_t>(it.row() + 1),
                         static_cast<int64_t>(it.col() + 1));
            write_value(f.get(), it.value());
            std::fprintf(f.get(), "\n");
        }
}

void write_matrix_market_dense(const std::string& path, const Mat& M) {
    FilePtr f = open_write(path);
    std::fprintf(f.get(), "%%%%MatrixMarket matrix array real general\n");
    std::fprintf(f.get(), "%" PRId64 " %" PRId64 "\n",
                 static_cast<int64_t>(M.rows()), static_cast<int64_t>(M.cols()));
    for (Index c = 0; c < M.cols(); ++c)
        for (Index r = 0; r < M.rows(); ++r) {
            write_value(f.get(), M(r, c));
            std::fprintf(f.get(), "\n");
        }
}

namespace {

struct MmHeader {
    bool coordinate = true;
    Index rows = 0, cols = 0, nnz = 0;
};

MmHeader read_header(std::ifstream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty file: " + path);
    std::istringstream banner(line);
    std::string tag, object, format, field, symmetry;
    banner >> tag >> object >> format >> field >> symmetry;
    if (tag != "%%MatrixMarket" || object != "matrix")
        throw IoError("not a Matrix Market file: " + path);
    if (field != "real" || symmetry != "general")
        throw IoError("unsupported Matrix Market variant in " + path);
    MmHeader h;
    if (format == "coordinate")
        h.coordinate = true;
    else if (format == "array")
        h.coordinate = false;
    else
        throw IoError("unsupported Matrix Market format in " + path);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream sizes(line);
        if (h.coordinate) {
            if (!(sizes >> h.rows >> h.cols >> h.nnz))
                throw IoError("bad size line in " + path);
        } else {
            if (!(sizes >> h.rows >> h.cols))
                throw IoError("bad size line in " + path);
            h.nnz = h.rows * h.cols;
        }
        return h;
    }
    throw IoError("missing size line in " + path);
}

}  // namespace

SpMat read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    MmHeader h = read_header(in, path);
    SpMat M(h.rows, h.cols);
    if (h.coordinate) {
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(h.nnz);
        Index r, c;
        double v;
        for (Index k = 0; k < h.nnz; ++k) {
            if (!(in >> r >> c >> v)) throw IoError("truncated entries in " + path);
            if (r < 1 || r > h.rows || c < 1 || c > h.cols)
                throw IoError("entry out of bounds in " + path);
            t.emplace_back(r - 1, c - 1, v);
        }
        M.setFromTriplets(t.begin(), t.end());
    } else {
        Mat D(h.rows, h.cols);
        for (Index c = 0; c < h.cols; ++c)
            for (Index r = 0; r < h.rows; ++r)
                if (!(in >> D(r, c))) throw IoError("truncated entries in " + path);
        M = D.sparseView();
    }
    return M;
}

Mat read_matrix_market_dense(const std::string& path) {
    return Mat(read_matrix_market(path));
}

namespace {

// Fixed serialization order for deterministic bundles.
std::vector<std::pair<std::string, const SpMat*>> sparse_blocks(
    const StaircaseSystem& s) {
    return {{"E11", &s.E11}, {"E22", &s.E22}, {"J11", &s.J11}, {"J12", &s.J12},
            {"J13", &s.J13}, {"J14", &s.J14}, {"J21", &s.J21}, {"J22", &s.J22},
            {"J23", &s.J23}, {"J31", &s.J31}, {"J32", &s.J32}, {"J33", &s.J33},
            {"J41", &s.J41}, {"R11", &s.R11}, {"R12", &s.R12}, {"R13", &s.R13},
            {"R21", &s.R21}, {"R22", &s.R22}, {"R23", &s.R23}, {"R31", &s.R31},
            {"R32", &s.R32}, {"R33", &s.R33}, {"G1", &s.G1},   {"G2", &s.G2},
            {"G3", &s.G3},   {"G4", &s.G4},   {"P1", &s.P1},   {"P2", &s.P2},
            {"P3", &s.P3}};
}

std::vector<std::pair<std::string, SpMat*>> sparse_blocks_mut(StaircaseSystem& s) {
    std::vector<std::pair<std::string, SpMat*>> out;
    for (auto& [name, ptr] : sparse_blocks(s))
        out.emplace_back(name, const_cast<SpMat*>(ptr));
    return out;
}

}  // namespace

void save_model(const StaircaseSystem& sys, const std::string& dir) {
    sys.check_dims();
    fs::create_directories(dir);
    json files = json::object();
    for (auto& [name, block] : sparse_blocks(sys)) {
        std::string fname = name + ".mtx";
        write_matrix_market((fs::path(dir) / fname).string(), *block);
        files[name] = fname;
    }
    write_matrix_market_dense((fs::path(dir) / "S.mtx").string(), sys.S);
    files["S"] = "S.mtx";
    write_matrix_market_dense((fs::path(dir) / "N.mtx").string(), sys.N);
    files["N"] = "N.mtx";

    json manifest;
    manifest["version"] = kFormatVersion;
    manifest["n1"] = sys.n1;
    manifest["n2"] = sys.n2;
    manifest["n3"] = sys.n3;
    manifest["n4"] = sys.n4;
    manifest["m"] = sys.m;
    manifest["files"] = files;
    std::ofstream out(fs::path(dir) / "manifest.json");
    if (!out) throw IoError("cannot write manifest in " + dir);
    out << manifest.dump(2) << "\n";
}

StaircaseSystem load_model(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) throw IoError("missing manifest.json in " + dir);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw IoError(std::string("corrupt manifest.json: ") + e.what());
    }
    if (manifest.value("version", 0) != kFormatVersion)
        throw IoError("unsupported bundle version in " + dir);

    StaircaseSystem sys;
    try {
        sys.n1 = manifest.at("n1").get<Index>();
        sys.n2 = manifest.at("n2").get<Index>();
        sys.n3 = manifest.at("n3").get<Index>();
        sys.n4 = manifest.at("n4").get<Index>();
        sys.m = manifest.at("m").get<Index>();
    } catch (const json::exception& e) {
        throw IoError(std::string("manifest dimensions missing: ") + e.what());
    }
    const json& files = manifest.at("files");
    auto path_of = [&](const std::string& name) {
        if (!files.contains(name)) throw IoError("manifest lacks block " + name);
        return (fs::path(dir) / files.at(name).get<std::string>()).string();
    };
    for (auto& [name, block] : sparse_blocks_mut(sys))
        *block = read_matrix_market(path_of(name));
    sys.S = read_matrix_market_dense(path_of("S"));
    sys.N = read_matrix_market_dense(path_of("N"));
    try {
        sys.check_dims();
    } catch (const StructuralError& e) {
        throw IoError(std::string("bundle dimensions inconsistent: ") + e.what());
    }
    return sys;
}

}  // namespace phdae
