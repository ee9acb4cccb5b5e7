#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "phdae/io.hpp"
#include "test_helpers.hpp"

using namespace phdae;
using namespace phdae_test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("phdae-io-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("sparse Matrix Market round-trip") {
    TempDir tmp;
    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    Mat dense_m = Mat::Zero(7, 5);
    for (int k = 0; k < 12; ++k)
        dense_m(rng() % 7, rng() % 5) = dist(rng);
    SpMat M(dense_m.sparseView());
    std::string path = (tmp.path / "m.mtx").string();
    write_matrix_market(path, M);
    SpMat back = read_matrix_market(path);
    CHECK(back.rows() == 7);
    CHECK(back.cols() == 5);
    CHECK((dense(back) - dense_m).norm() == 0.0);
}

TEST_CASE("dense Matrix Market round-trip including an empty matrix") {
    TempDir tmp;
    Mat M(3, 4);
    M << 1.0, -2.5, 1e-17, 3.0, 0.0, 4.0, 5.0, -6.0, 7.125,
        8.0, 9.0, 1e300;
    std::string path = (tmp.path / "d.mtx").string();
    write_matrix_market_dense(path, M);
    Mat back = read_matrix_market_dense(path);
    CHECK((back - M).norm() == 0.0);

    std::string epath = (tmp.path / "e.mtx").string();
    write_matrix_market_dense(epath, Mat(0, 3));
    Mat eback = read_matrix_market_dense(epath);
    CHECK(eback.rows() == 0);
    CHECK(eback.cols() == 3);
}

TEST_CASE("reading a missing or malformed file raises IoError") {
    TempDir tmp;
    CHECK_THROWS_AS(read_matrix_market((tmp.path / "nope.mtx").string()), IoError);
    std::string bad = (tmp.path / "bad.mtx").string();
    std::ofstream(bad) << "this is not a matrix\n";
    CHECK_THROWS_AS(read_matrix_market(bad), IoError);
}

TEST_CASE("model save/load round-trip is exact") {
    for (Category cat : all_categories()) {
        TempDir tmp;
        StaircaseSystem sys = make_system(cat, 59);
        save_model(sys, tmp.path.string());
        StaircaseSystem back = load_model(tmp.path.string());
        CHECK(back.n1 == sys.n1);
        CHECK(back.n2 == sys.n2);
        CHECK(back.n3 == sys.n3);
        CHECK(back.n4 == sys.n4);
        CHECK(back.m == sys.m);
        CHECK((dense(back.E()) - dense(sys.E())).norm() == 0.0);
        CHECK((dense(back.J()) - dense(sys.J())).norm() == 0.0);
        CHECK((dense(back.R()) - dense(sys.R())).norm() == 0.0);
        CHECK((dense(back.G()) - dense(sys.G())).norm() == 0.0);
        CHECK((dense(back.P()) - dense(sys.P())).norm() == 0.0);
        CHECK((back.S - sys.S).norm() == 0.0);
        CHECK((back.N - sys.N).norm() == 0.0);
        CHECK(validate_staircase(back).valid());
    }
}

TEST_CASE("saving twice produces identical bytes") {
    TempDir a, b;
    StaircaseSystem sys = make_system(Category::ImproperIndex12, 61);
    save_model(sys, a.path.string());
    save_model(sys, b.path.string());
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a.path)) {
        ++files;
        fs::path twin = b.path / entry.path().filename();
        REQUIRE(fs::exists(twin));
        CHECK(slurp(entry.path()) == slurp(twin));
    }
    CHECK(files > 0);
}

TEST_CASE("a corrupted manifest names the offending block") {
    TempDir tmp;
    StaircaseSystem sys = make_system(Category::Index1, 67);
    save_model(sys, tmp.path.string());

    SUBCASE("dimension mismatch") {
        fs::path manifest = tmp.path / "manifest.json";
        std::string text = slurp(manifest);
        std::string needle = "\"n2\": " + std::to_string(sys.n2);
        auto pos = text.find(needle);
        REQUIRE(pos != std::string::npos);
        text.replace(pos, needle.size(), "\"n2\": " + std::to_string(sys.n2 + 1));
        std::ofstream(manifest, std::ios::binary) << text;
        try {
            load_model(tmp.path.string());
            FAIL("expected IoError");
        } catch (const IoError& e) {
            // The message must point at a concrete mis-sized block.
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }

    SUBCASE("missing block file") {
        REQUIRE(fs::exists(tmp.path / "E22.mtx"));
        fs::remove(tmp.path / "E22.mtx");
        CHECK_THROWS_AS(load_model(tmp.path.string()), IoError);
    }

    SUBCASE("missing manifest") {
        fs::remove(tmp.path / "manifest.json");
        CHECK_THROWS_AS(load_model(tmp.path.string()), IoError);
    }
}
