#include <doctest.h>

#include <random>

#include "phdae/lyapunov.hpp"
#include "phdae/types.hpp"

using namespace phdae;

namespace {

Mat random_mat(Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> dist;
    Mat a(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) a(i, j) = dist(rng);
    return a;
}

}  // namespace

TEST_CASE("scalar Lyapunov equation") {
    Mat a(1, 1), q(1, 1);
    a << -2.0;
    q << 3.0;
    Mat x = solve_lyapunov(a, q);
    CHECK(std::abs(x(0, 0) - 0.75) <= 1e-14);  // -q / (2a)
}

TEST_CASE("known solution is recovered") {
    for (unsigned seed : {5u, 6u, 7u}) {
        const Index n = 12;
        Mat a = random_mat(n, seed) - 4.0 * Mat::Identity(n, n);  // stable
        Mat x0 = random_mat(n, seed + 100);
        x0 = Mat(0.5 * (x0 + x0.transpose()));
        Mat q = -(a * x0 + x0 * a.transpose());
        Mat x = solve_lyapunov(a, q);
        CHECK((x - x0).norm() <= 1e-10 * std::max(1.0, x0.norm()));
        CHECK((x - x.transpose()).norm() <= 1e-12 * std::max(1.0, x.norm()));
    }
}

TEST_CASE("residual of the computed solution is small") {
    const Index n = 25;
    Mat a = random_mat(n, 42) - 6.0 * Mat::Identity(n, n);
    Mat q = random_mat(n, 43);
    q = Mat(q * q.transpose());  // PSD right-hand side
    Mat x = solve_lyapunov(a, q);
    double res = (a * x + x * a.transpose() + q).norm();
    CHECK(res <= 1e-11 * (2.0 * a.norm() * x.norm() + q.norm()));
}

TEST_CASE("Lyapunov-irregular spectrum is rejected") {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1.0;  // lambda_1 + lambda_2 = 0
    Mat q = Mat::Identity(2, 2);
    CHECK_THROWS_AS(solve_lyapunov(a, q), NumericalError);
}
