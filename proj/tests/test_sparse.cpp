#include <doctest.h>

#include <random>

#include "hcx/sparse.hpp"

using namespace hcx;

namespace {

// SPD test matrix: 1D Laplacian plus identity on n nodes
SparseMatrix laplacian_plus_identity(int n) {
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i) {
        trips.push_back({i, i, 3.0});
        if (i + 1 < n) {
            trips.push_back({i, i + 1, -1.0});
            trips.push_back({i + 1, i, -1.0});
        }
    }
    return SparseMatrix::from_triplets(n, std::move(trips));
}

} // namespace

TEST_CASE("triplet assembly sums duplicates") {
    SparseMatrix A = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 1.0},
                                                     {0, 1, 0.5}, {1, 0, 0.5}});
    CHECK(A.row_value(0, 0) == 3.0);
    CHECK(A.row_value(0, 1) == 0.5);
    CHECK(A.row_value(1, 1) == 1.0);
    CHECK(A.row_value(1, 0) == 0.5);
    CHECK(A.row_value(0, 5) == 0.0);
}

TEST_CASE("skyline Cholesky solves an SPD system to machine precision") {
    const int n = 200;
    SparseMatrix A = laplacian_plus_identity(n);
    std::vector<int> keep(n);
    for (int i = 0; i < n; ++i)
        keep[(std::size_t)i] = i;
    SkylineCholesky chol(A, keep);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x_true(n);
    for (auto& v : x_true)
        v = dist(rng);
    std::vector<double> b = A.multiply(x_true);
    std::vector<double> x = b;
    chol.solve_inplace(x);
    double err = 0.0;
    for (int i = 0; i < n; ++i)
        err = std::max(err, std::abs(x[(std::size_t)i] - x_true[(std::size_t)i]));
    CHECK(err < 1e-12);
}

TEST_CASE("skyline Cholesky on a node subset solves the submatrix") {
    const int n = 50;
    SparseMatrix A = laplacian_plus_identity(n);
    std::vector<int> keep;
    for (int i = 10; i < 40; ++i)
        keep.push_back(i);
    SkylineCholesky chol(A, keep);
    std::vector<double> b(keep.size(), 1.0);
    std::vector<double> x = b;
    chol.solve_inplace(x);
    // residual of the submatrix system
    for (std::size_t i = 0; i < keep.size(); ++i) {
        double r = -b[i];
        for (std::size_t j = 0; j < keep.size(); ++j)
            r += A.row_value(keep[i], keep[j]) * x[j];
        CHECK(std::abs(r) < 1e-13);
    }
}

TEST_CASE("skyline Cholesky rejects indefinite matrices") {
    SparseMatrix A = SparseMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0},
                                                     {1, 1, 1.0}});
    std::vector<int> keep{0, 1};
    CHECK_THROWS_AS(SkylineCholesky(A, keep), SolverDiverged);
}

TEST_CASE("dense SPD solver matches hand inversion and rejects bad input") {
    DenseSPD spd({{4.0, 1.0}, {1.0, 3.0}});
    const auto x = spd.solve({1.0, 2.0});
    // inverse of [[4,1],[1,3]] is [[3,-1],[-1,4]]/11
    CHECK(x[0] == doctest::Approx((3.0 * 1 - 1 * 2) / 11.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx((-1.0 * 1 + 4 * 2) / 11.0).epsilon(1e-14));
    CHECK_THROWS_AS(DenseSPD({{1.0, 5.0}, {5.0, 1.0}}), NotSPD);
    CHECK_THROWS_AS(DenseSPD({{1.0, 0.5}, {0.2, 1.0}}), NotSPD);
}

TEST_CASE("quadratic form is symmetric") {
    const int n = 64;
    SparseMatrix A = laplacian_plus_identity(n);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> u(n), v(n);
    for (int i = 0; i < n; ++i) {
        u[(std::size_t)i] = dist(rng);
        v[(std::size_t)i] = dist(rng);
    }
    const double uv = A.quadratic(u, v);
    const double vu = A.quadratic(v, u);
    CHECK(uv == doctest::Approx(vu).epsilon(1e-12));
}
