#include <cmath>
#include <random>

#include "doctest.h"

#include "multires/matrix_game.hpp"

using namespace multires;

namespace {

double best_row_guarantee(const PayoffMatrix& m, const std::vector<double>& x) {
    double worst = 1e300;
    for (int j = 0; j < m.cols(); ++j) {
        double t = 0.0;
        for (int i = 0; i < m.rows(); ++i) t += x[i] * m.at(i, j);
        worst = std::min(worst, t);
    }
    return worst;
}

double best_col_guarantee(const PayoffMatrix& m, const std::vector<double>& y) {
    double worst = -1e300;
    for (int i = 0; i < m.rows(); ++i) {
        double t = 0.0;
        for (int j = 0; j < m.cols(); ++j) t += m.at(i, j) * y[j];
        worst = std::max(worst, t);
    }
    return worst;
}

PayoffMatrix random_matrix(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(1, 4), entry(-9, 9);
    PayoffMatrix m(size(rng), size(rng));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) m.at(i, j) = entry(rng);
    return m;
}

}  // namespace

TEST_CASE("2x2 equalization example") {
    // row mix equalizes columns: 3x - 2(1-x) = -x + 4(1-x) => x = 0.6, v = 1
    const auto sol = solve_matrix_game({{3, -1}, {-2, 4}});
    CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-9));
    REQUIRE(sol.row_mix.size() == 2);
    REQUIRE(sol.col_mix.size() == 2);
    CHECK(std::fabs(sol.row_mix[0] - 0.6) < 1e-9);
    CHECK(std::fabs(sol.row_mix[1] - 0.4) < 1e-9);
    CHECK(std::fabs(sol.col_mix[0] - 0.5) < 1e-9);
    CHECK(std::fabs(sol.col_mix[1] - 0.5) < 1e-9);
}

TEST_CASE("matching pennies") {
    const auto sol = solve_matrix_game({{1, -1}, {-1, 1}});
    CHECK(std::fabs(sol.value) < 1e-9);
    CHECK(std::fabs(sol.row_mix[0] - 0.5) < 1e-9);
    CHECK(std::fabs(sol.col_mix[0] - 0.5) < 1e-9);
}

TEST_CASE("constant matrix is exact") {
    for (const double c : {7.0, -3.0, 0.0}) {
        const auto sol = solve_matrix_game({{c, c}, {c, c}});
        CHECK(sol.value == c);  // exact, not approximate
        double rs = 0.0, cs = 0.0;
        for (double p : sol.row_mix) rs += p;
        for (double p : sol.col_mix) cs += p;
        CHECK(rs == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(cs == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("oracle: closed forms") {
    CHECK(support_enumeration_oracle({{3, -1}, {-2, 4}}) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(support_enumeration_oracle({{0}}) == 0.0);
    // pure saddle at (row 0, col 0): max of row minima = min of column maxima = 2
    CHECK(support_enumeration_oracle({{2, 3}, {1, 5}}) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("oracle budget") {
    PayoffMatrix m(5, 2, 0.0);
    CHECK_THROWS_AS(support_enumeration_oracle(m), OracleBudgetError);
}

TEST_CASE("empty and malformed matrices") {
    CHECK_THROWS_AS(solve_matrix_game(PayoffMatrix(0, 0)), ValidationError);
    PayoffMatrix bad(1, 1);
    bad.at(0, 0) = std::nan("");
    CHECK_THROWS_AS(solve_matrix_game(bad), ValidationError);
}

TEST_CASE("LP agrees with the support-enumeration oracle") {
    std::mt19937_64 rng(12345);
    for (int t = 0; t < 100; ++t) {
        const PayoffMatrix m = random_matrix(rng);
        const double lp = solve_matrix_game(m).value;
        const double oracle = support_enumeration_oracle(m);
        CAPTURE(t);
        CHECK(std::fabs(lp - oracle) <= 1e-6);
    }
}

TEST_CASE("saddle conditions and duality gap at returned solutions") {
    std::mt19937_64 rng(777);
    const double tol = 1e-9;
    for (int t = 0; t < 50; ++t) {
        const PayoffMatrix m = random_matrix(rng);
        const auto sol = solve_matrix_game(m, tol);
        const double lo = best_row_guarantee(m, sol.row_mix);
        const double hi = best_col_guarantee(m, sol.col_mix);
        CHECK(lo >= sol.value - tol * 10);
        CHECK(hi <= sol.value + tol * 10);
        CHECK(std::fabs(lo - hi) <= 2 * tol * 10);
    }
}

TEST_CASE("shift invariance") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 20; ++t) {
        const PayoffMatrix m = random_matrix(rng);
        for (const double c : {5.0, -4.0}) {
            PayoffMatrix shifted(m.rows(), m.cols());
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j) shifted.at(i, j) = m.at(i, j) + c;
            const auto a = solve_matrix_game(m);
            const auto b = solve_matrix_game(shifted);
            CHECK(std::fabs(b.value - (a.value + c)) <= 2e-9);
            for (int i = 0; i < m.rows(); ++i)
                CHECK(std::fabs(a.row_mix[i] - b.row_mix[i]) <= 1e-9);
            for (int j = 0; j < m.cols(); ++j)
                CHECK(std::fabs(a.col_mix[j] - b.col_mix[j]) <= 1e-9);
        }
    }
}

TEST_CASE("antisymmetry under transpose-negation") {
    std::mt19937_64 rng(4242);
    for (int t = 0; t < 30; ++t) {
        const PayoffMatrix m = random_matrix(rng);
        PayoffMatrix neg_t(m.cols(), m.rows());
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) neg_t.at(j, i) = -m.at(i, j);
        CHECK(std::fabs(solve_matrix_game(neg_t).value + solve_matrix_game(m).value) <= 2e-9);
    }
}

TEST_CASE("mix entries are clamped nonnegative and sum to one") {
    std::mt19937_64 rng(31337);
    for (int t = 0; t < 50; ++t) {
        const auto sol = solve_matrix_game(random_matrix(rng));
        double rs = 0.0, cs = 0.0;
        for (double p : sol.row_mix) {
            CHECK(p >= 0.0);
            rs += p;
        }
        for (double p : sol.col_mix) {
            CHECK(p >= 0.0);
            cs += p;
        }
        CHECK(std::fabs(rs - 1.0) <= 1e-9);
        CHECK(std::fabs(cs - 1.0) <= 1e-9);
    }
}
