#include "doctest.h"

#include "lmmss/scaling.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

using namespace lmmss;

namespace {

Matrix random_matrix(Index r, Index c, uint32_t seed) {
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix A(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) A(i, j) = dist(gen);
    return A;
}

Index numerical_row_rank(const Matrix& A) {
    Eigen::BDCSVD<Matrix> svd(A);
    const auto& sv = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-10 * sv(0)) ++rank;
    return rank;
}

} // namespace

TEST_CASE("first difference stencil") {
    CHECK_THROWS_AS(first_diff(1), DimensionError);

    auto L2 = first_diff(2);
    CHECK(L2.entries.rows() == 1);
    CHECK(L2.entries(0, 0) == -1.0);
    CHECK(L2.entries(0, 1) == 1.0);
    CHECK(L2.derivative_order == 1);

    auto L3 = first_diff(3);
    Matrix want(2, 3);
    want << -1, 1, 0, 0, -1, 1;
    CHECK((L3.entries - want).norm() == 0.0);

    // constants are annihilated
    auto L5 = first_diff(5);
    CHECK((L5.entries * Vector::Ones(5)).norm() == 0.0);
}

TEST_CASE("second difference stencil") {
    CHECK_THROWS_AS(second_diff(2), DimensionError);

    auto L3 = second_diff(3);
    CHECK(L3.entries.rows() == 1);
    CHECK(L3.entries(0, 0) == 1.0);
    CHECK(L3.entries(0, 1) == -2.0);
    CHECK(L3.entries(0, 2) == 1.0);
    CHECK(L3.derivative_order == 2);

    // affine sequences lie in the null space
    auto L5 = second_diff(5);
    Vector ramp(5);
    ramp << 1, 2, 3, 4, 5;
    CHECK((L5.entries * ramp).norm() == 0.0);
    CHECK((second_diff(4).entries * (3.7 * Vector::Ones(4))).norm() == 0.0);
}

TEST_CASE("third difference stencil") {
    CHECK_THROWS_AS(third_diff(3), DimensionError);

    auto L4 = third_diff(4);
    Matrix want(1, 4);
    want << -1, 3, -3, 1;
    CHECK((L4.entries - want).norm() == 0.0);
    CHECK(L4.derivative_order == 3);

    // quadratic sequences lie in the null space
    auto L6 = third_diff(6);
    Vector sq(6);
    for (int i = 0; i < 6; ++i) sq(i) = double((i + 1) * (i + 1));
    CHECK((L6.entries * sq).norm() <= 1e-12);

    CHECK(numerical_row_rank(third_diff(10).entries) == 7);
}

TEST_CASE("1D stencils annihilate sampled polynomials below their order") {
    // uniform index grid 0..n-1; exact to roundoff for these integer stencils
    const Index n = 9;
    auto sample_poly = [&](int degree) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) {
            double x = double(i), acc = 0.0;
            for (int d = 0; d <= degree; ++d) acc += (d + 1) * std::pow(x, d);
            v(i) = acc;
        }
        return v;
    };
    CHECK((first_diff(n).entries * sample_poly(0)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((second_diff(n).entries * sample_poly(1)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((third_diff(n).entries * sample_poly(2)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("kronecker product") {
    Matrix L(1, 2);
    L << -1, 1;
    Matrix got = kron(Matrix::Identity(2, 2), L);
    Matrix want(2, 4);
    want << -1, 1, 0, 0, 0, 0, -1, 1;
    CHECK((got - want).norm() == 0.0);

    // mixed-product identity (A (x) B)(x (x) y) = (Ax) (x) (By)
    Matrix A = random_matrix(2, 2, 11), B = random_matrix(2, 2, 12);
    Vector x = random_matrix(2, 1, 13), y = random_matrix(2, 1, 14);
    Vector xy = kron(x, y);
    Vector lhs = kron(A, B) * xy;
    Vector rhs = kron(Matrix(A * x), Matrix(B * y));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);

    CHECK(kron(Matrix::Identity(14, 14), first_diff(15).entries).rows() == 196);
    CHECK(kron(Matrix::Identity(14, 14), first_diff(15).entries).cols() == 210);
}

TEST_CASE("2D gradient-style assembly") {
    auto G1 = assemble_grad2d(1, 14);
    CHECK(G1.rows() == 391); // 14*14 x-rows plus 13*15 y-rows
    CHECK(G1.cols() == 210);
    CHECK(G1.derivative_order == 1);
    CHECK((G1.entries * Vector::Ones(210)).cwiseAbs().maxCoeff() == 0.0);

    // order 2 annihilates affine functions of the grid coordinates
    const Index n = 4;
    auto G2 = assemble_grad2d(2, n);
    Vector v(n * (n + 1));
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i <= n; ++i) v(i + j * (n + 1)) = 2.0 + 0.3 * double(i) - 1.7 * double(j);
    CHECK((G2.entries * v).cwiseAbs().maxCoeff() <= 1e-12);

    CHECK(numerical_row_rank(G1.entries) == G1.rows());
    CHECK_THROWS_AS(assemble_grad2d(3, 3), DimensionError);
    CHECK_THROWS_AS(assemble_grad2d(4, 10), DimensionError);
}

TEST_CASE("2D square-grid assembly") {
    auto T1 = assemble_tilde2d(1, 15);
    CHECK(T1.rows() == 480);
    CHECK(T1.cols() == 256);
    CHECK((T1.entries * Vector::Ones(256)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(numerical_row_rank(T1.entries) == 480);

    // null space of the order-2 assembly = bilinear functions (dimension 4)
    auto T2 = assemble_tilde2d(2, 3);
    Eigen::BDCSVD<Matrix> svd(T2.entries);
    const auto& sv = svd.singularValues();
    Index null_dim = T2.cols() - numerical_row_rank(T2.entries);
    CHECK(sv.size() == T2.rows());
    CHECK(null_dim == 4);
    // explicit bilinear sample
    Vector v(16);
    for (Index j = 0; j < 4; ++j)
        for (Index i = 0; i < 4; ++i) v(i + j * 4) = 1.0 + 2.0 * i - 0.5 * j + 0.25 * i * j;
    CHECK((T2.entries * v).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("orthotropic block doubling") {
    auto inner = assemble_tilde2d(1, 15);
    auto blk = block_orthotropic(inner);
    CHECK(blk.rows() == 960);
    CHECK(blk.cols() == 512);

    Vector k11 = random_matrix(256, 1, 21), k22 = random_matrix(256, 1, 22);
    Vector stacked(512);
    stacked << k11, k22;
    Vector out = blk.entries * stacked;
    CHECK((out.head(480) - inner.entries * k11).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((out.tail(480) - inner.entries * k22).cwiseAbs().maxCoeff() <= 1e-14);

    // constants on each block independently are annihilated
    Vector c(512);
    c.head(256).setConstant(2.0);
    c.tail(256).setConstant(-3.0);
    CHECK((blk.entries * c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("completeness constant") {
    // J^T J = I with an empty operator
    Matrix empty(0, 2);
    CHECK(completeness_gamma(Matrix::Identity(2, 2), empty) == doctest::Approx(1.0));

    Matrix J(2, 2);
    J << 1, 0, 0, 0;
    Matrix L(1, 2);
    L << -1, 1;
    // smallest eigenvalue of [[2,-1],[-1,1]]
    CHECK(completeness_gamma(J, L) == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));

    Matrix Z = Matrix::Zero(2, 2);
    Matrix Lrow(1, 2);
    Lrow << 1, 1;
    CHECK(completeness_gamma(Z, Lrow) == 0.0);

    CHECK_THROWS_AS(completeness_gamma(Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                    DimensionError);
}

TEST_CASE("completeness constant bounds the joint quadratic form") {
    Matrix J = random_matrix(8, 5, 31);
    auto L = first_diff(5);
    const double gamma = completeness_gamma(J, L);
    std::mt19937 gen(32);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 100; ++t) {
        Vector v(5);
        for (Index i = 0; i < 5; ++i) v(i) = nd(gen);
        v.normalize();
        const double lhs = gamma * v.squaredNorm();
        const double rhs = (J * v).squaredNorm() + (L.entries * v).squaredNorm();
        CHECK(lhs <= rhs + 1e-10);
    }
}
