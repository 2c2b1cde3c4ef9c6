#include "lmmss/scaling.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

namespace lmmss {

namespace {

Matrix banded_stencil(Index n, std::initializer_list<double> stencil) {
    const Index w = static_cast<Index>(stencil.size());
    Matrix L = Matrix::Zero(n - w + 1, n);
    for (Index r = 0; r < L.rows(); ++r) {
        Index c = r;
        for (double s : stencil) L(r, c++) = s;
    }
    return L;
}

// Full-row-rank guard for the assembled 2D operators. Singular values only;
// the relative tolerance matches the double-precision conditioning of the
// stencils.
void require_full_row_rank(const Matrix& L, const char* what) {
    Eigen::BDCSVD<Matrix> svd(L);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(sv.size() - 1) < 1e-10 * sv(0))
        throw SingularPairError(std::string(what) + ": operator is not full row rank");
}

} // namespace

ScalingOperator identity_scaling(Index n) {
    if (n < 1) throw DimensionError("identity_scaling: n must be positive");
    return {Matrix::Identity(n, n), 0, ScalingAssembly::identity};
}

ScalingOperator first_diff(Index n) {
    if (n < 2) throw DimensionError("first_diff: need n >= 2");
    return {banded_stencil(n, {-1.0, 1.0}), 1, ScalingAssembly::raw};
}

ScalingOperator second_diff(Index n) {
    if (n < 3) throw DimensionError("second_diff: need n >= 3");
    return {banded_stencil(n, {1.0, -2.0, 1.0}), 2, ScalingAssembly::raw};
}

ScalingOperator third_diff(Index n) {
    if (n < 4) throw DimensionError("third_diff: need n >= 4");
    return {banded_stencil(n, {-1.0, 3.0, -3.0, 1.0}), 3, ScalingAssembly::raw};
}

Matrix kron(const Matrix& A, const Matrix& B) {
    return Eigen::kroneckerProduct(A, B);
}

namespace {

ScalingOperator stencil_of_order(int order, Index n) {
    switch (order) {
        case 1: return first_diff(n);
        case 2: return second_diff(n);
        case 3: return third_diff(n);
        default: throw DimensionError("derivative order must be 1, 2 or 3");
    }
}

} // namespace

ScalingOperator assemble_grad2d(int order, Index n) {
    if (order < 1 || order > 3) throw DimensionError("assemble_grad2d: order must be in {1,2,3}");
    if (n < order + 1) throw DimensionError("assemble_grad2d: grid too small for the stencil");
    const Matrix Lx = stencil_of_order(order, n + 1).entries; // along x, n+1 nodes
    const Matrix Ly = stencil_of_order(order, n).entries;     // along y, n nodes
    const Matrix top = kron(Matrix::Identity(n, n), Lx);
    const Matrix bot = kron(Ly, Matrix::Identity(n + 1, n + 1));
    Matrix stacked(top.rows() + bot.rows(), top.cols());
    stacked << top, bot;
    require_full_row_rank(stacked, "assemble_grad2d");
    return {std::move(stacked), order, ScalingAssembly::grad2d};
}

ScalingOperator assemble_tilde2d(int order, Index n) {
    if (order < 1 || order > 2) throw DimensionError("assemble_tilde2d: order must be in {1,2}");
    if (n < order) throw DimensionError("assemble_tilde2d: grid too small for the stencil");
    const Matrix L1d = stencil_of_order(order, n + 1).entries;
    const Matrix eye = Matrix::Identity(n + 1, n + 1);
    const Matrix top = kron(eye, L1d);
    const Matrix bot = kron(L1d, eye);
    Matrix stacked(top.rows() + bot.rows(), top.cols());
    stacked << top, bot;
    require_full_row_rank(stacked, "assemble_tilde2d");
    return {std::move(stacked), order, ScalingAssembly::tilde2d};
}

ScalingOperator block_orthotropic(const ScalingOperator& inner) {
    const Index p = inner.rows(), n = inner.cols();
    Matrix blk = Matrix::Zero(2 * p, 2 * n);
    blk.topLeftCorner(p, n) = inner.entries;
    blk.bottomRightCorner(p, n) = inner.entries;
    return {std::move(blk), inner.derivative_order, ScalingAssembly::block_orthotropic};
}

double completeness_gamma(const Matrix& J, const Matrix& L) {
    if (L.size() > 0 && L.cols() != J.cols())
        throw DimensionError("completeness_gamma: column counts differ");
    Matrix H = J.transpose() * J;
    if (L.size() > 0) H += L.transpose() * L;
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    return lo > 0.0 ? lo : 0.0;
}

double completeness_gamma(const Matrix& J, const ScalingOperator& L) {
    return completeness_gamma(J, L.entries);
}

} // namespace lmmss
