#include "lmmss/gsvd.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace lmmss {

GsvdFactors gsvd_pair(const Matrix& A, const Matrix& L) {
    const Index m = A.rows(), n = A.cols(), p = L.rows();
    if (m < n) throw DimensionError("gsvd_pair: need m >= n");
    if (L.cols() != n) throw DimensionError("gsvd_pair: column counts differ");
    if (p > n) throw DimensionError("gsvd_pair: need p <= n");
    if (p == 0) throw DimensionError("gsvd_pair: L has no rows");

    // Column-pivoted QR of the stack; the pivoting both detects a rank
    // deficiency (violated completeness) and keeps R well scaled.
    Matrix stacked(m + p, n);
    stacked << A, L;
    Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
    qr.setThreshold(1e-12);
    if (qr.rank() < n)
        throw SingularPairError("gsvd_pair: stacked pair is rank deficient (completeness violated)");

    const Matrix Q = qr.householderQ() * Matrix::Identity(m + p, n);
    const Matrix R = qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation();

    const Matrix QA = Q.topRows(m);
    const Matrix QL = Q.bottomRows(p);

    // SVD of the L block: QL = V * [Mhat 0] * What^T with mu descending, so
    // sigma = sqrt(1 - mu^2) comes out ascending as required.
    Eigen::BDCSVD<Matrix> svd(QL, Eigen::ComputeFullU | Eigen::ComputeFullV);
    GsvdFactors f;
    f.V = svd.matrixU();
    const Matrix& What = svd.matrixV(); // n x n
    f.mu = svd.singularValues();
    if (f.mu(p - 1) <= 1e-12)
        throw SingularPairError("gsvd_pair: L is not full row rank");
    f.sigma = Vector(p);
    for (Index i = 0; i < p; ++i)
        f.sigma(i) = std::sqrt(std::max(0.0, 1.0 - f.mu(i) * f.mu(i)));

    // X = P * R^{-1} * What, undoing the pivoting of the stacked QR.
    Matrix X = R.triangularView<Eigen::Upper>().solve(What);
    f.X = perm * X;

    // U columns: (QA * What)_i has norm sigma_i for i < p and 1 beyond, so
    // normalizing yields orthonormal columns. Columns with sigma ~ 0 carry no
    // information about A and are filled by an orthonormal completion.
    Matrix U = QA * What;
    std::vector<Index> degenerate;
    for (Index i = 0; i < n; ++i) {
        const double s = i < p ? f.sigma(i) : 1.0;
        if (s > 1e-10)
            U.col(i) /= s;
        else
            degenerate.push_back(i);
    }
    if (!degenerate.empty()) {
        Matrix good(m, n - static_cast<Index>(degenerate.size()));
        Index c = 0;
        for (Index i = 0; i < n; ++i) {
            if (std::find(degenerate.begin(), degenerate.end(), i) == degenerate.end())
                good.col(c++) = U.col(i);
        }
        Eigen::HouseholderQR<Matrix> cqr(good);
        const Matrix Qfull = cqr.householderQ() * Matrix::Identity(m, m);
        Index next = good.cols();
        for (Index i : degenerate) U.col(i) = Qfull.col(next++);
    }
    f.U = std::move(U);
    return f;
}

GsvdFactors gsvd_pair(const Matrix& A, const ScalingOperator& L) {
    return gsvd_pair(A, L.entries);
}

Vector gen_singular_values(const GsvdFactors& f) {
    return f.sigma.cwiseQuotient(f.mu);
}

Vector gamma_filter(const GsvdFactors& f, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("gamma_filter: lambda must be positive");
    const Index p = f.sigma.size();
    Vector g(p);
    for (Index i = 0; i < p; ++i) {
        const double s = f.sigma(i), u = f.mu(i);
        g(i) = s / (s * s + lambda * u * u);
    }
    return g;
}

double psi(double gamma, double lambda) {
    if (gamma < 0.0) throw std::invalid_argument("psi: gamma must be nonnegative");
    if (!(lambda > 0.0)) throw std::invalid_argument("psi: lambda must be positive");
    return gamma * std::sqrt(1.0 + gamma * gamma) / (gamma * gamma + lambda);
}

PsiMax psi_max(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("psi_max: lambda must be positive");
    PsiMax out;
    if (lambda < 0.5) {
        out.bounded = true;
        out.gamma_max = std::sqrt(lambda / (1.0 - 2.0 * lambda));
        out.value = 1.0 / (2.0 * std::sqrt(lambda - lambda * lambda));
    } else {
        // psi is nondecreasing with sup 1 approached as gamma grows; there is
        // no finite maximizer, flagged explicitly rather than via an infinity.
        out.bounded = false;
        out.gamma_max = std::numeric_limits<double>::quiet_NaN();
        out.value = 1.0;
    }
    return out;
}

double step_norm_bound(const GsvdFactors& f, double lambda, const Vector& F, double gamma_hat) {
    if (!(gamma_hat > 0.0))
        throw std::invalid_argument("step_norm_bound: completeness constant must be positive");
    const Vector g = gamma_filter(f, lambda);
    const double filter_norm = g.size() > 0 ? g.maxCoeff() : 0.0;
    return std::max(filter_norm, 1.0) * F.norm() / std::sqrt(gamma_hat);
}

} // namespace lmmss
