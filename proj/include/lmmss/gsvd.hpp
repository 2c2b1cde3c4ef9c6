#pragma once

#include "lmmss/scaling.hpp"
#include "lmmss/types.hpp"

namespace lmmss {

// ============================================================================
// Generalized SVD of a pair (A, L) and the filter-factor diagnostics
// ============================================================================
//
// For A (m x n, m >= n) and L (p x n, p <= n, full row rank) with
// N(A) ∩ N(L) = {0} there are U (m x n) and V (p x p) with orthonormal
// columns and a nonsingular X (n x n) such that
//
//     A = U * diag(Sigma, I_{n-p}) * X^{-1},   L = V * [M 0] * X^{-1},
//
// where Sigma = diag(sigma_1 <= ... <= sigma_p), M = diag(mu_1 >= ... >= mu_p)
// and sigma_i^2 + mu_i^2 = 1. The ratios gamma_i = sigma_i / mu_i are the
// generalized singular values; they control the filter factors
// sigma_i / (sigma_i^2 + lambda mu_i^2) through which the damped step acts.

struct GsvdFactors {
    Matrix U;      ///< m x n, orthonormal columns
    Matrix V;      ///< p x p, orthonormal columns
    Matrix X;      ///< n x n, nonsingular shared right factor
    Vector sigma;  ///< p values, ascending in [0, 1]
    Vector mu;     ///< p values, descending in (0, 1]
};

/// Factor the pair (A, L). QR of the stacked (m+p) x n matrix [A; L], then an
/// SVD of the L block of the orthonormal factor; X is recovered from the
/// triangular factor. Throws DimensionError unless m >= n >= p, and
/// SingularPairError when the stack is numerically rank deficient (the
/// completeness condition fails) or L is not full row rank.
GsvdFactors gsvd_pair(const Matrix& A, const Matrix& L);
GsvdFactors gsvd_pair(const Matrix& A, const ScalingOperator& L);

/// Generalized singular values gamma_i = sigma_i / mu_i, nondecreasing.
Vector gen_singular_values(const GsvdFactors& f);

/// Diagonal of the filter matrix (Sigma^2 + lambda M^2)^{-1} Sigma, entries
/// sigma_i / (sigma_i^2 + lambda mu_i^2). Requires lambda > 0.
Vector gamma_filter(const GsvdFactors& f, double lambda);

/// psi(gamma, lambda) = gamma sqrt(1 + gamma^2) / (gamma^2 + lambda).
/// Each filter factor equals psi evaluated at the matching generalized
/// singular value, so sup_gamma psi bounds the filter norm.
double psi(double gamma, double lambda);

/// Supremum of psi(., lambda) over gamma >= 0. For lambda < 1/2 the sup is a
/// maximum, attained at gamma = sqrt(lambda / (1 - 2 lambda)) with value
/// 1 / (2 sqrt(lambda - lambda^2)); for lambda >= 1/2 psi is nondecreasing
/// with sup 1 and no finite maximizer (bounded = false, gamma_max = NaN).
struct PsiMax {
    bool bounded = true;
    double gamma_max = 0.0;
    double value = 0.0;
};
PsiMax psi_max(double lambda);

/// Upper bound on the damped-step norm:
///     ||d|| <= (1 / sqrt(gamma_hat)) * max{||Gamma||_2, 1} * ||F||_2,
/// combining ||X|| <= 1 / sqrt(gamma_hat) with the filter representation of
/// the step. gamma_hat is the completeness constant of the pair.
double step_norm_bound(const GsvdFactors& f, double lambda, const Vector& F, double gamma_hat);

} // namespace lmmss
