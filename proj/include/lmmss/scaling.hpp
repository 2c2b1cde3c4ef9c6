#pragma once

#include "lmmss/types.hpp"

namespace lmmss {

// ============================================================================
// Discrete derivative operators used as singular scaling matrices
// ============================================================================
//
// The damping term of the solver is lambda * L^T L where L is a full-row-rank
// p x n matrix, typically a discrete derivative operator with a nontrivial
// null space (constants, affine functions, ...). This header builds the 1D
// stencil factors and their 2D Kronecker assemblies, and provides the
// completeness constant gamma = lambda_min(J^T J + L^T L) that certifies
// N(J) and N(L) intersect trivially.

enum class ScalingAssembly { identity, grad2d, tilde2d, block_orthotropic, raw };

struct ScalingOperator {
    Matrix entries;            ///< p x n dense operator, p <= n, full row rank
    int derivative_order = 0;  ///< 0 = identity, d >= 1 annihilates degree < d
    ScalingAssembly assembly = ScalingAssembly::raw;

    Index rows() const { return entries.rows(); }
    Index cols() const { return entries.cols(); }
};

/// n x n identity used when no smoothing seminorm is wanted (classic damping).
ScalingOperator identity_scaling(Index n);

/// Forward-difference stencil (-1, 1): (n-1) x n, null space = constants.
ScalingOperator first_diff(Index n);

/// Second-difference stencil (1, -2, 1): (n-2) x n, null space = affine
/// sequences.
ScalingOperator second_diff(Index n);

/// Third-difference stencil (-1, 3, -3, 1): (n-3) x n, null space = quadratic
/// sequences.
ScalingOperator third_diff(Index n);

/// Dense Kronecker product, (rA*rB) x (cA*cB).
Matrix kron(const Matrix& A, const Matrix& B);

/// Stacked 2D derivative operator for fields on an (n+1) x n tensor grid
/// (n+1 nodes in x, n in y), stored x-index fastest:
///     [ I_n (x) L_order(n+1) ]      rows differencing along x
///     [ L_order(n) (x) I_{n+1} ]    rows differencing along y
/// order in {1,2,3}. Throws DimensionError when n is too small for the
/// stencils, SingularPairError if the assembled operator is not full row rank.
ScalingOperator assemble_grad2d(int order, Index n);

/// Same stacking for fields on the square (n+1) x (n+1) grid:
///     [ I_{n+1} (x) L_order(n+1) ]
///     [ L_order(n+1) (x) I_{n+1} ]
/// order in {1,2}.
ScalingOperator assemble_tilde2d(int order, Index n);

/// Block-diagonal doubling diag(L, L) for two-component fields (e.g. the two
/// diagonal entries of an orthotropic conductivity) smoothed independently.
ScalingOperator block_orthotropic(const ScalingOperator& inner);

/// Smallest eigenvalue of J^T J + L^T L. Strictly positive exactly when no
/// nonzero vector is annihilated by both J and L, in which case the damped
/// normal matrix J^T J + lambda L^T L is positive definite for every
/// lambda > 0. Tiny negative eigenvalues from roundoff are clamped to zero.
double completeness_gamma(const Matrix& J, const Matrix& L);
double completeness_gamma(const Matrix& J, const ScalingOperator& L);

} // namespace lmmss
