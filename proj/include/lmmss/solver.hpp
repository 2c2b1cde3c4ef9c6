#pragma once

#include "lmmss/scaling.hpp"
#include "lmmss/types.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace lmmss {

// ============================================================================
// Damped least-squares iteration with a singular scaling operator
// ============================================================================
//
// Minimizes phi(x) = 1/2 ||F(x)||^2 by iterating
//
//     (J_k^T J_k + lambda_k L^T L) d_k = -J_k^T F_k,
//     x_{k+1} = x_k + alpha_k d_k,        lambda_k = ||F_k||^2,
//
// where L is full row rank and N(J_k) ∩ N(L) = {0}. The step length is 1
// whenever the full step contracts the residual by the factor vartheta;
// otherwise an Armijo backtracking search is used. Residual norms decrease
// monotonically in either branch.

/// Residual/Jacobian pair defining a nonlinear least-squares problem.
struct NlsProblem {
    Index n = 0; ///< number of unknowns
    Index m = 0; ///< number of residual components, m >= n
    std::function<Vector(const Vector&)> residual;
    std::function<Matrix(const Vector&)> jacobian;
    /// Distance to the solution set, supplied by synthetic test problems only
    /// (used by local-rate diagnostics); leave empty otherwise.
    std::function<double(const Vector&)> solution_distance;
};

enum class StepMethod {
    normal_cholesky, ///< Cholesky on J^T J + lambda L^T L (fast path)
    augmented_qr     ///< QR of [J; sqrt(lambda) L] (default; avoids squaring)
};

/// Residual-based stopping: quit at the first iterate with
/// ||F_k|| <= tau * noise_norm.
struct DiscrepancyRule {
    double tau = 1.1;       ///< safeguard factor, >= 1
    double noise_norm = 0.0;
};

struct SolverConfig {
    double nu = 1e-4;       ///< Armijo slope fraction, in (0,1)
    double eta = 0.5;       ///< backtracking factor, in (0,1)
    double vartheta = 0.9;  ///< full-step residual contraction factor, in (0,1)
    double eps = 5e-4;      ///< gradient / relative-step stopping tolerance
    int max_iter = 200;
    int max_backtracks = 40;
    StepMethod step_method = StepMethod::augmented_qr;
    std::optional<DiscrepancyRule> discrepancy;

    // Diagnostics. record_gamma stores the completeness constant of
    // (J_k, L) each iteration (an extra symmetric eigensolve); record_gsvd
    // additionally factors the pair to evaluate the step-norm bound and the
    // filter-norm chain. Both are meant for tests, not production runs.
    bool record_gamma = false;
    bool record_gsvd = false;
    bool store_iterates = false;

    void validate() const;
};

/// One row of the solve trace. Fields that are not defined at a given
/// iteration (e.g. step data on the terminal iterate) are quiet NaN and are
/// exported as empty CSV cells.
struct IterationRecord {
    int k = 0;
    double lambda = 0.0;
    double resid_norm = 0.0;
    double grad_norm = 0.0;
    double step_norm = 0.0;
    double alpha = 0.0;
    double model_value = 0.0; ///< ||J d + F||^2 + lambda ||L d||^2 at the step
    double dir_deriv = 0.0;   ///< grad(phi)^T d
    double dist = 0.0;        ///< distance to the solution set, when supplied
    // diagnostic extras (in-memory only, not part of the CSV schema)
    double lin_resid_norm = 0.0; ///< ||J d + F||
    double gamma_hat = 0.0;      ///< lambda_min(J^T J + L^T L), when recorded
    double step_bound = 0.0;     ///< GSVD step-norm bound, when recorded
    double filter_chain = 0.0;   ///< max{||Gamma||,1} ||F||, when recorded

    IterationRecord();
};

enum class StopReason { discrepancy, small_gradient, small_step, max_iter, line_search_failure };
const char* to_string(StopReason r);

struct SolveTrace {
    std::vector<IterationRecord> iterations;
    StopReason stop_reason = StopReason::max_iter;
    std::vector<Vector> iterates; ///< filled when store_iterates is set
};

struct SolveResult {
    Vector x;
    SolveTrace trace;
};

/// lambda_k = ||F_k||^2.
double damping(const Vector& F);

/// grad phi = J^T F.
Vector gradient(const Matrix& J, const Vector& F);

/// Solve (J^T J + lambda L^T L) d = -J^T F. The direction is the unique
/// minimizer of ||J d + F||^2 + lambda ||L d||^2. Throws SingularPairError
/// when the system is not positive definite (completeness violated) and
/// std::invalid_argument for lambda <= 0.
Vector lm_step(const Matrix& J, const Vector& F, const ScalingOperator& L, double lambda,
               StepMethod method = StepMethod::augmented_qr);

struct LineSearchResult {
    double alpha = 1.0;
    Vector x_new;
    Vector F_new;
    int backtracks = 0;
    bool failed = false; ///< Armijo exhausted max_backtracks
};

/// Step-length rule: accept alpha = 1 when ||F(x+d)|| <= vartheta ||F(x)||,
/// otherwise find the smallest m >= 0 with
///     phi(x + eta^m d) - phi(x) <= nu eta^m grad^T d
/// and return alpha = eta^m.
LineSearchResult line_search(const NlsProblem& problem, const Vector& x, const Vector& d,
                             const Vector& grad, const SolverConfig& config);

/// Run the full iteration from x0. The trace carries one record per visited
/// iterate, including the terminal one (whose step fields stay NaN).
SolveResult solve(const NlsProblem& problem, const ScalingOperator& L, const Vector& x0,
                  const SolverConfig& config);

// ----------------------------------------------------------------------------
// Trace diagnostics
// ----------------------------------------------------------------------------

/// Verifies the descent-angle inequality
///     grad^T d <= -gamma_hat * min{1, lambda} * ||d||^2 + 1e-10
/// on every record that has both a step and a recorded completeness constant.
struct GradientRelatedReport {
    bool all_ok = true;
    int checked = 0;
    double max_violation = 0.0; ///< largest positive excess over the bound
    int worst_k = -1;
};
GradientRelatedReport gradient_related_check(const SolveTrace& trace);

/// Empirical local-rate study on a trace with distance data: the ratios
/// dist_{k+1} / dist_k^2 over the last pre-roundoff iterations, the fitted
/// constants of ||d_k|| <= c3 dist_k and ||J_k d_k + F_k|| <= c4 dist_k^2,
/// and whether log dist decreases with nonincreasing increments.
struct LocalRateReport {
    bool has_data = false;
    double max_ratio = 0.0;      ///< max dist_{k+1}/dist_k^2, final window
    double c3 = 0.0;             ///< max ||d_k|| / dist_k
    double c4 = 0.0;             ///< max ||J d + F|| / dist_k^2
    bool log_dist_accelerating = false;
};
LocalRateReport local_rate_check(const SolveTrace& trace, double roundoff_floor = 1e-12);

/// Central finite-difference Jacobian with step 1e-6 (1 + |x_i|) per column;
/// the reference for validating analytic Jacobians.
Matrix fd_jacobian(const NlsProblem& problem, const Vector& x);

} // namespace lmmss
