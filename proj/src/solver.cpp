#include "lmmss/solver.hpp"

#include "lmmss/gsvd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <limits>

namespace lmmss {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

IterationRecord::IterationRecord()
    : lambda(kNaN), resid_norm(kNaN), grad_norm(kNaN), step_norm(kNaN), alpha(kNaN),
      model_value(kNaN), dir_deriv(kNaN), dist(kNaN), lin_resid_norm(kNaN), gamma_hat(kNaN),
      step_bound(kNaN), filter_chain(kNaN) {}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::discrepancy: return "discrepancy";
        case StopReason::small_gradient: return "small_gradient";
        case StopReason::small_step: return "small_step";
        case StopReason::max_iter: return "max_iter";
        case StopReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

void SolverConfig::validate() const {
    auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!in_unit(nu) || !in_unit(eta) || !in_unit(vartheta))
        throw std::invalid_argument("SolverConfig: nu, eta, vartheta must lie in (0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("SolverConfig: eps must be positive");
    if (max_iter < 0 || max_backtracks < 0)
        throw std::invalid_argument("SolverConfig: iteration limits must be nonnegative");
    if (discrepancy && !(discrepancy->tau >= 1.0 && discrepancy->noise_norm >= 0.0))
        throw std::invalid_argument("SolverConfig: discrepancy needs tau >= 1 and noise_norm >= 0");
}

double damping(const Vector& F) { return F.squaredNorm(); }

Vector gradient(const Matrix& J, const Vector& F) {
    if (J.rows() != F.size()) throw DimensionError("gradient: J rows and F length differ");
    return J.transpose() * F;
}

namespace {

// Shared implementation so solve() can reuse a precomputed L^T L on the
// Cholesky path.
Vector lm_step_impl(const Matrix& J, const Vector& F, const Matrix& Lmat, const Matrix* LtL,
                    double lambda, StepMethod method) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lm_step: lambda must be positive");
    if (J.rows() != F.size()) throw DimensionError("lm_step: J rows and F length differ");
    if (Lmat.size() > 0 && Lmat.cols() != J.cols())
        throw DimensionError("lm_step: L columns and J columns differ");

    const Index n = J.cols();
    if (method == StepMethod::normal_cholesky) {
        Matrix H = J.transpose() * J;
        if (LtL)
            H.noalias() += lambda * (*LtL);
        else if (Lmat.size() > 0)
            H.noalias() += lambda * (Lmat.transpose() * Lmat);
        Eigen::LLT<Matrix> llt(H);
        if (llt.info() != Eigen::Success)
            throw SingularPairError("lm_step: damped normal matrix is not positive definite");
        return llt.solve(-(J.transpose() * F));
    }

    // Augmented least squares: argmin ||[J; sqrt(lambda) L] d + [F; 0]||.
    const Index p = Lmat.rows();
    Matrix K(J.rows() + p, n);
    K.topRows(J.rows()) = J;
    if (p > 0) K.bottomRows(p) = std::sqrt(lambda) * Lmat;
    Eigen::ColPivHouseholderQR<Matrix> qr(K);
    qr.setThreshold(1e-12);
    if (qr.rank() < n)
        throw SingularPairError("lm_step: augmented matrix is rank deficient");
    Vector rhs = Vector::Zero(K.rows());
    rhs.head(J.rows()) = -F;
    return qr.solve(rhs);
}

} // namespace

Vector lm_step(const Matrix& J, const Vector& F, const ScalingOperator& L, double lambda,
               StepMethod method) {
    return lm_step_impl(J, F, L.entries, nullptr, lambda, method);
}

LineSearchResult line_search(const NlsProblem& problem, const Vector& x, const Vector& d,
                             const Vector& grad, const SolverConfig& config) {
    LineSearchResult out;
    if (d.norm() == 0.0) { // stationary point: nothing to do
        out.x_new = x;
        out.F_new = problem.residual(x);
        return out;
    }

    const Vector F0 = problem.residual(x);
    const double phi0 = 0.5 * F0.squaredNorm();
    const double slope = grad.dot(d);

    Vector x_full = x + d;
    Vector F_full = problem.residual(x_full);
    if (F_full.norm() <= config.vartheta * F0.norm()) {
        out.x_new = std::move(x_full);
        out.F_new = std::move(F_full);
        return out;
    }

    double alpha = 1.0;
    Vector x_try = std::move(x_full);
    Vector F_try = std::move(F_full);
    for (int m = 0; m <= config.max_backtracks; ++m) {
        if (m > 0) {
            alpha *= config.eta;
            x_try = x + alpha * d;
            F_try = problem.residual(x_try);
        }
        const double phi_try = 0.5 * F_try.squaredNorm();
        if (phi_try - phi0 <= config.nu * alpha * slope) {
            out.alpha = alpha;
            out.x_new = std::move(x_try);
            out.F_new = std::move(F_try);
            out.backtracks = m;
            return out;
        }
    }
    out.failed = true;
    out.alpha = alpha;
    out.x_new = x;
    out.F_new = F0;
    out.backtracks = config.max_backtracks;
    return out;
}

SolveResult solve(const NlsProblem& problem, const ScalingOperator& L, const Vector& x0,
                  const SolverConfig& config) {
    config.validate();
    if (x0.size() != problem.n) throw DimensionError("solve: x0 length differs from problem.n");
    if (L.entries.size() > 0 && L.cols() != problem.n)
        throw DimensionError("solve: scaling operator columns differ from problem.n");

    SolveResult res;
    SolveTrace& trace = res.trace;

    const bool want_chol_cache = config.step_method == StepMethod::normal_cholesky ||
                                 config.record_gamma || config.record_gsvd;
    Matrix LtL;
    if (want_chol_cache) {
        LtL = L.entries.size() > 0 ? Matrix(L.entries.transpose() * L.entries)
                                   : Matrix(Matrix::Zero(problem.n, problem.n));
    }

    Vector x = x0;
    Vector F = problem.residual(x);
    double lambda = damping(F);
    double prev_step_norm = kNaN; // ||x_k - x_{k-1}||

    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.lambda = lambda;
        rec.resid_norm = F.norm();
        if (problem.solution_distance) rec.dist = problem.solution_distance(x);
        if (config.store_iterates) trace.iterates.push_back(x);

        // Stopping rules, in priority order. The residual test needs no
        // Jacobian, so a discrepancy stop skips the terminal evaluation.
        if (config.discrepancy &&
            rec.resid_norm <= config.discrepancy->tau * config.discrepancy->noise_norm) {
            trace.iterations.push_back(rec);
            trace.stop_reason = StopReason::discrepancy;
            break;
        }

        Matrix J = problem.jacobian(x);
        Vector grad = gradient(J, F);
        rec.grad_norm = grad.norm();

        if (config.record_gamma || config.record_gsvd) {
            Matrix H = J.transpose() * J + LtL;
            Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
            rec.gamma_hat = std::max(0.0, es.eigenvalues()(0));
        }

        if (rec.grad_norm < config.eps) {
            trace.iterations.push_back(rec);
            trace.stop_reason = StopReason::small_gradient;
            break;
        }
        if (k >= 1) {
            const double xn = x.norm();
            const double rel = xn > 0.0 ? prev_step_norm / xn : prev_step_norm;
            if (rel < config.eps) {
                trace.iterations.push_back(rec);
                trace.stop_reason = StopReason::small_step;
                break;
            }
        }
        if (k >= config.max_iter) {
            trace.iterations.push_back(rec);
            trace.stop_reason = StopReason::max_iter;
            break;
        }

        const Vector d = lm_step_impl(J, F, L.entries,
                                      want_chol_cache ? &LtL : nullptr, lambda,
                                      config.step_method);
        rec.step_norm = d.norm();
        rec.dir_deriv = grad.dot(d);
        const Vector lin_resid = J * d + F;
        rec.lin_resid_norm = lin_resid.norm();
        const double Ld_sq = L.entries.size() > 0 ? (L.entries * d).squaredNorm() : 0.0;
        rec.model_value = lin_resid.squaredNorm() + lambda * Ld_sq;

        if (config.record_gsvd && L.entries.size() > 0 && rec.gamma_hat > 0.0) {
            const GsvdFactors fct = gsvd_pair(J, L.entries);
            rec.step_bound = step_norm_bound(fct, lambda, F, rec.gamma_hat);
            const Vector filt = gamma_filter(fct, lambda);
            rec.filter_chain = std::max(filt.maxCoeff(), 1.0) * rec.resid_norm;
        }

        LineSearchResult ls = line_search(problem, x, d, grad, config);
        if (ls.failed) {
            trace.iterations.push_back(rec);
            trace.stop_reason = StopReason::line_search_failure;
            break;
        }
        rec.alpha = ls.alpha;
        trace.iterations.push_back(rec);

        prev_step_norm = (ls.x_new - x).norm();
        x = std::move(ls.x_new);
        F = std::move(ls.F_new);
        lambda = damping(F);
    }

    res.x = std::move(x);
    return res;
}

GradientRelatedReport gradient_related_check(const SolveTrace& trace) {
    GradientRelatedReport rep;
    for (const auto& r : trace.iterations) {
        if (std::isnan(r.dir_deriv) || std::isnan(r.gamma_hat) || std::isnan(r.step_norm))
            continue;
        ++rep.checked;
        const double bound = -r.gamma_hat * std::min(1.0, r.lambda) * r.step_norm * r.step_norm;
        const double excess = r.dir_deriv - bound;
        if (excess > 1e-10) {
            rep.all_ok = false;
            if (excess > rep.max_violation) {
                rep.max_violation = excess;
                rep.worst_k = r.k;
            }
        }
    }
    return rep;
}

LocalRateReport local_rate_check(const SolveTrace& trace, double roundoff_floor) {
    LocalRateReport rep;
    const auto& it = trace.iterations;

    std::vector<double> dists;
    for (const auto& r : it) {
        if (!std::isnan(r.dist)) dists.push_back(r.dist);
        if (!std::isnan(r.dist) && r.dist > roundoff_floor) {
            if (!std::isnan(r.step_norm) && r.dist > 0.0)
                rep.c3 = std::max(rep.c3, r.step_norm / r.dist);
            if (!std::isnan(r.lin_resid_norm) && r.dist > 0.0)
                rep.c4 = std::max(rep.c4, r.lin_resid_norm / (r.dist * r.dist));
        }
    }
    if (dists.size() < 2) return rep;
    rep.has_data = true;

    // Quadratic-rate ratios over the final pre-roundoff window (last 3 pairs).
    std::vector<double> ratios;
    for (size_t i = 0; i + 1 < dists.size(); ++i) {
        if (dists[i] > roundoff_floor && dists[i + 1] >= 0.0)
            ratios.push_back(dists[i + 1] / (dists[i] * dists[i]));
    }
    const size_t take = std::min<size_t>(3, ratios.size());
    for (size_t i = ratios.size() - take; i < ratios.size(); ++i)
        rep.max_ratio = std::max(rep.max_ratio, ratios[i]);

    // log dist should decrease with nonincreasing increments while above the
    // roundoff floor (superlinear decay steepens; geometric decay is flat).
    rep.log_dist_accelerating = true;
    std::vector<double> logs;
    for (double d : dists) {
        if (d > roundoff_floor)
            logs.push_back(std::log(d));
        else
            break;
    }
    for (size_t i = 0; i + 1 < logs.size(); ++i) {
        if (!(logs[i + 1] < logs[i])) rep.log_dist_accelerating = false;
    }
    for (size_t i = 0; i + 2 < logs.size(); ++i) {
        const double inc1 = logs[i + 1] - logs[i];
        const double inc2 = logs[i + 2] - logs[i + 1];
        if (inc2 > inc1 + 1e-9) rep.log_dist_accelerating = false;
    }
    return rep;
}

Matrix fd_jacobian(const NlsProblem& problem, const Vector& x) {
    Matrix J(problem.m, problem.n);
    Vector xp = x, xm = x;
    for (Index i = 0; i < problem.n; ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x(i)));
        xp(i) = x(i) + h;
        xm(i) = x(i) - h;
        J.col(i) = (problem.residual(xp) - problem.residual(xm)) / (2.0 * h);
        xp(i) = x(i);
        xm(i) = x(i);
    }
    return J;
}

} // namespace lmmss
