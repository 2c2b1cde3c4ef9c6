#pragma once

#include "lmmss/solver.hpp"

#include <filesystem>
#include <string>

namespace lmmss {

/// CSV rendering of a solve trace. Columns are fixed:
///     k,lambda,resid_norm,grad_norm,step_norm,alpha,model_value,dir_deriv,dist
/// one row per visited iterate, header row first, NaN fields left empty.
std::string trace_to_csv(const SolveTrace& trace);

/// Writes trace_to_csv to a file, creating parent directories as needed.
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);

/// Plain CSV dump of a dense matrix (debugging aid for trajectories and
/// Jacobians).
void write_matrix_csv(const std::filesystem::path& path, const Matrix& A);

/// Round-trip-exact rendering of a double ("%.17g"); NaN renders empty.
std::string format_double(double v);

} // namespace lmmss
