#include "lmmss/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lmmss {

std::string format_double(double v) {
    if (std::isnan(v)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_to_csv(const SolveTrace& trace) {
    std::string out = "k,lambda,resid_norm,grad_norm,step_norm,alpha,model_value,dir_deriv,dist\n";
    for (const auto& r : trace.iterations) {
        out += std::to_string(r.k);
        for (double v : {r.lambda, r.resid_norm, r.grad_norm, r.step_norm, r.alpha,
                         r.model_value, r.dir_deriv, r.dist}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

} // namespace

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
    auto f = open_for_write(path);
    f << trace_to_csv(trace);
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& A) {
    auto f = open_for_write(path);
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index j = 0; j < A.cols(); ++j) {
            if (j) f << ',';
            f << format_double(A(i, j));
        }
        f << '\n';
    }
}

} // namespace lmmss
